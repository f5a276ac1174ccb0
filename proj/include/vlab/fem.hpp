#pragma once

// P1 scalar finite elements: fields, the Galerkin Laplace operator with
// Dirichlet / pure-Neumann solves, discrete boundary fluxes, and gradient
// recovery tuned for harmonic fields.

#include "vlab/mesh.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <memory>

namespace vlab {

struct ScalarField {
    std::shared_ptr<const Mesh> mesh;
    Eigen::VectorXd values; // one per vertex

    double eval(const Vec2& p) const;          // P1 interpolation, OutOfDomain if outside
    double eval_in_tri(int t, const Vec2& p) const;
    Vec2 grad_tri(int t) const;                // constant per triangle
    // Gradient at a point: containing-triangle gradient; on a vertex or edge,
    // area-weighted average of the adjacent triangles.
    Vec2 grad_at(const Vec2& p) const;
};

// Mean-value recovery for a discretely-harmonic field: the average of grad u
// over B_rho(c) equals grad u(c) exactly for harmonic u, and the average is a
// pure boundary integral (1/(pi rho^2)) \oint_{dB} u nu ds, which also
// averages out the O(h) oscillation of the P1 gradient. Likewise the value.
Vec2 harmonic_mean_gradient(const ScalarField& u, const Vec2& c, double rho, int n = 720);
double harmonic_mean_value(const ScalarField& u, const Vec2& c, double rho, int n = 720);

class LaplaceOp {
public:
    explicit LaplaceOp(std::shared_ptr<const Mesh> mesh);

    const Mesh& mesh() const { return *mesh_; }
    std::shared_ptr<const Mesh> mesh_ptr() const { return mesh_; }
    const Eigen::SparseMatrix<double>& stiffness() const { return K_; }

    // boundary_values: indexed by vertex id (only boundary entries are read).
    // Optional load = RHS functional against interior hats.
    ScalarField solve_dirichlet(const Eigen::VectorXd& boundary_values,
                                const Eigen::VectorXd* load = nullptr) const;

    // Pure Neumann problem K u = rhs with the normalization that the
    // arclength mean of u over the whole boundary vanishes (Lagrange
    // multiplier block). rhs must be (numerically) compatible.
    ScalarField solve_neumann(const Eigen::VectorXd& rhs) const;

    // Relative residual of the last solve, ||K x - b|| / (1 + ||b||).
    double last_residual() const { return last_residual_; }

    // Discrete flux \oint_{loop} d_nu u ds (nu outward of the domain) of a
    // field with (K u)_i = 0 at interior vertices; exact P1 conservation.
    double loop_flux(const ScalarField& u, int loop) const;

    // Arclength weights of boundary vertices (hat integrals over the boundary).
    const Eigen::VectorXd& boundary_mass() const { return bmass_; }

private:
    std::shared_ptr<const Mesh> mesh_;
    Eigen::SparseMatrix<double> K_;
    Eigen::VectorXd bmass_;
    std::vector<int> interior_;          // interior vertex ids
    std::vector<int> pos_;               // vertex id -> position in interior_, or -1
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> interior_ldlt_;
    mutable std::unique_ptr<Eigen::SparseLU<Eigen::SparseMatrix<double>>> neumann_lu_;
    mutable Eigen::SparseMatrix<double> neumann_kkt_;
    mutable double last_residual_ = 0.0;
};

// Harmonic extension oracle on the unit disk via the Poisson kernel
// (trapezoid in the boundary angle; g is the boundary value as a function of
// theta). Only valid for |p| < 1.
double poisson_disk_value(const std::function<double(double)>& g, const Vec2& p, int n = 4096);

} // namespace vlab
