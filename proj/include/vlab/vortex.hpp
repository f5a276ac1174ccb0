#pragma once

// Vortex configurations and canonical singular maps to the circle.
//
// A configuration (x_j, d_j) with boundary datum g determines, up to gauge,
// the map u_x = e^{i phi} * prod_j ((x-x_j)/|x-x_j|)^{d_j} * (hole factors),
// where phi is the harmonic extension of the boundary phase residual. Its
// current j u_x = u_x x grad u_x splits into the closed-form singular part
// sum_m s_m K(x;c_m) plus grad phi.

#include "vlab/fem.hpp"
#include "vlab/singular.hpp"

#include <complex>

namespace vlab {

struct VortexConfig {
    std::vector<Vec2> points;
    std::vector<int> degrees;

    int n() const { return (int)points.size(); }
    int total_degree() const {
        int s = 0;
        for (int d : degrees) s += d;
        return s;
    }
    double min_separation() const; // +inf for n = 1
    double boundary_clearance(const Domain& dom) const;
    void validate(const Domain& dom) const; // InvalidConfig on violation
};

// deg g|outer == sum_j d_j + sum_holes deg g|hole, all degrees taken
// counterclockwise. Pure predicate.
bool check_compatibility(const Domain& dom, const BoundaryDatum& bd, const VortexConfig& cfg);

struct CanonicalMap {
    std::shared_ptr<const Mesh> mesh;
    std::shared_ptr<const LaplaceOp> op; // owns the factorization, reused by transports
    Domain domain;
    BoundaryDatum datum;
    VortexConfig config;
    std::vector<Charge> charges; // vortices first, then one anchor per hole
    Eigen::VectorXd boundary_phase; // the unwrapped residual trace (gauge)
    ScalarField phi;             // harmonic extension of the residual

    std::complex<double> value(const Vec2& p) const; // |value| = 1 exactly
    int n_vortices() const { return config.n(); }
};

CanonicalMap build_canonical_map(std::shared_ptr<const Mesh> mesh, const Domain& dom,
                                 const BoundaryDatum& bd, const VortexConfig& cfg);

// Move the vortices of an existing map without re-meshing or re-gauging:
// the boundary trace is corrected by the (winding-zero) phase increment and
// re-extended harmonically. Guarded by TransportTooFar.
CanonicalMap transport_config(const CanonicalMap& base, const std::vector<Vec2>& new_points);

// -------------------------------------------------------------- currents

struct CurrentField {
    std::shared_ptr<const Mesh> mesh;
    std::vector<Charge> charges;
    std::vector<Vec2> tri_grad; // regular part: gradient of the phase field(s) per triangle
    std::vector<Vec2> tri_mean; // exact mean of the full current per triangle

    Vec2 eval(const Vec2& p) const;          // SingularPoint within 1e-12 of a center
    Vec2 eval_in_tri(int t, const Vec2& p) const;
    Vec2 regular_part_at(const Vec2& p) const; // full current minus the kernel of the
                                               // nearest charge (finite at that vortex)
};

// j u_x of the canonical map; optional extra phase psi gives j(e^{i psi} u_x)
// = j u_x + grad psi.
CurrentField current_field(const CanonicalMap& cm, const ScalarField* extra_phase = nullptr);

Vec2 singular_current(const std::vector<Charge>& charges, const Vec2& p);

// Trapezoidal circulation of the current along the circle of given center and
// radius; equals 2 pi * (enclosed degree) up to quadrature error.
double circulation(const CurrentField& f, const Vec2& center, double radius, int npts = 256);

} // namespace vlab
