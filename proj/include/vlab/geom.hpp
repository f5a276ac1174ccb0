#pragma once

// Planar domains (disk / annulus / simple polygon) and S^1-valued boundary
// data given as winding + trigonometric residual phase. Orientation
// convention throughout: nu = outward normal (points into holes on inner
// components), tau = nu^perp with det(nu,tau) = +1, i.e. tau runs
// counterclockwise on the outer boundary and clockwise on inner ones.

#include "vlab/common.hpp"

#include <complex>

namespace vlab {

struct Domain {
    enum class Kind { Disk, Annulus, Polygon };
    Kind kind = Kind::Disk;

    double radius = 1.0;        // outer radius (disk / annulus)
    double inner_radius = 0.0;  // annulus only, 0 < inner < radius
    std::vector<Vec2> poly;     // polygon vertices, counterclockwise, simple

    static Domain disk(double r = 1.0);
    static Domain annulus(double r_inner, double r_outer = 1.0);
    static Domain polygon(std::vector<Vec2> verts);

    int num_loops() const { return kind == Kind::Annulus ? 2 : 1; }

    bool inside(const Vec2& p) const;
    double dist_to_boundary(const Vec2& p) const;

    // Loop parameterization by normalized t in [0,1), always counterclockwise
    // in the plane (independent of the tau convention; integration helpers
    // handle orientation).
    Vec2 loop_point(int loop, double t) const;
    double loop_length(int loop) const;
    // Parameter of a point lying on (or near) the given loop.
    double loop_param(int loop, const Vec2& p) const;

    // One anchor point per hole (annulus: the hole centroid).
    std::vector<Vec2> anchors() const;

    // Diameter-scale bounding box, used by mesher and locate grids.
    void bbox(Vec2& lo, Vec2& hi) const;

private:
    // polygon helpers
    std::vector<double> cumlen_; // cumulative arclength, built on construction
    void build_poly_cache();
};

// g restricted to one boundary loop: g(t) = exp(i*phase(t)) with
// phase(t) = 2*pi*winding*t + phase0 + sum_k (A_k cos(2*pi*k*t) + B_k sin(2*pi*k*t)).
// `winding` is the degree of g along the loop traversed counterclockwise.
struct LoopDatum {
    int winding = 0;
    double phase0 = 0.0;
    std::vector<double> cos_coef; // A_k, k = 1..K
    std::vector<double> sin_coef; // B_k

    double phase(double t) const;
    double dphase_dt(double t) const;
};

struct BoundaryDatum {
    std::vector<LoopDatum> loops; // one per boundary component, index = loop tag

    std::complex<double> value(int loop, double t) const {
        double ph = loops.at(loop).phase(t);
        return {std::cos(ph), std::sin(ph)};
    }
    int winding(int loop) const { return loops.at(loop).winding; }

    // Phase speed in the tau direction per unit arclength,
    // sigma'(x) = -i conj(g) dg/dtau, at parameter t on the given loop.
    // tau is counterclockwise on loop 0 and clockwise on holes.
    double phase_speed_tau(const Domain& dom, int loop, double t) const;
};

// Common data: pure winding datum g = e^{i n theta}-style on every loop.
BoundaryDatum winding_datum(const Domain& dom, std::vector<int> windings);

} // namespace vlab
