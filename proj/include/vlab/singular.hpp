#pragma once

// Exact integration of vortex-current integrands over triangles.
//
// The singular part of every current is a sum of rotational log-kernels
//   K(x;c) = (x-c)^perp / |x-c|^2 = grad^perp ln|x-c|,
// and all the quadratic quantities we need reduce to boundary integrals:
//   \int_T K(x;c) dA        = \oint_{dT} ln|x-c| tau ds            (any c not on dT)
//   \int_T K_i . K_j dA     = \oint_{dT} ln r_i  d_nu ln r_j ds
//                             - 2 pi ln|c_i - c_j| [c_j inside T]  (c_j may be inside)
// since grad^perp a . grad^perp b = grad a . grad b and Delta ln r = 2 pi delta.
// Edge integrals are Gauss-Legendre with adaptive bisection near the centers,
// so triangles arbitrarily close to a singularity are still integrated to
// near machine precision as long as the center is not exactly on an edge.

#include "vlab/common.hpp"

#include <array>

namespace vlab {

inline Vec2 log_kernel(const Vec2& x, const Vec2& c) {
    Vec2 d = x - c;
    return d.perp() / d.norm2();
}

struct Charge {
    Vec2 c;     // center
    double s;   // strength (integer degree in practice)
};

using TriXY = std::array<Vec2, 3>; // ccw

bool point_in_tri(const TriXY& T, const Vec2& p);
double tri_area(const TriXY& T);

// \int_T K(x;c) dA. c may lie inside T (the boundary integrand stays smooth).
Vec2 tri_int_kernel(const TriXY& T, const Vec2& c);

// \int_T K(.;ci) . K(.;cj) dA. For ci == cj the center must be strictly
// outside T (the integral diverges otherwise); for ci != cj at most one of
// the two may lie inside T.
double tri_int_kk(const TriXY& T, const Vec2& ci, const Vec2& cj);

// \int_T |R + sum_m s_m K(.;c_m)|^2 dA with R constant. All centers must be
// strictly outside T.
double tri_int_current_sq(const TriXY& T, const Vec2& R, const std::vector<Charge>& charges);

// ------------------------------------------------------------- ring rules

// Integral of f over the annulus r_lo <= |x-c| <= r_hi: geometric radial
// panels with Gauss nodes, periodic trapezoid in the angle.
double ring_integrate(const Vec2& c, double r_lo, double r_hi,
                      const std::function<double(const Vec2&)>& f,
                      int n_theta = 128, int panels = 8, int gauss = 6);
Vec2 ring_integrate_vec(const Vec2& c, double r_lo, double r_hi,
                        const std::function<Vec2(const Vec2&)>& f,
                        int n_theta = 128, int panels = 8, int gauss = 6);

// ----------------------------------------------------- masked-region helpers

// Position of a triangle relative to the union of the (disjoint) disks
// B_rho(centers[j]); for Straddle, *which reports the disk being crossed.
enum class DiskMask { Outside, Inside, Straddle };
DiskMask classify_against_disks(const TriXY& T, const std::vector<Vec2>& centers,
                                double rho, int* which = nullptr);

// distance from p to the closed triangle (0 if inside)
double tri_dist(const TriXY& T, const Vec2& p);

// area and centroid of T clipped to the half plane {x : (x - a) . n >= 0}
std::pair<double, Vec2> clip_halfplane(const TriXY& T, const Vec2& a, const Vec2& n);

// Integrate f(root_tri, x) over the mesh triangles minus the disks
// B_rho(centers[j]): clear triangles get a degree-4 rule, straddling ones are
// subdivided with tangent-plane clipping at the leaves.
struct Mesh;
double masked_quadrature(const Mesh& mesh, const std::vector<Vec2>& centers, double rho,
                         const std::function<double(int, const Vec2&)>& f);

} // namespace vlab
