#pragma once

// Stress-energy tensor of a circle-valued map and the defect coefficients
// extracted by cutoff test fields.
//
//   S_p(v) = p |v|^{p-2} v (x) v - |v|^p I,     v = j u  (the current),
//
// is divergence-free wherever the map is a stationary p-harmonic map, so for
// a test field X that equals a constant vector e_l on B_delta(x_j) and dies
// before reaching anything else, the pairing int <S_p, DX> collapses onto the
// point defect at x_j.  The defect coefficient uses the distributional sign,
//
//   c_j^l(p, x) = <div S_p(u), X_{j,l}> = - int_{delta <= r <= 2 delta} <S_p, DX_{j,l}>,
//
// which calibrates c(2, x) to the renormalized-energy gradient grad W(x).
// The cutoff is a C^2 quintic bump, so DX is analytic and the pairing reduces
// to a smooth annulus quadrature -- no differencing anywhere.

#include "vlab/pharmonic.hpp"

#include <Eigen/Dense>

namespace vlab {

// quintic bump: 1 for s <= 1, 0 for s >= 2, C^2 monotone transition
double cutoff_profile(double s);
double cutoff_profile_deriv(double s);

// S_p(v); the continuous extension S_p(0) = 0 is used for p < 2.
Eigen::Matrix2d stress_tensor(double p, const Vec2& v);

struct StressCoefficients {
    double p = 2.0;
    double delta = 0.0;
    std::vector<Vec2> c;    // one defect coefficient per vortex
    double quad_err = 0.0;  // max coefficient shift under a coarser rule
};

// Raw pairing int_{annulus(delta, 2 delta)} <S_p(v), DX> around an arbitrary
// center (both directions at once); zero wherever div S_p vanishes inside.
// phi = nullptr means the canonical map's current.
Vec2 stress_probe(const CanonicalMap& cm, const ScalarField* phi, double p,
                  const Vec2& center, double delta,
                  int n_theta = 256, int panels = 16);

// Defect coefficients c_j(p, x) at every vortex.  BadRadius unless the
// support annuli stay clear of the other vortices and the boundary
// (2 delta < min(pairwise distance, boundary clearance)).
StressCoefficients stress_coefficients(const CanonicalMap& cm, const ScalarField* phi,
                                       double p, double delta);

// Pairing against the combined field X_h = sum_{j} X_j h_j assembled inside
// one quadrature pass; equals sum_j c_j . h_j by linearity.
double stress_pairing(const CanonicalMap& cm, const ScalarField* phi, double p,
                      const std::vector<Vec2>& h, double delta);

struct DeltaIndependenceReport {
    std::vector<StressCoefficients> per_delta;
    double spread = 0.0;    // max over coefficients of (max - min) across deltas
    double threshold = 0.0; // 5e-3 * (1 + max |c|)
    bool ok = false;
};

// Point-mass witness: the pairing must not depend on which admissible radius
// carries the cutoff.
DeltaIndependenceReport delta_independence_check(const CanonicalMap& cm,
                                                 const ScalarField* phi, double p,
                                                 const std::vector<double>& deltas);

} // namespace vlab
