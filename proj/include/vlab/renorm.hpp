#pragma once

// Renormalized energy of a vortex configuration, by two independent routes.
//
// Route 1 (shrinking disks): integrate |j u_x|^2 exactly over the mesh minus
// the disks B_rho(x_j), subtract 2 pi sum d_j^2 log(1/rho), and extrapolate
// rho -> 0 with a quadratic fit over a geometric ladder of radii.
//
// Route 2 (boundary representation): write j u_x = grad^perp Phi + flow,
// Phi = sum_j d_j ln|x - x_j| + H_*, with H_* the single-valued harmonic part
// solved from a pure Neumann problem. Then
//
//   W = 2 pi sum_{i != j} d_i d_j log(1/|x_i - x_j|)
//       + \oint_{dOmega} Phi sigma' ds  -  2 pi sum_j d_j H_*(x_j)
//       + flow energy (annulus only),
//
// where sigma' is the tangential phase speed of the boundary datum. The flow
// part is the div- and curl-free field with locally constant boundary
// potential carrying the residual flux through the hole.
//
// First variation, three ways: finite differences of route 2, the regular
// part of the current (4 pi d_j q_j^perp), and the Green-function form
// (-4 pi d_j (grad H_j - flow^perp)).

#include "vlab/vortex.hpp"

namespace vlab {

struct RhoLimitResult {
    double W = 0.0;             // extrapolated value (the fit constant)
    double slope = 0.0;         // fitted rho coefficient
    double curv = 0.0;          // fitted rho^2 coefficient
    std::vector<double> rho;    // ladder actually used, decreasing
    std::vector<double> W_rho;  // masked energy minus 2 pi sum d^2 log(1/rho)
    double fit_residual = 0.0;  // rms misfit of the quadratic model
};

// Default ladder: six radii in geometric progression below
// min(0.3 separation, 0.4 clearance, 0.18 sqrt(area)), trimmed to stay above
// 2.5 h_near. Fewer than four usable radii is a BadRadius error.
RhoLimitResult renorm_energy_rho(const CanonicalMap& cm, std::vector<double> rhos = {});

// Masked energy for a single rho (exposed for tests).
double masked_current_energy(const CurrentField& f, const std::vector<Vec2>& centers,
                             double rho);

struct GreenResult {
    double W = 0.0;
    double pair_term = 0.0;      // 2 pi sum_{i!=j} d_i d_j log(1/|x_i-x_j|)
    double boundary_term = 0.0;  // \oint Phi sigma' ds
    double self_term = 0.0;      // -2 pi sum_j d_j H_*(x_j)
    double flow_term = 0.0;      // hole flow energy, annulus only
    double gamma = 0.0;          // strength of the hole flow field
    std::vector<double> h_at_vortex;
    ScalarField h_star;          // boundary-mean-zero gauge
};

GreenResult renorm_energy_green(const CanonicalMap& cm);

// Probe radius for mean-value recovery at the vortices: well separated from
// the other vortices and the boundary, but large against the fine mesh scale.
double probe_radius(const CanonicalMap& cm);

// First-variation routes; one vector per vortex, ordered like cm.config.
std::vector<Vec2> grad_w_phase(const CanonicalMap& cm);
std::vector<Vec2> grad_w_green(const CanonicalMap& cm);
std::vector<Vec2> grad_w_fd(const CanonicalMap& cm, double step = 1e-3);

} // namespace vlab
