#pragma once

// Convex relaxation of the p-energy around a fixed vortex configuration.
//
// With the canonical map u_x frozen, every competitor with the same vortices
// and trace is e^{i phi} u_x with phi vanishing on the boundary, and
//   E_p(phi) = \int |grad phi + j u_x|^p.
// Discretely: sum_T |T| (|grad phi_T + J_T|^2 + eps^2)^{p/2} with J_T the
// exact triangle mean of the current, minimized by iteratively reweighted
// least squares under an epsilon continuation schedule (each reweighted step
// is a majorize-minimize step, so the regularized energy never increases).
//
// At p = 2 the Euler-Lagrange equation collapses to the Laplacian with zero
// data -- the canonical phase is already optimal and the correction is zero
// to solver precision. That degeneration is a key exactness witness.

#include "vlab/vortex.hpp"

namespace vlab {

struct PSolveParams {
    int max_iters_per_stage = 50;
    double stage_tol = 1e-13;       // relative energy stall declaring a stage done
    double eps_cut = 4.0;           // epsilon division between stages
    double eps_floor_factor = 1e-6; // eps_min = factor * eps0 (median current scale)
    const ScalarField* init = nullptr; // warm start (same mesh), may be null
};

struct PhaseLogRow {
    int sweep = 0, iter = 0;
    double eps = 0.0, energy = 0.0, residual = 0.0;
};

struct PhaseSolveResult {
    ScalarField phi;       // zero-trace phase correction
    double p = 2.0;
    double eps_final = 0.0;
    double energy = 0.0;   // regularized solver energy at the final stage
    double residual = 0.0; // fixed-point Euler-Lagrange residual at the solution
    int iterations = 0;    // total reweighted solves
    bool converged = false;
    std::vector<PhaseLogRow> log;
};

// BadExponent unless 1 < p <= 2.
PhaseSolveResult minimize_phase(const CanonicalMap& cm, double p, const PSolveParams& prm = {});

// sum_T |T| |grad phi_T|^p -- exact for the P1 field.
double phase_gradient_p_energy(const ScalarField& phi, double p);

// Physical p-energy of e^{i phi} u_x for p < 2: per-triangle quadrature away
// from the vortices, the exact 2 pi |d|^p r0^(2-p)/(2-p) core mass, and a
// polar-ring correction for the regular remainder inside each core.
// The optional parts sink receives (far, core, correction) contributions.
double p_energy(const CanonicalMap& cm, const ScalarField& phi, double p,
                std::array<double, 3>* parts = nullptr);

struct CorrectionScalingRow {
    double p = 0.0;
    double grad_energy = 0.0; // int |grad phi_p|^p
    double ratio = 0.0;       // grad_energy / (2 - p)
};

struct CorrectionScalingReport {
    std::vector<CorrectionScalingRow> rows;
    double band_ratio = 0.0; // max ratio / min ratio over the list
    bool within_band = false; // band_ratio < 4
};

// Solves the relaxation at each exponent (warm-starting along the list) and
// tabulates how the correction energy vanishes relative to (2 - p).
// Requires every p in (1, 2), increasing. Solver errors propagate.
CorrectionScalingReport correction_scaling_report(const CanonicalMap& cm,
                                                  const std::vector<double>& p_list,
                                                  const PSolveParams& prm = {});

} // namespace vlab
