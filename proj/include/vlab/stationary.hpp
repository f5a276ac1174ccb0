#pragma once

// Stationary configurations: Newton on the renormalized-energy gradient,
// Brouwer-degree certificates on product balls (n <= 2), Newton/Broyden root
// finding on the defect coefficients c(p, .), and degree-guarded continuation
// of the roots as p increases toward 2.
//
// Two-phase Newton design: the discrete gradient (or coefficient) field is a
// smooth function of the vortex positions only while the mesh is held fixed
// (evaluations go through transport); across re-meshes it jitters at the
// discretization level. So both root finders iterate with re-meshing until
// the jitter scale, then polish on a frozen mesh where Newton can converge
// to solver precision.

#include "vlab/renorm.hpp"
#include "vlab/stress.hpp"

#include <functional>
#include <optional>
#include <string>

namespace vlab {

// Reproducible recipe for building the canonical map at any vortex placement.
struct MapProblem {
    Domain domain;
    BoundaryDatum datum;
    std::vector<int> degrees;
    MeshParams mesh_prm;

    CanonicalMap build(const std::vector<Vec2>& pts) const;
};

// ------------------------------------------------------ critical points of W

struct CriticalParams {
    int max_iters = 60;
    double remesh_disp = 0.0;  // > 0: also re-mesh when the iterate drifts this
                               // far; 0: only when a transport exceeds its guard
                               // from the mesh anchor
    double polish_tol = 1e-8;  // * 4 pi, on the final frozen mesh
    double fd_step = 1e-3;     // central-difference step for the Jacobian
    double step_cap = 0.08;    // max vortex displacement per Newton step
};

struct CriticalPointResult {
    std::vector<Vec2> x;
    double grad_norm = 0.0; // sup-norm on the final frozen mesh
    int iterations = 0;     // Newton steps actually taken
};

// NoCriticalPoint when Newton stalls, diverges, or walks out of the domain.
CriticalPointResult find_critical_point_W(const MapProblem& prob,
                                          const std::vector<Vec2>& x_init,
                                          const CriticalParams& prm = {});

// --------------------------------------------------------- Brouwer degree

struct DegreeParams {
    int n_theta = 10;         // angular samples per circle factor
    int disk_rings = 1;       // radial layers of each disk factor (n = 2)
    double noise_floor = 0.0; // DegreeUndefined if min |F| < 10 * floor
    std::uint64_t seed = 20260815; // ray draws for the simplicial count (n = 2)
};

struct DegreeCertificate {
    std::string map_id;
    std::vector<double> center; // flattened R^{2n}
    double radius = 0.0;
    int samples = 0;    // boundary evaluations used
    int degree = 0;
    double min_norm = 0.0; // min |F| over the samples
};

using FlatField = std::function<std::vector<double>(const std::vector<double>&)>;

// Degree of F on the boundary of B_radius(c_1) x ... x B_radius(c_n), n <= 2.
// n = 1: winding of the field along the sampled circle (every angular gap
// must stay below pi).  n = 2: simplicial degree on a triangulation of the
// product-ball boundary, counting signed covers of a random ray; the global
// orientation self-calibrates against the identity map.  DegreeUndefined
// whenever the samples cannot certify (norm under the floor, ambiguous
// winding, angular resolution too coarse).
DegreeCertificate brouwer_degree(const FlatField& F, const std::string& map_id,
                                 const std::vector<double>& center, double radius,
                                 const DegreeParams& prm = {});

// ------------------------------------------------- roots of c(p, .) and chains

struct StationaryParams {
    double delta_trust = 0.15;
    double root_tol = 0.0;       // <= 0: auto, 1e-4 * grad-W scale probed at
                                 // the trust radius (floored at 1e-3 * 4 pi)
    double fd_step_scale = 1e-3; // outer FD step = scale * delta_trust
    int max_evals = 80;          // budget of coefficient evaluations
    int refresh_every = 4;       // fresh FD Jacobian every k accepted steps
    double coeff_delta = 0.0;    // <= 0: auto from separation/clearance margins
    PSolveParams solver;
};

struct StationaryResult {
    std::vector<Vec2> x;
    double cnorm = 0.0; // sup-norm of c(p, x) at the returned point
    int evals = 0;      // coefficient evaluations consumed
    double root_tol = 0.0;
    bool converged = false;
};

// Root of x -> c(p, x) near x_init.  Every evaluation runs the full
// transport + relaxation + coefficient pipeline; the Jacobian uses forward
// differences refreshed periodically with Broyden updates in between.
// TrustViolation when the iterates press against the trust-ball boundary.
StationaryResult find_stationary(const MapProblem& prob, double p,
                                 const std::vector<Vec2>& x_init,
                                 const StationaryParams& prm = {});

struct ContinuationStepRec {
    double p = 0.0;
    std::vector<Vec2> x;
    double cnorm = 0.0;
    int evals = 0;
    double dist_to_limit = 0.0; // flat 2-norm distance to the W-critical anchor
    bool ok = false;
    std::string note; // failure reason when !ok
};

struct ContinuationParams {
    StationaryParams inner;
    bool certify = false;  // compare deg(c(p, .)) with deg(grad W) at cert_p
    double cert_radius = 0.1;
    double cert_p = 0.0;   // <= 0: coarsest schedule entry
    DegreeParams degree;
};

struct ContinuationResult {
    std::vector<Vec2> x_limit; // the W-critical anchor
    std::vector<ContinuationStepRec> steps;
    std::optional<DegreeCertificate> cert_grad_w;
    std::optional<DegreeCertificate> cert_c;
    bool certified = false; // both degrees obtained, equal, and nonzero
    std::string certify_note;
};

// Warm-started chain of find_stationary solves along a schedule increasing
// toward 2 (BadSchedule otherwise).  Step failures are recorded and the chain
// continues from the last good configuration; certification failures are
// reported, never faked.
ContinuationResult continuation(const MapProblem& prob,
                                const std::vector<double>& schedule,
                                const std::vector<Vec2>& x_star,
                                const ContinuationParams& prm = {});

} // namespace vlab
