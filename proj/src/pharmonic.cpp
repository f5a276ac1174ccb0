#include "vlab/pharmonic.hpp"
#include "vlab/renorm.hpp"
#include "vlab/singular.hpp"

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <limits>

namespace vlab {

namespace {

// Weighted Poisson solver on the interior vertices with a fixed sparsity
// pattern: the pattern is analyzed once, only the numeric factorization is
// redone when the weights change.
class WeightedPoisson {
public:
    explicit WeightedPoisson(const Mesh& mesh) : mesh_(mesh) {
        pos_.assign(mesh.num_verts(), -1);
        for (int v = 0; v < mesh.num_verts(); ++v)
            if (!mesh.on_boundary[v]) {
                pos_[v] = (int)interior_.size();
                interior_.push_back(v);
            }
        analyzed_ = false;
    }

    int dim() const { return (int)interior_.size(); }

    // K_w phi = -b_w restricted to interior vertices, where
    // (K_w)_ij = sum_T A_T w_T grad l_i . grad l_j and
    // b_i = sum_T A_T w_T grad l_i . J_T.
    Eigen::VectorXd solve(const std::vector<double>& w, const std::vector<Vec2>& J,
                          double* residual_out) {
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(mesh_.num_tris() * 9);
        Eigen::VectorXd b = Eigen::VectorXd::Zero(dim());
        for (int t = 0; t < mesh_.num_tris(); ++t) {
            double aw = mesh_.tri_area[t] * w[t];
            for (int a = 0; a < 3; ++a) {
                int ia = pos_[mesh_.tris[t][a]];
                if (ia < 0) continue;
                Vec2 ga = mesh_.hat_grad[t][a];
                b[ia] += aw * ga.dot(J[t]);
                for (int c = 0; c < 3; ++c) {
                    int ic = pos_[mesh_.tris[t][c]];
                    if (ic < 0) continue;
                    trip.emplace_back(ia, ic, aw * ga.dot(mesh_.hat_grad[t][c]));
                }
            }
        }
        Eigen::SparseMatrix<double> K(dim(), dim());
        K.setFromTriplets(trip.begin(), trip.end());
        if (!analyzed_) {
            ldlt_.analyzePattern(K);
            analyzed_ = true;
        }
        ldlt_.factorize(K);
        if (ldlt_.info() != Eigen::Success)
            throw SolveFailure("reweighted stiffness factorization failed");
        Eigen::VectorXd x = ldlt_.solve(-b);
        if (residual_out) *residual_out = (K * x + b).norm() / (1.0 + b.norm());
        return x;
    }

    // Euler-Lagrange residual of full phi under weights w (interior rows)
    double el_residual(const std::vector<double>& w, const std::vector<Vec2>& J,
                       const Eigen::VectorXd& phi_full) const {
        Eigen::VectorXd r = Eigen::VectorXd::Zero(dim());
        double bnorm = 0.0;
        for (int t = 0; t < mesh_.num_tris(); ++t) {
            double aw = mesh_.tri_area[t] * w[t];
            Vec2 gphi{0, 0};
            for (int a = 0; a < 3; ++a)
                gphi += phi_full[mesh_.tris[t][a]] * mesh_.hat_grad[t][a];
            Vec2 v = gphi + J[t];
            for (int a = 0; a < 3; ++a) {
                int ia = pos_[mesh_.tris[t][a]];
                if (ia < 0) continue;
                r[ia] += aw * mesh_.hat_grad[t][a].dot(v);
                bnorm += std::abs(aw * mesh_.hat_grad[t][a].dot(J[t]));
            }
        }
        return r.norm() / (1.0 + bnorm);
    }

    void scatter(const Eigen::VectorXd& x, Eigen::VectorXd& full) const {
        full.setZero();
        for (size_t k = 0; k < interior_.size(); ++k) full[interior_[k]] = x[k];
    }

private:
    const Mesh& mesh_;
    std::vector<int> interior_, pos_;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt_;
    bool analyzed_ = false;
};

double reg_energy(const Mesh& mesh, const Eigen::VectorXd& phi, const std::vector<Vec2>& J,
                  double p, double eps) {
    std::vector<double> per(mesh.num_tris());
    for (int t = 0; t < mesh.num_tris(); ++t) {
        Vec2 g{0, 0};
        for (int a = 0; a < 3; ++a) g += phi[mesh.tris[t][a]] * mesh.hat_grad[t][a];
        per[t] = mesh.tri_area[t] * std::pow((g + J[t]).norm2() + eps * eps, 0.5 * p);
    }
    double s = 0.0;
    for (double v : per) s += v;
    return s;
}

} // namespace

PhaseSolveResult minimize_phase(const CanonicalMap& cm, double p, const PSolveParams& prm) {
    if (!(p > 1.0 && p <= 2.0)) throw BadExponent("minimize_phase: need 1 < p <= 2");
    const Mesh& mesh = *cm.mesh;
    CurrentField f = current_field(cm);
    const std::vector<Vec2>& J = f.tri_mean;

    PhaseSolveResult out;
    out.p = p;
    out.phi.mesh = cm.mesh;
    out.phi.values = Eigen::VectorXd::Zero(mesh.num_verts());

    WeightedPoisson wp(mesh);
    std::vector<double> w(mesh.num_tris(), 1.0);

    if (p == 2.0) {
        // single least-squares solve; the exact current means make the load
        // vanish identically, so phi is zero to roundoff
        double res = 0.0;
        Eigen::VectorXd x = wp.solve(w, J, &res);
        wp.scatter(x, out.phi.values);
        out.energy = reg_energy(mesh, out.phi.values, J, p, 0.0);
        out.residual = wp.el_residual(w, J, out.phi.values);
        out.iterations = 1;
        out.converged = true;
        out.eps_final = 0.0;
        out.log.push_back({0, 0, 0.0, out.energy, out.residual});
        return out;
    }

    // epsilon scale from the median current magnitude
    std::vector<double> mag(mesh.num_tris());
    for (int t = 0; t < mesh.num_tris(); ++t) mag[t] = J[t].norm();
    std::nth_element(mag.begin(), mag.begin() + mag.size() / 2, mag.end());
    double eps0 = std::max(mag[mag.size() / 2], 1e-12);
    double eps_min = prm.eps_floor_factor * eps0;

    if (prm.init) {
        if (prm.init->values.size() != mesh.num_verts())
            throw InvalidConfig("warm start field does not match the mesh");
        out.phi.values = prm.init->values;
    }

    std::vector<double> eps_ladder;
    for (double e = eps0; e > eps_min; e /= prm.eps_cut) eps_ladder.push_back(e);
    eps_ladder.push_back(eps_min);

    for (size_t sweep = 0; sweep < eps_ladder.size(); ++sweep) {
        double eps = eps_ladder[sweep];
        double E = reg_energy(mesh, out.phi.values, J, p, eps);
        for (int it = 0; it < prm.max_iters_per_stage; ++it) {
            for (int t = 0; t < mesh.num_tris(); ++t) {
                Vec2 g{0, 0};
                for (int a = 0; a < 3; ++a)
                    g += out.phi.values[mesh.tris[t][a]] * mesh.hat_grad[t][a];
                w[t] = std::pow((g + J[t]).norm2() + eps * eps, 0.5 * p - 1.0);
            }
            Eigen::VectorXd x = wp.solve(w, J, nullptr);
            Eigen::VectorXd cand(mesh.num_verts());
            wp.scatter(x, cand);
            double E_new = reg_energy(mesh, cand, J, p, eps);
            // majorize-minimize guarantees descent; guard against roundoff
            int halvings = 0;
            while (E_new > E && halvings < 30) {
                cand = 0.5 * (cand + out.phi.values);
                E_new = reg_energy(mesh, cand, J, p, eps);
                ++halvings;
            }
            ++out.iterations;
            bool accepted = E_new <= E;
            if (accepted) out.phi.values = cand;
            double res = wp.el_residual(w, J, out.phi.values);
            out.log.push_back({(int)sweep, it, eps, accepted ? E_new : E, res});
            if (!accepted || std::abs(E - E_new) <= prm.stage_tol * (1.0 + std::abs(E_new))) {
                E = accepted ? E_new : E;
                break;
            }
            E = E_new;
        }
        out.energy = E;
        out.eps_final = eps;
    }

    // final fixed-point residual at the solution's own weights
    for (int t = 0; t < mesh.num_tris(); ++t) {
        Vec2 g{0, 0};
        for (int a = 0; a < 3; ++a) g += out.phi.values[mesh.tris[t][a]] * mesh.hat_grad[t][a];
        w[t] = std::pow((g + J[t]).norm2() + eps_min * eps_min, 0.5 * p - 1.0);
    }
    out.residual = wp.el_residual(w, J, out.phi.values);
    out.converged = out.residual < 1e-8;
    return out;
}

double phase_gradient_p_energy(const ScalarField& phi, double p) {
    const Mesh& mesh = *phi.mesh;
    std::vector<double> per(mesh.num_tris());
    for (int t = 0; t < mesh.num_tris(); ++t)
        per[t] = mesh.tri_area[t] * std::pow(phi.grad_tri(t).norm(), p);
    double s = 0.0;
    for (double v : per) s += v;
    return s;
}

double p_energy(const CanonicalMap& cm, const ScalarField& phi, double p,
                std::array<double, 3>* parts) {
    if (!(p > 1.0 && p < 2.0))
        throw BadExponent("p_energy: the split needs 1 < p < 2 (core mass diverges at 2)");
    const Mesh& mesh = *cm.mesh;
    const VortexConfig& cfg = cm.config;
    CurrentField f = current_field(cm, &phi);

    double r0 = probe_radius(cm);

    // far field: current is piecewise (constant + kernels); degree-4 rule
    double far = masked_quadrature(mesh, cfg.points, r0, [&](int t, const Vec2& x) {
        return std::pow(f.eval_in_tri(t, x).norm(), p);
    });

    // cores: exact pure-vortex mass plus a ring quadrature of the remainder,
    // which is integrable because the angular average of the cross term dies
    double core = 0.0, corr = 0.0;
    for (int j = 0; j < cfg.n(); ++j) {
        double dabs = std::abs((double)cfg.degrees[j]);
        core += TWO_PI * std::pow(dabs, p) * std::pow(r0, 2.0 - p) / (2.0 - p);
        Vec2 c = cfg.points[j];
        corr += ring_integrate(
            c, 1e-5 * r0, r0,
            [&](const Vec2& x) {
                double vn = f.eval(x).norm();
                return std::pow(vn, p) - std::pow(dabs / dist(x, c), p);
            },
            128, 42, 6);
    }
    if (parts) *parts = {far, core, corr};
    return far + core + corr;
}

CorrectionScalingReport correction_scaling_report(const CanonicalMap& cm,
                                                  const std::vector<double>& p_list,
                                                  const PSolveParams& prm) {
    if (p_list.empty())
        throw BadExponent("correction_scaling_report: empty exponent list");
    for (size_t i = 0; i < p_list.size(); ++i) {
        if (!(p_list[i] > 1.0 && p_list[i] < 2.0))
            throw BadExponent("correction_scaling_report: exponents must lie in (1, 2)");
        if (i > 0 && !(p_list[i] > p_list[i - 1]))
            throw BadExponent("correction_scaling_report: exponents must increase toward 2");
    }
    CorrectionScalingReport rep;
    PSolveParams stage = prm;
    PhaseSolveResult prev;
    for (size_t i = 0; i < p_list.size(); ++i) {
        stage.init = (i > 0) ? &prev.phi : prm.init;
        PhaseSolveResult r = minimize_phase(cm, p_list[i], stage);
        if (!r.converged)
            throw SolverStalled("correction_scaling_report: relaxation did not converge at p = " +
                                std::to_string(p_list[i]));
        double I = phase_gradient_p_energy(r.phi, p_list[i]);
        rep.rows.push_back({p_list[i], I, I / (2.0 - p_list[i])});
        prev = std::move(r);
    }
    double lo = rep.rows.front().ratio, hi = lo;
    for (const auto& row : rep.rows) {
        lo = std::min(lo, row.ratio);
        hi = std::max(hi, row.ratio);
    }
    rep.band_ratio = (lo > 0.0) ? hi / lo : std::numeric_limits<double>::infinity();
    rep.within_band = rep.band_ratio < 4.0;
    return rep;
}

} // namespace vlab
