#include "vlab/stress.hpp"

#include "vlab/singular.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace vlab {

double cutoff_profile(double s) {
    if (s <= 1.0) return 1.0;
    if (s >= 2.0) return 0.0;
    double t = s - 1.0;
    return 1.0 - t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
}

double cutoff_profile_deriv(double s) {
    if (s <= 1.0 || s >= 2.0) return 0.0;
    double t = s - 1.0, u = 1.0 - t;
    return -30.0 * t * t * u * u;
}

Eigen::Matrix2d stress_tensor(double p, const Vec2& v) {
    double n2 = v.x * v.x + v.y * v.y;
    Eigen::Matrix2d S = Eigen::Matrix2d::Zero();
    if (n2 == 0.0) return S;
    double np = std::pow(n2, 0.5 * p);          // |v|^p
    double w = p * np / n2;                     // p |v|^{p-2}
    S(0, 0) = w * v.x * v.x - np;
    S(0, 1) = w * v.x * v.y;
    S(1, 0) = S(0, 1);
    S(1, 1) = w * v.y * v.y - np;
    return S;
}

namespace {

// S_p(v) g without building the matrix
inline Vec2 stress_apply(double p, const Vec2& v, const Vec2& g) {
    double n2 = v.x * v.x + v.y * v.y;
    if (n2 == 0.0) return {0.0, 0.0};
    double np = std::pow(n2, 0.5 * p);
    double w = p * np / n2 * (v.x * g.x + v.y * g.y);
    return {w * v.x - np * g.x, w * v.y - np * g.y};
}

// int_{annulus(delta, 2 delta)} S_p(v(x)) grad chi dA around `center`
Vec2 annulus_pairing(const CurrentField& f, double p, const Vec2& center, double delta,
                     int n_theta, int panels) {
    return ring_integrate_vec(
        center, delta, 2.0 * delta,
        [&](const Vec2& x) -> Vec2 {
            Vec2 r{x.x - center.x, x.y - center.y};
            double rn = std::sqrt(r.x * r.x + r.y * r.y);
            double cp = cutoff_profile_deriv(rn / delta) / delta;
            if (cp == 0.0 || rn == 0.0) return {0.0, 0.0};
            Vec2 gchi{cp * r.x / rn, cp * r.y / rn};
            return stress_apply(p, f.eval(x), gchi);
        },
        n_theta, panels, 6);
}

void check_radius(const CanonicalMap& cm, double delta) {
    if (!(delta > 0.0)) throw BadRadius("stress: cutoff radius must be positive");
    const VortexConfig& cfg = cm.config;
    double limit = std::min(cfg.min_separation(), cfg.boundary_clearance(cm.domain));
    if (!(2.0 * delta < limit))
        throw BadRadius("stress: cutoff support 2*delta = " + std::to_string(2.0 * delta) +
                        " reaches another vortex or the boundary (limit " +
                        std::to_string(limit) + ")");
}

} // namespace

Vec2 stress_probe(const CanonicalMap& cm, const ScalarField* phi, double p,
                  const Vec2& center, double delta, int n_theta, int panels) {
    if (!(delta > 0.0)) throw BadRadius("stress_probe: cutoff radius must be positive");
    CurrentField f = current_field(cm, phi);
    return annulus_pairing(f, p, center, delta, n_theta, panels);
}

StressCoefficients stress_coefficients(const CanonicalMap& cm, const ScalarField* phi,
                                       double p, double delta) {
    check_radius(cm, delta);
    CurrentField f = current_field(cm, phi);
    StressCoefficients out;
    out.p = p;
    out.delta = delta;
    for (const Vec2& xj : cm.config.points) {
        Vec2 fine = annulus_pairing(f, p, xj, delta, 256, 16);
        Vec2 coarse = annulus_pairing(f, p, xj, delta, 128, 8);
        out.c.push_back({-fine.x, -fine.y});
        out.quad_err = std::max(out.quad_err,
                                std::hypot(fine.x - coarse.x, fine.y - coarse.y));
    }
    return out;
}

double stress_pairing(const CanonicalMap& cm, const ScalarField* phi, double p,
                      const std::vector<Vec2>& h, double delta) {
    check_radius(cm, delta);
    if (h.size() != cm.config.points.size())
        throw InvalidConfig("stress_pairing: one increment per vortex required");
    CurrentField f = current_field(cm, phi);
    // the support annuli are pairwise disjoint (radius guard), so one pass
    // per annulus with the combined direction is the pairing against X_h
    double total = 0.0;
    for (size_t j = 0; j < h.size(); ++j) {
        double raw = ring_integrate(
            cm.config.points[j], delta, 2.0 * delta,
            [&](const Vec2& x) -> double {
                Vec2 r{x.x - cm.config.points[j].x, x.y - cm.config.points[j].y};
                double rn = std::sqrt(r.x * r.x + r.y * r.y);
                double cp = cutoff_profile_deriv(rn / delta) / delta;
                if (cp == 0.0 || rn == 0.0) return 0.0;
                Vec2 gchi{cp * r.x / rn, cp * r.y / rn};
                Vec2 sv = stress_apply(p, f.eval(x), gchi);
                return sv.x * h[j].x + sv.y * h[j].y;
            },
            256, 16, 6);
        total += -raw;
    }
    return total;
}

DeltaIndependenceReport delta_independence_check(const CanonicalMap& cm,
                                                 const ScalarField* phi, double p,
                                                 const std::vector<double>& deltas) {
    if (deltas.empty()) throw BadRadius("delta_independence_check: empty radius list");
    DeltaIndependenceReport rep;
    for (double d : deltas) rep.per_delta.push_back(stress_coefficients(cm, phi, p, d));
    double cmax = 0.0;
    size_t n = cm.config.points.size();
    for (size_t j = 0; j < n; ++j) {
        for (int comp = 0; comp < 2; ++comp) {
            double lo = std::numeric_limits<double>::infinity(), hi = -lo;
            for (const auto& sc : rep.per_delta) {
                double v = comp == 0 ? sc.c[j].x : sc.c[j].y;
                lo = std::min(lo, v);
                hi = std::max(hi, v);
                cmax = std::max(cmax, std::abs(v));
            }
            rep.spread = std::max(rep.spread, hi - lo);
        }
    }
    rep.threshold = 5e-3 * (1.0 + cmax);
    rep.ok = rep.spread < rep.threshold;
    return rep;
}

} // namespace vlab
