#include "vlab/renorm.hpp"
#include "vlab/singular.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace vlab {

namespace {

struct MaskedIntegrator {
    const CurrentField& f;
    const std::vector<Vec2>& centers;
    double rho;

    double exact(const TriXY& T, const Vec2& R) const {
        return tri_int_current_sq(T, R, f.charges);
    }

    double eval_sq(const Vec2& p, const Vec2& R) const {
        Vec2 v = R + singular_current(f.charges, p);
        return v.norm2();
    }

    double straddle(const TriXY& T, const Vec2& R, int depth) const {
        int which = -1;
        DiskMask m = classify_against_disks(T, centers, rho, &which);
        if (m == DiskMask::Outside) return exact(T, R);
        if (m == DiskMask::Inside) return 0.0;
        if (depth >= 6) {
            // leaf: the circle is locally flat at this scale; clip against the
            // tangent half plane through the radius-rho point nearest the leaf
            Vec2 c = centers[which];
            Vec2 g = (T[0] + T[1] + T[2]) / 3.0 - c;
            Vec2 nhat = g / g.norm();
            auto [area, cen] = clip_halfplane(T, c + rho * nhat, nhat);
            if (area <= 0.0) return 0.0;
            return area * eval_sq(cen, R);
        }
        Vec2 m01 = 0.5 * (T[0] + T[1]), m12 = 0.5 * (T[1] + T[2]), m20 = 0.5 * (T[2] + T[0]);
        return straddle({T[0], m01, m20}, R, depth + 1) +
               straddle({m01, T[1], m12}, R, depth + 1) +
               straddle({m20, m12, T[2]}, R, depth + 1) +
               straddle({m01, m12, m20}, R, depth + 1);
    }
};

// Gauss nodes on a boundary edge; integrand gets the point and the linear
// interpolation weight of the edge's second endpoint.
template <class F>
double edge_gauss(const Vec2& a, const Vec2& b, int n, F&& f) {
    const GaussRule& G = gauss_legendre(n);
    double len = dist(a, b), s = 0.0;
    for (int q = 0; q < (int)G.nodes.size(); ++q) {
        double xi = 0.5 * (G.nodes[q] + 1.0);
        s += 0.5 * G.weights[q] * len * f(a + xi * (b - a), xi);
    }
    return s;
}

} // namespace

double masked_current_energy(const CurrentField& f, const std::vector<Vec2>& centers,
                             double rho) {
    const Mesh& mesh = *f.mesh;
    MaskedIntegrator M{f, centers, rho};
    std::vector<double> per_tri(mesh.num_tris());
    for (int t = 0; t < mesh.num_tris(); ++t) {
        TriXY T{mesh.tri_vertex(t, 0), mesh.tri_vertex(t, 1), mesh.tri_vertex(t, 2)};
        switch (classify_against_disks(T, centers, rho, nullptr)) {
        case DiskMask::Outside: per_tri[t] = M.exact(T, f.tri_grad[t]); break;
        case DiskMask::Inside: per_tri[t] = 0.0; break;
        case DiskMask::Straddle: per_tri[t] = M.straddle(T, f.tri_grad[t], 0); break;
        }
    }
    double E = 0.0;
    for (double v : per_tri) E += v; // fixed order, thread-count independent
    return E;
}

RhoLimitResult renorm_energy_rho(const CanonicalMap& cm, std::vector<double> rhos) {
    const VortexConfig& cfg = cm.config;
    if (rhos.empty()) {
        double cap = std::min({0.3 * cfg.min_separation(),
                               0.4 * cfg.boundary_clearance(cm.domain),
                               0.18 * std::sqrt(cm.mesh->total_area())});
        for (int k = 0; k < 6; ++k) rhos.push_back(cap * std::pow(2.0, -0.5 * k));
    }
    std::sort(rhos.begin(), rhos.end(), std::greater<double>());
    double floor_rho = 2.5 * cm.mesh->h_near;
    while (!rhos.empty() && rhos.back() < floor_rho) rhos.pop_back();
    if (rhos.size() < 4)
        throw BadRadius("rho ladder has fewer than four usable radii above the mesh scale");
    double guard = std::min(0.49 * cfg.min_separation(), cfg.boundary_clearance(cm.domain));
    if (rhos.front() >= guard)
        throw BadRadius("largest rho does not keep the masked disks disjoint and interior");

    CurrentField f = current_field(cm);
    double d2 = 0.0;
    for (int d : cfg.degrees) d2 += double(d) * d;

    RhoLimitResult out;
    out.rho = rhos;
    for (double r : rhos)
        out.W_rho.push_back(masked_current_energy(f, cfg.points, r) - TWO_PI * d2 * std::log(1.0 / r));

    // least squares fit W_rho ~ c0 + c1 rho + c2 rho^2
    int m = (int)rhos.size();
    Eigen::MatrixXd A(m, 3);
    Eigen::VectorXd y(m);
    for (int i = 0; i < m; ++i) {
        A(i, 0) = 1.0;
        A(i, 1) = rhos[i];
        A(i, 2) = rhos[i] * rhos[i];
        y(i) = out.W_rho[i];
    }
    Eigen::Vector3d c = A.colPivHouseholderQr().solve(y);
    out.W = c(0);
    out.slope = c(1);
    out.curv = c(2);
    out.fit_residual = std::sqrt((A * c - y).squaredNorm() / m);
    return out;
}

// ---------------------------------------------------------------- route 2

double probe_radius(const CanonicalMap& cm) {
    double r = std::min({0.35 * cm.config.min_separation(),
                         0.45 * cm.config.boundary_clearance(cm.domain),
                         0.15 * std::sqrt(cm.mesh->total_area())});
    if (r < 3.0 * cm.mesh->h_near)
        throw BadRadius("vortices too crowded for mean-value recovery at this resolution");
    return r;
}

GreenResult renorm_energy_green(const CanonicalMap& cm) {
    const Mesh& mesh = *cm.mesh;
    const VortexConfig& cfg = cm.config;
    const int n = cfg.n();

    // Neumann data for H_*: sigma' minus the normal derivative of the log sum
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(mesh.num_verts());
    for (const Mesh::BEdge& e : mesh.bedges) {
        Vec2 a = mesh.verts[e.a], b = mesh.verts[e.b];
        Vec2 tau = (b - a) / dist(a, b);
        Vec2 nu{tau.y, -tau.x};
        auto data = [&](const Vec2& p) {
            double t = cm.domain.loop_param(e.tag, p);
            double v = cm.datum.phase_speed_tau(cm.domain, e.tag, t);
            for (int j = 0; j < n; ++j) {
                Vec2 d = p - cfg.points[j];
                v -= cfg.degrees[j] * d.dot(nu) / d.norm2();
            }
            return v;
        };
        rhs[e.a] += edge_gauss(a, b, 6, [&](const Vec2& p, double xi) { return data(p) * (1.0 - xi); });
        rhs[e.b] += edge_gauss(a, b, 6, [&](const Vec2& p, double xi) { return data(p) * xi; });
    }

    GreenResult out;
    out.h_star = cm.op->solve_neumann(rhs);

    double rho = probe_radius(cm);
    for (int j = 0; j < n; ++j)
        out.h_at_vortex.push_back(harmonic_mean_value(out.h_star, cfg.points[j], rho));

    for (int j = 0; j < n; ++j) out.self_term -= TWO_PI * cfg.degrees[j] * out.h_at_vortex[j];

    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j)
                out.pair_term -= TWO_PI * cfg.degrees[i] * cfg.degrees[j] *
                                 std::log(dist(cfg.points[i], cfg.points[j]));

    // \oint Phi sigma' ds over the mesh boundary; Phi = H_* (edge trace) + logs
    std::vector<double> per_edge(mesh.bedges.size());
    for (size_t k = 0; k < mesh.bedges.size(); ++k) {
        const Mesh::BEdge& e = mesh.bedges[k];
        Vec2 a = mesh.verts[e.a], b = mesh.verts[e.b];
        double ha = out.h_star.values[e.a], hb = out.h_star.values[e.b];
        per_edge[k] = edge_gauss(a, b, 6, [&](const Vec2& p, double xi) {
            double phi_val = ha * (1.0 - xi) + hb * xi;
            for (int j = 0; j < n; ++j) phi_val += cfg.degrees[j] * std::log(dist(p, cfg.points[j]));
            double t = cm.domain.loop_param(e.tag, p);
            return phi_val * cm.datum.phase_speed_tau(cm.domain, e.tag, t);
        });
    }
    for (double v : per_edge) out.boundary_term += v;

    // hole flow: the canonical phase leaks flux through the inner boundary;
    // the matching div/curl-free field gamma * x/|x|^2 carries it
    if (cm.domain.kind == Domain::Kind::Annulus) {
        double flux_into_hole = cm.op->loop_flux(cm.phi, 1);
        out.gamma = -flux_into_hole / TWO_PI;
        out.flow_term = TWO_PI * out.gamma * out.gamma *
                        std::log(cm.domain.radius / cm.domain.inner_radius);
    }

    out.W = out.pair_term + out.boundary_term + out.self_term + out.flow_term;
    return out;
}

// ------------------------------------------------------------- variations

std::vector<Vec2> grad_w_phase(const CanonicalMap& cm) {
    double rho = probe_radius(cm);
    std::vector<Vec2> g(cm.config.n());
    for (int j = 0; j < cm.config.n(); ++j) {
        Vec2 q = harmonic_mean_gradient(cm.phi, cm.config.points[j], rho);
        for (size_t m = 0; m < cm.charges.size(); ++m) {
            if ((int)m == j) continue;
            q += cm.charges[m].s * log_kernel(cm.config.points[j], cm.charges[m].c);
        }
        g[j] = 4.0 * PI * cm.config.degrees[j] * q.perp();
    }
    return g;
}

std::vector<Vec2> grad_w_green(const CanonicalMap& cm) {
    GreenResult gr = renorm_energy_green(cm);
    double rho = probe_radius(cm);
    std::vector<Vec2> g(cm.config.n());
    for (int j = 0; j < cm.config.n(); ++j) {
        Vec2 p = cm.config.points[j];
        Vec2 grad_h = harmonic_mean_gradient(gr.h_star, p, rho);
        for (int m = 0; m < cm.config.n(); ++m) {
            if (m == j) continue;
            Vec2 d = p - cm.config.points[m];
            grad_h += cm.config.degrees[m] * d / d.norm2();
        }
        Vec2 flow_perp = gr.gamma * log_kernel(p, {0.0, 0.0}); // (grad psi)^perp
        if (cm.domain.kind != Domain::Kind::Annulus) flow_perp = {0.0, 0.0};
        g[j] = -4.0 * PI * cm.config.degrees[j] * (grad_h - flow_perp);
    }
    return g;
}

std::vector<Vec2> grad_w_fd(const CanonicalMap& cm, double step) {
    std::vector<Vec2> g(cm.config.n());
    for (int j = 0; j < cm.config.n(); ++j) {
        for (int k = 0; k < 2; ++k) {
            double w[2];
            for (int s = 0; s < 2; ++s) {
                std::vector<Vec2> pts = cm.config.points;
                (k == 0 ? pts[j].x : pts[j].y) += (s == 0 ? step : -step);
                w[s] = renorm_energy_green(transport_config(cm, pts)).W;
            }
            (k == 0 ? g[j].x : g[j].y) = (w[0] - w[1]) / (2.0 * step);
        }
    }
    return g;
}

} // namespace vlab
