#include "vlab/stationary.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>
#include <random>

namespace vlab {

CanonicalMap MapProblem::build(const std::vector<Vec2>& pts) const {
    auto mesh = std::make_shared<const Mesh>(build_graded_mesh(domain, pts, mesh_prm));
    return build_canonical_map(mesh, domain, datum, VortexConfig{pts, degrees});
}

namespace {

Eigen::VectorXd flatten(const std::vector<Vec2>& pts) {
    Eigen::VectorXd v(2 * (int)pts.size());
    for (size_t j = 0; j < pts.size(); ++j) {
        v[2 * j] = pts[j].x;
        v[2 * j + 1] = pts[j].y;
    }
    return v;
}

std::vector<Vec2> unflatten(const Eigen::VectorXd& v) {
    std::vector<Vec2> pts(v.size() / 2);
    for (size_t j = 0; j < pts.size(); ++j) pts[j] = {v[2 * j], v[2 * j + 1]};
    return pts;
}

double max_disp(const std::vector<Vec2>& a, const std::vector<Vec2>& b) {
    double m = 0.0;
    for (size_t j = 0; j < a.size(); ++j) m = std::max(m, dist(a[j], b[j]));
    return m;
}

Eigen::VectorXd grad_w_flat(const CanonicalMap& cm) {
    return flatten(grad_w_phase(cm));
}

// ---------------------------------------------------------- critical points

// gradient of W as a smooth function of positions on the frozen mesh
Eigen::VectorXd grad_at(const CanonicalMap& anchor, const std::vector<Vec2>& pts) {
    if (max_disp(pts, anchor.config.points) == 0.0) return grad_w_flat(anchor);
    return grad_w_flat(transport_config(anchor, pts));
}

Eigen::MatrixXd grad_jacobian(const CanonicalMap& anchor, const std::vector<Vec2>& pts,
                              double h) {
    int m = 2 * (int)pts.size();
    Eigen::MatrixXd J(m, m);
    Eigen::VectorXd base = flatten(pts);
    for (int k = 0; k < m; ++k) {
        Eigen::VectorXd lo = base, hi = base;
        hi[k] += h;
        lo[k] -= h;
        J.col(k) = (grad_at(anchor, unflatten(hi)) - grad_at(anchor, unflatten(lo))) / (2 * h);
    }
    return J;
}

} // namespace

CriticalPointResult find_critical_point_W(const MapProblem& prob,
                                          const std::vector<Vec2>& x_init,
                                          const CriticalParams& prm) {
    const double tol = prm.polish_tol * 4.0 * PI;
    try {
        std::vector<Vec2> x = x_init;
        CanonicalMap anchor = prob.build(x);
        Eigen::VectorXd g = grad_w_flat(anchor);
        int iters = 0;
        while (iters < prm.max_iters) {
            double gn = g.lpNorm<Eigen::Infinity>();
            if (gn < tol)
                return {x, gn, iters};
            Eigen::MatrixXd J;
            try {
                J = grad_jacobian(anchor, x, prm.fd_step);
            } catch (const TransportTooFar&) {
                anchor = prob.build(x); // drifted to the edge of the transport guard
                g = grad_w_flat(anchor);
                continue;
            }
            Eigen::VectorXd dx = J.colPivHouseholderQr().solve(-g);
            if (!dx.allFinite()) throw NoCriticalPoint("find_critical_point_W: singular Jacobian");
            double cap = dx.lpNorm<Eigen::Infinity>();
            if (cap > prm.step_cap) dx *= prm.step_cap / cap;

            bool accepted = false;
            for (double t = 1.0; t > 1e-3 && !accepted; t *= 0.5) {
                Eigen::VectorXd trial = flatten(x) + t * dx;
                std::vector<Vec2> xt = unflatten(trial);
                try {
                    const CanonicalMap* from = &anchor;
                    CanonicalMap rebuilt;
                    // Re-mesh only when forced: for accuracy if the caller set a
                    // drift threshold, or when the transport guard is exceeded.
                    // Gratuitous re-meshing would re-roll the discretization
                    // noise and turn nearly-degenerate critical sets (rotation
                    // orbits of symmetric data) into moving targets.
                    bool fresh = prm.remesh_disp > 0.0 &&
                                 max_disp(xt, anchor.config.points) > prm.remesh_disp;
                    Eigen::VectorXd gt;
                    if (fresh) {
                        rebuilt = prob.build(xt);
                        from = &rebuilt;
                        gt = grad_w_flat(rebuilt);
                    } else {
                        try {
                            gt = grad_at(anchor, xt);
                        } catch (const TransportTooFar&) {
                            rebuilt = prob.build(xt);
                            from = &rebuilt;
                            gt = grad_w_flat(rebuilt);
                        }
                    }
                    if (!gt.allFinite()) continue;
                    // Unconditional acceptance of the first valid trial: along
                    // nearly-degenerate modes (rotation orbits of symmetric
                    // data) the gradient rides a discretization-noise floor
                    // where no step length decreases it, while full capped
                    // steps traverse the floor and land in the true quadratic
                    // basin.  Soundness comes from the endpoint test |grad| <
                    // tol, not from path monotonicity; halving is only a
                    // fallback for invalid trials.
                    x = xt;
                    g = gt;
                    if (from == &rebuilt) anchor = std::move(rebuilt);
                    accepted = true;
                } catch (const Error&) {
                    continue; // invalid trial (left the domain, transport too far)
                }
            }
            if (!accepted)
                throw NoCriticalPoint("find_critical_point_W: no admissible step (all trials "
                                      "leave the domain or collapse the configuration) at "
                                      "|grad| = " +
                                      fmt_g17(gn));
            ++iters;
        }
        throw NoCriticalPoint("find_critical_point_W: no convergence in " +
                              std::to_string(prm.max_iters) + " steps");
    } catch (const NoCriticalPoint&) {
        throw;
    } catch (const Error& e) {
        throw NoCriticalPoint(std::string("find_critical_point_W: ") + e.what());
    }
}

// ------------------------------------------------------------ Brouwer degree

namespace {

DegreeCertificate degree_circle(const FlatField& F, const std::string& id,
                                const std::vector<double>& center, double radius,
                                const DegreeParams& prm) {
    int M = std::max(8, prm.n_theta);
    DegreeCertificate cert;
    cert.map_id = id;
    cert.center = center;
    cert.radius = radius;
    cert.samples = M;
    std::vector<double> ang(M);
    cert.min_norm = std::numeric_limits<double>::infinity();
    for (int k = 0; k < M; ++k) {
        double th = TWO_PI * k / M;
        std::vector<double> y{center[0] + radius * std::cos(th),
                              center[1] + radius * std::sin(th)};
        std::vector<double> v = F(y);
        if (v.size() != 2 || !std::isfinite(v[0]) || !std::isfinite(v[1]))
            throw DegreeUndefined("brouwer_degree: field evaluation failed on the circle");
        cert.min_norm = std::min(cert.min_norm, std::hypot(v[0], v[1]));
        ang[k] = std::atan2(v[1], v[0]);
    }
    if (!(cert.min_norm > 10.0 * prm.noise_floor) || cert.min_norm == 0.0)
        throw DegreeUndefined("brouwer_degree: boundary norm " + fmt_g17(cert.min_norm) +
                              " under the noise floor");
    double total = 0.0;
    for (int k = 0; k < M; ++k) {
        double d = wrap_angle(ang[(k + 1) % M] - ang[k]);
        if (std::abs(d) >= 0.999 * PI)
            throw DegreeUndefined("brouwer_degree: ambiguous winding (angular gap near pi); "
                                  "refine n_theta");
        total += d;
    }
    double w = total / TWO_PI;
    cert.degree = (int)std::lround(w);
    if (std::abs(w - cert.degree) > 1e-6)
        throw DegreeUndefined("brouwer_degree: winding sum is not an integer");
    return cert;
}

// --- simplicial degree on the boundary of a product of two disks in R^4 ---

struct Complex4 {
    std::vector<std::array<double, 4>> pos;
    std::vector<std::array<int, 4>> tets;
};

// triangulated disk model shared by both factors
struct DiskModel {
    int M, rings;
    std::vector<Vec2> verts;                 // center, then ring by ring
    std::vector<std::array<int, 3>> tris;
    int outer_vert(int m) const { return 1 + (rings - 1) * M + m; }
    bool is_outer(int d) const { return d >= 1 + (rings - 1) * M; }
    int outer_angle(int d) const { return d - 1 - (rings - 1) * M; }
};

DiskModel make_disk(int M, int rings, double R) {
    DiskModel D;
    D.M = M;
    D.rings = rings;
    D.verts.push_back({0.0, 0.0});
    for (int i = 1; i <= rings; ++i)
        for (int m = 0; m < M; ++m) {
            double r = R * i / rings, th = TWO_PI * m / M;
            D.verts.push_back({r * std::cos(th), r * std::sin(th)});
        }
    auto rid = [&](int i, int m) { return 1 + (i - 1) * M + ((m % M) + M) % M; };
    for (int m = 0; m < M; ++m) D.tris.push_back({0, rid(1, m), rid(1, m + 1)});
    for (int i = 1; i < rings; ++i)
        for (int m = 0; m < M; ++m) {
            int a = rid(i, m), b = rid(i, m + 1), c = rid(i + 1, m + 1), d = rid(i + 1, m);
            D.tris.push_back({a, b, c});
            D.tris.push_back({a, c, d});
        }
    return D;
}

Complex4 build_product_boundary(const std::vector<double>& center, double radius,
                                int M, int rings) {
    DiskModel D = make_disk(M, rings, radius);
    Complex4 C;
    // global vertex table: torus verts shared by the two pieces
    std::map<std::array<int, 3>, int> gid; // (kind, a, b): kind 0 torus, 1 piece A, 2 piece B
    auto add_vert = [&](const std::array<int, 3>& key, const std::array<double, 4>& p) {
        auto it = gid.find(key);
        if (it != gid.end()) return it->second;
        int id = (int)C.pos.size();
        C.pos.push_back(p);
        gid.emplace(key, id);
        return id;
    };
    auto circle_pt = [&](int k) -> Vec2 {
        double th = TWO_PI * k / M;
        return {radius * std::cos(th), radius * std::sin(th)};
    };
    // piece = 0: S^1 x disk (first factor on its circle); piece = 1: disk x S^1
    auto vert_id = [&](int piece, int k, int d) {
        k = ((k % M) + M) % M;
        Vec2 c = circle_pt(k), b = D.verts[(size_t)d];
        std::array<double, 4> p{};
        if (piece == 0)
            p = {center[0] + c.x, center[1] + c.y, center[2] + b.x, center[3] + b.y};
        else
            p = {center[0] + b.x, center[1] + b.y, center[2] + c.x, center[3] + c.y};
        if (D.is_outer(d)) {
            int m = D.outer_angle(d);
            return add_vert(piece == 0 ? std::array<int, 3>{0, k, m}
                                       : std::array<int, 3>{0, m, k},
                            p);
        }
        return add_vert({piece + 1, k, d}, p);
    };
    // Steiner prism split: cone from the prism centroid over both triangle
    // faces and the three quad faces; quad diagonals keyed to global ids so
    // shared faces (including the glue torus) split identically in both tets.
    auto add_prism = [&](const std::array<int, 3>& bot, const std::array<int, 3>& top) {
        std::array<double, 4> cen{};
        for (int i = 0; i < 3; ++i)
            for (int c4 = 0; c4 < 4; ++c4)
                cen[c4] += (C.pos[(size_t)bot[i]][c4] + C.pos[(size_t)top[i]][c4]) / 6.0;
        int w = (int)C.pos.size();
        C.pos.push_back(cen);
        C.tets.push_back({w, bot[0], bot[1], bot[2]});
        C.tets.push_back({w, top[0], top[1], top[2]});
        const int E[3][2] = {{0, 1}, {1, 2}, {2, 0}};
        for (auto& e : E) {
            int p = bot[e[0]], q = bot[e[1]], r = top[e[1]], s = top[e[0]];
            int mn = std::min(std::min(p, q), std::min(r, s));
            if (mn == p || mn == r) {
                C.tets.push_back({w, p, q, r});
                C.tets.push_back({w, p, r, s});
            } else {
                C.tets.push_back({w, q, r, s});
                C.tets.push_back({w, q, s, p});
            }
        }
    };
    for (int piece = 0; piece < 2; ++piece)
        for (int k = 0; k < M; ++k)
            for (const auto& t : D.tris) {
                std::array<int, 3> bot{}, top{};
                for (int i = 0; i < 3; ++i) {
                    bot[i] = vert_id(piece, k, t[i]);
                    top[i] = vert_id(piece, k + 1, t[i]);
                }
                add_prism(bot, top);
            }
    return C;
}

// orient the closed complex by face-matching flood fill; returns +-1 per tet
std::vector<int> orient_complex(const Complex4& C) {
    struct FaceRef {
        int tet, parity; // parity of the induced ordered face vs the sorted key
    };
    auto parity_of = [](std::array<int, 3> f) {
        int p = 0;
        if (f[0] > f[1]) { std::swap(f[0], f[1]); p ^= 1; }
        if (f[1] > f[2]) { std::swap(f[1], f[2]); p ^= 1; }
        if (f[0] > f[1]) { std::swap(f[0], f[1]); p ^= 1; }
        return p;
    };
    std::map<std::array<int, 3>, std::vector<FaceRef>> faces;
    for (int t = 0; t < (int)C.tets.size(); ++t) {
        const auto& T = C.tets[(size_t)t];
        for (int i = 0; i < 4; ++i) {
            // face opposite vertex i with the boundary-orientation sign (-1)^i
            std::array<int, 3> f{};
            int w = 0;
            for (int j = 0; j < 4; ++j)
                if (j != i) f[(size_t)w++] = T[(size_t)j];
            int par = parity_of(f) ^ (i & 1);
            std::array<int, 3> key = f;
            std::sort(key.begin(), key.end());
            faces[key].push_back({t, par});
        }
    }
    std::vector<int> orient(C.tets.size(), 0);
    std::queue<int> bfs;
    orient[0] = 1;
    bfs.push(0);
    // adjacency through shared faces: opposite induced orientations required
    std::map<int, std::vector<std::pair<int, int>>> adj; // tet -> (other, relative sign)
    for (auto& [key, refs] : faces) {
        if (refs.size() != 2)
            throw DegreeUndefined("brouwer_degree: boundary triangulation is not closed");
        int rel = (refs[0].parity == refs[1].parity) ? -1 : 1;
        adj[refs[0].tet].push_back({refs[1].tet, rel});
        adj[refs[1].tet].push_back({refs[0].tet, rel});
    }
    while (!bfs.empty()) {
        int t = bfs.front();
        bfs.pop();
        for (auto [u, rel] : adj[t]) {
            int want = orient[(size_t)t] * rel;
            if (orient[(size_t)u] == 0) {
                orient[(size_t)u] = want;
                bfs.push(u);
            } else if (orient[(size_t)u] != want) {
                throw DegreeUndefined("brouwer_degree: non-orientable face matching");
            }
        }
    }
    for (int o : orient)
        if (o == 0) throw DegreeUndefined("brouwer_degree: disconnected boundary complex");
    return orient;
}

// signed count of tets whose image cone covers the ray; empty optional when a
// barycentric coordinate is borderline (caller redraws the ray)
std::optional<int> ray_count(const std::vector<std::array<double, 4>>& vals,
                             const Complex4& C, const std::vector<int>& orient,
                             const Eigen::Vector4d& ray) {
    int total = 0;
    for (size_t t = 0; t < C.tets.size(); ++t) {
        Eigen::Matrix4d Mv;
        for (int i = 0; i < 4; ++i)
            for (int c = 0; c < 4; ++c) Mv(c, i) = vals[(size_t)C.tets[t][(size_t)i]][(size_t)c];
        Eigen::FullPivLU<Eigen::Matrix4d> lu(Mv);
        if (!lu.isInvertible()) {
            // Degenerate image simplex: its cone has empty interior, so a ray
            // off its span is not covered; a ray inside the span is borderline.
            Eigen::Vector4d ls = Mv.completeOrthogonalDecomposition().solve(ray);
            if ((Mv * ls - ray).norm() > 1e-6 * ray.norm()) continue;
            return std::nullopt;
        }
        Eigen::Vector4d lam = lu.solve(ray);
        double scale = lam.cwiseAbs().maxCoeff();
        if (scale <= 0.0) return std::nullopt;
        double lo = lam.minCoeff();
        if (lo > 1e-9 * scale) {
            double det = Mv.determinant();
            int s = det > 0 ? 1 : -1;
            total += s * orient[t];
        } else if (lo > -1e-9 * scale) {
            return std::nullopt; // grazing the cone boundary
        }
    }
    return total;
}

int pl_degree(const std::vector<std::array<double, 4>>& vals, const Complex4& C,
              const std::vector<int>& orient, std::mt19937_64& rng) {
    std::normal_distribution<double> N(0.0, 1.0);
    for (int attempt = 0; attempt < 32; ++attempt) {
        Eigen::Vector4d r{N(rng), N(rng), N(rng), N(rng)};
        double nr = r.norm();
        if (nr < 1e-8) continue;
        r /= nr;
        if (auto d = ray_count(vals, C, orient, r)) return *d;
    }
    throw DegreeUndefined("brouwer_degree: no regular ray found (degenerate field values)");
}

DegreeCertificate degree_product4(const FlatField& F, const std::string& id,
                                  const std::vector<double>& center, double radius,
                                  const DegreeParams& prm) {
    int M = std::max(6, prm.n_theta), rings = std::max(1, prm.disk_rings);
    Complex4 C = build_product_boundary(center, radius, M, rings);
    std::vector<int> orient = orient_complex(C);

    DegreeCertificate cert;
    cert.map_id = id;
    cert.center = center;
    cert.radius = radius;
    cert.samples = (int)C.pos.size();
    cert.min_norm = std::numeric_limits<double>::infinity();

    std::vector<std::array<double, 4>> vals(C.pos.size());
    for (size_t v = 0; v < C.pos.size(); ++v) {
        std::vector<double> y(C.pos[v].begin(), C.pos[v].end());
        std::vector<double> f = F(y);
        if (f.size() != 4 || !std::all_of(f.begin(), f.end(),
                                          [](double a) { return std::isfinite(a); }))
            throw DegreeUndefined("brouwer_degree: field evaluation failed on the boundary");
        vals[v] = {f[0], f[1], f[2], f[3]};
        cert.min_norm = std::min(cert.min_norm,
                                 std::sqrt(f[0] * f[0] + f[1] * f[1] + f[2] * f[2] + f[3] * f[3]));
    }
    if (!(cert.min_norm > 10.0 * prm.noise_floor) || cert.min_norm == 0.0)
        throw DegreeUndefined("brouwer_degree: boundary norm " + fmt_g17(cert.min_norm) +
                              " under the noise floor");
    // sampling adequacy: the image of every simplex must sit in a half-space
    for (const auto& T : C.tets) {
        Eigen::Vector4d u = Eigen::Vector4d::Zero();
        std::array<Eigen::Vector4d, 4> vh;
        for (int i = 0; i < 4; ++i) {
            const auto& a = vals[(size_t)T[(size_t)i]];
            vh[(size_t)i] = Eigen::Vector4d{a[0], a[1], a[2], a[3]}.normalized();
            u += vh[(size_t)i];
        }
        if (u.norm() < 1e-12)
            throw DegreeUndefined("brouwer_degree: angular resolution too coarse");
        u.normalize();
        for (int i = 0; i < 4; ++i)
            if (u.dot(vh[(size_t)i]) <= 0.05)
                throw DegreeUndefined("brouwer_degree: angular resolution too coarse for a "
                                      "certificate; refine n_theta/disk_rings");
    }

    std::mt19937_64 rng(prm.seed);
    // self-calibration: the identity-like map must register +1
    std::vector<std::array<double, 4>> ident(C.pos.size());
    for (size_t v = 0; v < C.pos.size(); ++v)
        for (int c = 0; c < 4; ++c) ident[v][(size_t)c] = C.pos[v][(size_t)c] - center[(size_t)c];
    int d0 = pl_degree(ident, C, orient, rng);
    if (d0 != 1 && d0 != -1)
        throw DegreeUndefined("brouwer_degree: triangulation self-test failed (identity degree " +
                              std::to_string(d0) + ")");
    cert.degree = d0 * pl_degree(vals, C, orient, rng);
    return cert;
}

} // namespace

DegreeCertificate brouwer_degree(const FlatField& F, const std::string& map_id,
                                 const std::vector<double>& center, double radius,
                                 const DegreeParams& prm) {
    if (!(radius > 0.0)) throw BadRadius("brouwer_degree: radius must be positive");
    if (center.size() == 2) return degree_circle(F, map_id, center, radius, prm);
    if (center.size() == 4) return degree_product4(F, map_id, center, radius, prm);
    throw InvalidConfig("brouwer_degree: certified degree implemented for n <= 2 "
                        "(center dimension 2 or 4)");
}

// ------------------------------------------------------- stationary roots

namespace {

// interpolate a zero-trace field onto a different mesh of the same domain
ScalarField interp_zero_trace(const ScalarField& f, std::shared_ptr<const Mesh> mesh) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(mesh->num_verts());
    for (int i = 0; i < mesh->num_verts(); ++i) {
        if (mesh->on_boundary[(size_t)i]) continue;
        try {
            v[i] = f.eval(mesh->verts[(size_t)i]);
        } catch (const Error&) {
            v[i] = 0.0; // fell between the boundary discretizations
        }
    }
    return {std::move(mesh), std::move(v)};
}

double coeff_delta_for(const VortexConfig& cfg, const Domain& dom, double trust) {
    double ms = cfg.min_separation();
    double cl = cfg.boundary_clearance(dom);
    double avail = cl - trust;
    if (std::isfinite(ms)) avail = std::min(avail, ms - 2.0 * trust);
    double d = 0.25 * avail;
    if (!(d > 0.0))
        throw BadRadius("find_stationary: trust ball leaves no room for the stress cutoff");
    return d;
}

// full pipeline evaluator: fresh mesh -> relaxation -> coefficients, with
// the warm phase carried by interpolation.  The coefficients must be a pure
// function of the vortex positions: evaluating on a mesh transported from an
// anchor elsewhere tilts them by an amount that grows with the transport
// distance (several 1e-3 per 1e-2 of displacement) and swamps the root
// tolerance, so every evaluation meshes the configuration it is given.
struct CoeffEvaluator {
    const MapProblem& prob;
    double p;
    double delta_c;
    PSolveParams solver;
    ScalarField warm;
    bool have_warm = false;
    int evals = 0;

    CoeffEvaluator(const MapProblem& pr, double p_, double dc, const PSolveParams& sp)
        : prob(pr), p(p_), delta_c(dc), solver(sp) {}

    Eigen::VectorXd eval(const std::vector<Vec2>& pts) {
        CanonicalMap cm = prob.build(pts);
        PSolveParams ps = solver;
        ScalarField init;
        if (have_warm) {
            init = interp_zero_trace(warm, cm.mesh);
            ps.init = &init;
        } else if (solver.init) {
            init = interp_zero_trace(*solver.init, cm.mesh);
            ps.init = &init;
        }
        PhaseSolveResult r = minimize_phase(cm, p, ps);
        StressCoefficients sc = stress_coefficients(cm, &r.phi, p, delta_c);
        ++evals;
        warm = std::move(r.phi);
        have_warm = true;
        return flatten(sc.c);
    }
};

double probe_root_tol(const MapProblem& prob, const CanonicalMap& base,
                      const std::vector<Vec2>& x0, double trust) {
    double scale = 0.0;
    Eigen::VectorXd flat = flatten(x0);
    for (int k = 0; k < flat.size(); ++k) {
        for (double s : {1.0, -1.0}) {
            Eigen::VectorXd y = flat;
            y[k] += s * trust;
            try {
                scale = std::max(scale,
                                 grad_w_flat(transport_config(base, unflatten(y)))
                                     .lpNorm<Eigen::Infinity>());
            } catch (const Error&) {
                try {
                    scale = std::max(scale,
                                     grad_w_flat(prob.build(unflatten(y)))
                                         .lpNorm<Eigen::Infinity>());
                } catch (const Error&) {
                    // probe point invalid; skip
                }
            }
        }
    }
    scale = std::max(scale, 1e-3 * 4.0 * PI);
    return 1e-4 * scale;
}

} // namespace

StationaryResult find_stationary(const MapProblem& prob, double p,
                                 const std::vector<Vec2>& x_init,
                                 const StationaryParams& prm) {
    if (!(p >= 1.5 && p < 2.0))
        throw BadExponent("find_stationary: continuation exponent must lie in [1.5, 2)");
    const int m = 2 * (int)x_init.size();
    VortexConfig probe_cfg{x_init, prob.degrees};
    double delta_c =
        prm.coeff_delta > 0.0 ? prm.coeff_delta
                              : coeff_delta_for(probe_cfg, prob.domain, prm.delta_trust);

    CoeffEvaluator ev(prob, p, delta_c, prm.solver);
    double tol = prm.root_tol;
    if (!(tol > 0.0)) {
        CanonicalMap base = prob.build(x_init);
        tol = probe_root_tol(prob, base, x_init, prm.delta_trust);
    }

    std::vector<Vec2> x = x_init;
    Eigen::VectorXd c = ev.eval(x);
    double cnorm = c.lpNorm<Eigen::Infinity>();

    Eigen::MatrixXd J(m, m);
    bool j_valid = false, j_fresh = false;
    int accepted = 0, last_refresh = -prm.refresh_every;
    const double h = prm.fd_step_scale * prm.delta_trust;

    while (cnorm > tol) {
        if (ev.evals >= prm.max_evals)
            throw SolverStalled("find_stationary: evaluation budget exhausted at |c| = " +
                                fmt_g17(cnorm));
        if (!j_valid || accepted - last_refresh >= prm.refresh_every) {
            Eigen::VectorXd flat = flatten(x);
            for (int k = 0; k < m; ++k) {
                Eigen::VectorXd y = flat;
                y[k] += h;
                J.col(k) = (ev.eval(unflatten(y)) - c) / h;
            }
            j_valid = j_fresh = true;
            last_refresh = accepted;
        }
        Eigen::VectorXd dx = J.colPivHouseholderQr().solve(-c);
        if (!dx.allFinite())
            throw SolverStalled("find_stationary: singular coefficient Jacobian");

        // stay inside the trust ball and the transport guard
        double remaining = prm.delta_trust - max_disp(x, x_init);
        if (remaining <= 1e-3 * prm.delta_trust)
            throw TrustViolation("find_stationary: iterates pressed against the trust ball");
        double cap = std::min(remaining, 0.5 * prm.delta_trust);
        double dmax = dx.lpNorm<Eigen::Infinity>();
        if (dmax > cap) dx *= cap / dmax;

        bool moved = false;
        for (double t = 1.0; t > 1e-2 && !moved; t *= 0.5) {
            std::vector<Vec2> xt = unflatten(flatten(x) + t * dx);
            if (max_disp(xt, x_init) > prm.delta_trust) continue;
            Eigen::VectorXd ct;
            try {
                ct = ev.eval(xt);
            } catch (const Error&) {
                continue; // inadmissible trial (mesh or solve refused); shrink
            }
            double ctn = ct.lpNorm<Eigen::Infinity>();
            if (ctn < cnorm * (1.0 - 1e-4) || t <= 0.02) {
                Eigen::VectorXd dxs = t * dx, dc = ct - c;
                J += (dc - J * dxs) * dxs.transpose() / dxs.squaredNorm();
                x = std::move(xt);
                c = std::move(ct);
                cnorm = ctn;
                ++accepted;
                moved = true;
            }
        }
        if (!moved) {
            if (!j_fresh) {
                j_valid = false; // retry with a fresh Jacobian
                continue;
            }
            throw SolverStalled("find_stationary: line search stalled at |c| = " +
                                fmt_g17(cnorm));
        }
        j_fresh = false;
    }
    return {x, cnorm, ev.evals, tol, true};
}

// ----------------------------------------------------------- continuation

ContinuationResult continuation(const MapProblem& prob, const std::vector<double>& schedule,
                                const std::vector<Vec2>& x_star,
                                const ContinuationParams& prm) {
    if (schedule.empty()) throw BadSchedule("continuation: empty exponent schedule");
    for (size_t i = 0; i < schedule.size(); ++i) {
        if (!(schedule[i] >= 1.5 && schedule[i] < 2.0))
            throw BadSchedule("continuation: exponents must lie in [1.5, 2)");
        if (i > 0 && !(schedule[i] > schedule[i - 1]))
            throw BadSchedule("continuation: schedule must increase toward 2");
    }
    ContinuationResult res;
    res.x_limit = x_star;
    std::vector<Vec2> prev = x_star;
    for (double p : schedule) {
        ContinuationStepRec rec;
        rec.p = p;
        try {
            StationaryResult st = find_stationary(prob, p, prev, prm.inner);
            rec.x = st.x;
            rec.cnorm = st.cnorm;
            rec.evals = st.evals;
            rec.ok = true;
            prev = st.x;
        } catch (const Error& e) {
            rec.x = prev;
            rec.ok = false;
            rec.note = e.what();
        }
        rec.dist_to_limit =
            std::sqrt((flatten(rec.x) - flatten(x_star)).squaredNorm());
        res.steps.push_back(std::move(rec));
    }
    if (prm.certify) {
        double pc = prm.cert_p > 0.0 ? prm.cert_p : schedule.front();
        Eigen::VectorXd cen = flatten(x_star);
        std::vector<double> center(cen.data(), cen.data() + cen.size());
        FlatField grad_field = [&](const std::vector<double>& y) {
            Eigen::VectorXd g = grad_w_flat(
                prob.build(unflatten(Eigen::Map<const Eigen::VectorXd>(y.data(), (long)y.size()))));
            return std::vector<double>(g.data(), g.data() + g.size());
        };
        double delta_c = coeff_delta_for(VortexConfig{x_star, prob.degrees}, prob.domain,
                                         prm.cert_radius);
        PSolveParams sp = prm.inner.solver;
        sp.init = nullptr;
        FlatField c_field = [&](const std::vector<double>& y) {
            CanonicalMap cm = prob.build(
                unflatten(Eigen::Map<const Eigen::VectorXd>(y.data(), (long)y.size())));
            PhaseSolveResult r = minimize_phase(cm, pc, sp);
            StressCoefficients sc = stress_coefficients(cm, &r.phi, pc, delta_c);
            Eigen::VectorXd f = flatten(sc.c);
            return std::vector<double>(f.data(), f.data() + f.size());
        };
        try {
            res.cert_grad_w =
                brouwer_degree(grad_field, "grad_W", center, prm.cert_radius, prm.degree);
        } catch (const Error& e) {
            res.certify_note = std::string("grad_W: ") + e.what();
        }
        try {
            res.cert_c = brouwer_degree(c_field, "c(p,.)", center, prm.cert_radius, prm.degree);
        } catch (const Error& e) {
            res.certify_note += std::string(res.certify_note.empty() ? "" : "; ") +
                                "c(p,.): " + e.what();
        }
        res.certified = res.cert_grad_w && res.cert_c &&
                        res.cert_grad_w->degree == res.cert_c->degree &&
                        res.cert_grad_w->degree != 0;
        if (res.certified) res.certify_note = "degrees agree and are nonzero";
    }
    return res;
}

} // namespace vlab
