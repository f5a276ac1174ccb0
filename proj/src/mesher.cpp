#include "vlab/mesh.hpp"

#include <algorithm>
#include <cstdint>
#include <map>
#include <unordered_map>

// Graded mesh construction:
//   1. sample boundary loops at the local target size (polygon corners kept),
//   2. drop a tiny equilateral "micro triangle" around each vortex so the
//      vortex is strictly interior to one small triangle and never a vertex,
//   3. fill the interior with a multi-level jittered hex lattice accepted by
//      a Poisson-disk rule against the local size field,
//   4. Bowyer-Watson Delaunay, two Laplacian smoothing passes (boundary and
//      micro points pinned), re-triangulate,
//   5. clip to the domain by triangle centroid, extract tagged boundary
//      edges, gate on minimum angle.
// Everything is deterministic: jitter comes from an integer hash, no RNG.

namespace vlab {
namespace {

// splitmix64-style hash -> [0,1)
inline double hash01(uint64_t k) {
    k += 0x9e3779b97f4a7c15ULL;
    k = (k ^ (k >> 30)) * 0xbf58476d1ce4e5b9ULL;
    k = (k ^ (k >> 27)) * 0x94d049bb133111ebULL;
    k = k ^ (k >> 31);
    return (double)(k >> 11) * (1.0 / 9007199254740992.0);
}

struct SizeField {
    const std::vector<Vec2>& vort;
    double h_far, h_near, grading;
    double operator()(const Vec2& p) const {
        if (vort.empty()) return h_far;
        double d2 = 1e300;
        for (const Vec2& v : vort) d2 = std::min(d2, (p - v).norm2());
        return std::clamp(grading * std::sqrt(d2), h_near, h_far);
    }
};

// hash grid over accepted points, ring search with early exit
struct PointGrid {
    double cell;
    std::vector<Vec2> pts;
    std::unordered_map<int64_t, std::vector<int>> cells;

    explicit PointGrid(double c) : cell(c) {}
    static int64_t key(int i, int j) { return (int64_t)i * 73856093LL ^ (int64_t)j * 19349663LL; }
    void insert(const Vec2& p) {
        int i = (int)std::floor(p.x / cell), j = (int)std::floor(p.y / cell);
        cells[key(i, j)].push_back((int)pts.size());
        pts.push_back(p);
    }
    // true if some accepted point lies within distance r of p
    bool blocked(const Vec2& p, double r) const {
        double r2 = r * r;
        int ci = (int)std::floor(p.x / cell), cj = (int)std::floor(p.y / cell);
        int R = (int)std::ceil(r / cell);
        for (int ring = 0; ring <= R; ++ring) {
            // cells at Chebyshev distance `ring`; if the closest possible point
            // in farther rings exceeds r we can stop
            double ring_min = (ring - 1) * cell;
            if (ring > 0 && ring_min * ring_min > r2) break;
            for (int j = cj - ring; j <= cj + ring; ++j) {
                for (int i = ci - ring; i <= ci + ring; ++i) {
                    if (std::max(std::abs(i - ci), std::abs(j - cj)) != ring) continue;
                    auto it = cells.find(key(i, j));
                    if (it == cells.end()) continue;
                    for (int id : it->second)
                        if ((pts[id] - p).norm2() < r2) return true;
                }
            }
        }
        return false;
    }
};

// ------------------------------------------------------------ Delaunay (BW)

struct DelTri {
    int v[3];  // ccw
    int nb[3]; // neighbor across edge (v[k], v[k+1]), -1 if none
    bool alive = true;
};

struct Delaunay {
    std::vector<Vec2> pts;
    std::vector<DelTri> tris;
    int last_alive = 0;

    static double orient(const Vec2& a, const Vec2& b, const Vec2& c) {
        long double det = ((long double)b.x - a.x) * ((long double)c.y - a.y) -
                          ((long double)b.y - a.y) * ((long double)c.x - a.x);
        return (double)det;
    }

    bool in_circle(const DelTri& t, const Vec2& p) const {
        const Vec2 &a = pts[t.v[0]], &b = pts[t.v[1]], &c = pts[t.v[2]];
        long double ax = a.x - p.x, ay = a.y - p.y;
        long double bx = b.x - p.x, by = b.y - p.y;
        long double cx = c.x - p.x, cy = c.y - p.y;
        long double det = (ax * ax + ay * ay) * (bx * cy - cx * by) -
                          (bx * bx + by * by) * (ax * cy - cx * ay) +
                          (cx * cx + cy * cy) * (ax * by - bx * ay);
        long double m = std::max({std::abs(ax), std::abs(ay), std::abs(bx),
                                  std::abs(by), std::abs(cx), std::abs(cy)});
        // conservative: exact cocircularity (boundary circles!) counts as outside
        return det > 1e-13L * m * m * m * m;
    }

    void init(const Vec2& lo, const Vec2& hi) {
        Vec2 c = 0.5 * (lo + hi);
        double R = 10.0 * std::max({hi.x - lo.x, hi.y - lo.y, 1e-6});
        pts.clear();
        pts.push_back({c.x - 2.0 * R, c.y - R});
        pts.push_back({c.x + 2.0 * R, c.y - R});
        pts.push_back({c.x, c.y + 2.0 * R});
        tris.clear();
        tris.push_back({{0, 1, 2}, {-1, -1, -1}, true});
        last_alive = 0;
    }

    int walk(const Vec2& p) const {
        int t = last_alive, steps = 0, cap = (int)tris.size() + 16;
        while (steps++ < cap) {
            if (!tris[t].alive) break;
            const DelTri& tr = tris[t];
            int next = -1;
            for (int k = 0; k < 3; ++k) {
                if (orient(pts[tr.v[k]], pts[tr.v[(k + 1) % 3]], p) < 0.0) {
                    if (tr.nb[k] >= 0) { next = tr.nb[k]; break; }
                }
            }
            if (next < 0) return t;
            t = next;
        }
        // robust fallback
        for (int i = (int)tris.size() - 1; i >= 0; --i) {
            if (!tris[i].alive) continue;
            const DelTri& tr = tris[i];
            bool in = true;
            for (int k = 0; k < 3 && in; ++k)
                if (orient(pts[tr.v[k]], pts[tr.v[(k + 1) % 3]], p) < 0.0) in = false;
            if (in) return i;
        }
        throw MeshError("Delaunay walk failed to locate point");
    }

    void insert(const Vec2& p) {
        int pi = (int)pts.size();
        pts.push_back(p);
        int t0 = walk(p);

        // grow cavity of triangles whose circumcircle contains p
        std::vector<int> stack{t0}, cavity;
        std::unordered_map<int, char> mark;
        mark[t0] = 1;
        while (!stack.empty()) {
            int t = stack.back();
            stack.pop_back();
            if (!tris[t].alive) continue;
            if (!in_circle(tris[t], p)) { mark[t] = 2; continue; }
            cavity.push_back(t);
            mark[t] = 3;
            for (int k = 0; k < 3; ++k) {
                int nb = tris[t].nb[k];
                if (nb >= 0 && !mark.count(nb)) {
                    mark[nb] = 1;
                    stack.push_back(nb);
                }
            }
        }
        if (cavity.empty())
            throw MeshError("Delaunay cavity empty (duplicate point?)");

        // boundary of the cavity: directed edges whose twin is outside
        struct BEdge { int a, b, outside; };
        std::vector<BEdge> bound;
        for (int t : cavity) {
            for (int k = 0; k < 3; ++k) {
                int nb = tris[t].nb[k];
                bool nb_in = nb >= 0 && mark.count(nb) && mark[nb] == 3;
                if (!nb_in) bound.push_back({tris[t].v[k], tris[t].v[(k + 1) % 3], nb});
            }
        }
        for (int t : cavity) tris[t].alive = false;

        // fan from p; wire neighbors through a directed-edge map
        std::unordered_map<int64_t, int> fan; // key on directed edge (p_i -> a)
        auto ekey = [](int a, int b) { return (int64_t)a << 32 | (uint32_t)b; };
        std::vector<int> created;
        for (const BEdge& e : bound) {
            int id = (int)tris.size();
            tris.push_back({{e.a, e.b, pi}, {e.outside, -1, -1}, true});
            if (e.outside >= 0) {
                DelTri& o = tris[e.outside];
                for (int k = 0; k < 3; ++k)
                    if (o.v[k] == e.b && o.v[(k + 1) % 3] == e.a) o.nb[k] = id;
            }
            fan[ekey(e.a, e.b)] = id;
            created.push_back(id);
        }
        // neighbor across (b,pi) is the fan tri whose boundary edge starts at b;
        // neighbor across (pi,a) is the fan tri whose boundary edge ends at a
        std::unordered_map<int, int> start_at, end_at;
        for (int id : created) {
            start_at[tris[id].v[0]] = id;
            end_at[tris[id].v[1]] = id;
        }
        for (int id : created) {
            DelTri& t = tris[id];
            t.nb[1] = start_at.count(t.v[1]) ? start_at[t.v[1]] : -1; // across (b, pi)
            t.nb[2] = end_at.count(t.v[0]) ? end_at[t.v[0]] : -1;     // across (pi, a)
        }
        last_alive = created.empty() ? last_alive : created.back();
    }
};

} // namespace

Mesh build_graded_mesh(const Domain& dom, const std::vector<Vec2>& vortices,
                       const MeshParams& params) {
    MeshParams P = params;
    if (P.h_near <= 0.0) P.h_near = P.h_far / 20.0;
    if (!(P.h_far > 0.0 && P.h_near > 0.0 && P.h_near <= P.h_far))
        throw InvalidConfig("mesh sizes must satisfy 0 < h_near <= h_far");
    for (const Vec2& v : vortices)
        if (!dom.inside(v) || dom.dist_to_boundary(v) < 3.0 * P.h_near)
            throw InvalidConfig("vortex on or too close to the boundary");

    SizeField h{vortices, P.h_far, P.h_near, P.grading};

    // ---- 1. boundary points, per loop, order = tau direction
    std::vector<Vec2> pts;               // final vertex list, fixed-first
    std::vector<std::vector<int>> loop_ids;
    for (int loop = 0; loop < dom.num_loops(); ++loop) {
        std::vector<Vec2> samples;
        if (dom.kind == Domain::Kind::Polygon) {
            const auto& poly = dom.poly;
            for (size_t e = 0; e < poly.size(); ++e) {
                Vec2 a = poly[e], b = poly[(e + 1) % poly.size()];
                // size-weighted subdivision of the edge, corner kept
                const int probe = 64;
                double wlen = 0.0;
                for (int q = 0; q < probe; ++q) {
                    Vec2 m = a + ((q + 0.5) / probe) * (b - a);
                    wlen += dist(a, b) / probe / h(m);
                }
                int n = std::max(1, (int)std::lround(wlen));
                for (int q = 0; q < n; ++q) samples.push_back(a + ((double)q / n) * (b - a));
            }
        } else {
            // circle: invert the size-weighted arclength via a fine table
            const int M = 8192;
            std::vector<double> cum(M + 1, 0.0);
            for (int q = 0; q < M; ++q) {
                Vec2 m = dom.loop_point(loop, (q + 0.5) / M);
                cum[q + 1] = cum[q] + dom.loop_length(loop) / M / h(m);
            }
            int n = std::max(12, (int)std::lround(cum[M]));
            for (int q = 0; q < n; ++q) {
                double target = cum[M] * q / n;
                size_t k = size_t(std::upper_bound(cum.begin(), cum.end(), target) - cum.begin());
                k = std::min(std::max<size_t>(k, 1), (size_t)M) - 1;
                double u = (target - cum[k]) / std::max(cum[k + 1] - cum[k], 1e-300);
                samples.push_back(dom.loop_point(loop, (k + u) / M));
            }
        }
        // tau direction: ccw on outer, cw on holes -> reverse hole samples
        if (loop > 0) std::reverse(samples.begin(), samples.end());
        std::vector<int> ids;
        for (const Vec2& s : samples) {
            ids.push_back((int)pts.size());
            pts.push_back(s);
        }
        loop_ids.push_back(std::move(ids));
    }
    int n_boundary = (int)pts.size();

    // ---- 2. vortex micro triangles
    double micro_R = 0.6 * P.h_near; // circumradius; side ~ 1.04 h_near
    for (size_t j = 0; j < vortices.size(); ++j) {
        double a0 = PI / 2.0 + 0.8219 * (double)(j + 1); // decorrelate orientations
        for (int k = 0; k < 3; ++k) {
            double a = a0 + TWO_PI * k / 3.0;
            pts.push_back(vortices[j] + micro_R * Vec2{std::cos(a), std::sin(a)});
        }
    }
    int n_fixed = (int)pts.size();

    // ---- 3. interior fill: multi-level jittered hex lattice + Poisson-disk rule
    Vec2 lo, hi;
    dom.bbox(lo, hi);
    PointGrid grid(0.45 * P.h_near);
    for (const Vec2& p : pts) grid.insert(p);

    const double alpha = 0.78; // acceptance spacing as a fraction of local size
    int levels = std::max(1, (int)std::ceil(std::log2(P.h_far / P.h_near)) + 2);
    std::vector<Vec2> interior;
    for (int lev = 0; lev < levels; ++lev) {
        double pitch = 0.9 * P.h_far / (double)(1 << lev);
        // level handles local spacings in [pitch, 2*pitch); the coarsest is
        // open above, the finest open below
        double band_lo = (lev + 1 < levels) ? pitch : 0.0;
        double band_hi = (lev == 0) ? 1e300 : 2.0 * pitch;
        double row = pitch * 0.8660254037844386;
        int j0 = (int)std::floor(lo.y / row) - 1, j1 = (int)std::ceil(hi.y / row) + 1;
        for (int j = j0; j <= j1; ++j) {
            int i0 = (int)std::floor(lo.x / pitch) - 1, i1 = (int)std::ceil(hi.x / pitch) + 1;
            for (int i = i0; i <= i1; ++i) {
                Vec2 c{(i + 0.5 * (j & 1)) * pitch, j * row};
                uint64_t key = (uint64_t)(uint32_t)(i * 2654435761u) << 32 |
                               (uint32_t)(j * 40503u + lev * 977u);
                c.x += (hash01(key) - 0.5) * 0.25 * pitch;
                c.y += (hash01(key ^ 0x5bf03635ULL) - 0.5) * 0.25 * pitch;
                double hc = h(c);
                double spacing = alpha * hc;
                if (spacing < band_lo || spacing >= band_hi) continue;
                if (!dom.inside(c)) continue;
                if (dom.dist_to_boundary(c) < 0.62 * hc) continue;
                bool near_vortex = false;
                for (const Vec2& v : vortices)
                    if ((c - v).norm2() < (1.45 * P.h_near) * (1.45 * P.h_near)) { near_vortex = true; break; }
                if (near_vortex) continue;
                if (grid.blocked(c, spacing)) continue;
                grid.insert(c);
                interior.push_back(c);
            }
        }
    }
    for (const Vec2& c : interior) pts.push_back(c);

    // ---- 4. Delaunay + smoothing
    auto triangulate = [&](const std::vector<Vec2>& input) {
        Delaunay D;
        Vec2 blo = lo, bhi = hi;
        D.init(blo, bhi);
        for (const Vec2& p : input) D.insert(p);
        return D;
    };

    std::vector<Vec2> work = pts;
    Delaunay D = triangulate(work);

    auto kept = [&](const Delaunay& DD, const DelTri& t) {
        if (!t.alive) return false;
        if (t.v[0] < 3 || t.v[1] < 3 || t.v[2] < 3) return false; // super verts
        Vec2 c = (DD.pts[t.v[0]] + DD.pts[t.v[1]] + DD.pts[t.v[2]]) / 3.0;
        return dom.inside(c);
    };

    for (int pass = 0; pass < P.smoothing_passes; ++pass) {
        // neighbor averages over kept triangles only
        std::vector<Vec2> acc(work.size(), {0, 0});
        std::vector<int> cnt(work.size(), 0);
        for (const DelTri& t : D.tris) {
            if (!kept(D, t)) continue;
            for (int k = 0; k < 3; ++k) {
                int a = t.v[k] - 3, b = t.v[(k + 1) % 3] - 3;
                if (a < 0 || b < 0) continue;
                acc[a] += work[b];
                cnt[a] += 1;
                acc[b] += work[a];
                cnt[b] += 1;
            }
        }
        for (size_t i = n_fixed; i < work.size(); ++i) {
            if (cnt[i] == 0) continue;
            Vec2 q = acc[i] / (double)cnt[i]; // each edge counted twice; ratio unaffected
            double hq = h(q);
            if (!dom.inside(q)) continue;
            if (dom.dist_to_boundary(q) < 0.6 * hq) continue;
            bool nv = false;
            for (const Vec2& v : vortices)
                if ((q - v).norm2() < (1.4 * P.h_near) * (1.4 * P.h_near)) { nv = true; break; }
            if (nv) continue;
            work[i] = q;
        }
        D = triangulate(work);
    }

    // ---- 5. harvest, clip, boundary edges
    Mesh m;
    m.h_far = P.h_far;
    m.h_near = P.h_near;
    m.verts = work;
    std::vector<int> remap(D.pts.size(), -1);
    for (size_t i = 3; i < D.pts.size(); ++i) remap[i] = (int)i - 3;

    std::map<std::pair<int, int>, std::pair<int, int>> edge_use; // undirected -> (count, from-tri directed a)
    for (const DelTri& t : D.tris) {
        if (!kept(D, t)) continue;
        std::array<int, 3> tv{remap[t.v[0]], remap[t.v[1]], remap[t.v[2]]};
        m.tris.push_back(tv);
        for (int k = 0; k < 3; ++k) {
            int a = tv[k], b = tv[(k + 1) % 3];
            std::pair<int, int> key{std::min(a, b), std::max(a, b)};
            auto it = edge_use.find(key);
            if (it == edge_use.end())
                edge_use[key] = {1, a};
            else
                it->second.first += 1;
        }
    }
    for (const auto& [e, use] : edge_use) {
        if (use.first != 1) continue;
        int a = use.second, b = (e.first == a) ? e.second : e.first;
        Mesh::BEdge be;
        be.a = a;
        be.b = b;
        Vec2 mid = 0.5 * (m.verts[a] + m.verts[b]);
        if (dom.kind == Domain::Kind::Annulus) {
            double r = mid.norm();
            be.tag = (std::abs(r - dom.radius) <= std::abs(r - dom.inner_radius)) ? 0 : 1;
        } else {
            be.tag = 0;
        }
        m.bedges.push_back(be);
    }

    m.grading_radius.assign(m.verts.size(), 1e300);
    for (size_t i = 0; i < m.verts.size(); ++i)
        for (const Vec2& v : vortices)
            m.grading_radius[i] = std::min(m.grading_radius[i], dist(m.verts[i], v));

    m.finalize();

    // ---- quality gates
    double ang = m.min_angle_deg();
    if (ang < P.min_angle_deg)
        throw MeshError("mesh quality below gate: min angle " + fmt_g17(ang) + " deg");
    for (const Vec2& v : vortices) {
        int t = m.locate(v);
        if (t < 0) throw MeshError("vortex not inside the mesh");
        auto l = m.barycentric(t, v);
        if (std::min({l[0], l[1], l[2]}) < 0.05)
            throw MeshError("vortex too close to a mesh edge");
    }
    (void)n_boundary;
    return m;
}

} // namespace vlab
