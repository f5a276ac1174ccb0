#include "vlab/mesh.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

namespace vlab {

void Mesh::finalize() {
    int nv = num_verts(), nt = num_tris();
    tri_area.assign(nt, 0.0);
    hat_grad.assign(nt, {});
    on_boundary.assign(nv, 0);

    for (int t = 0; t < nt; ++t) {
        Vec2 a = verts[tris[t][0]], b = verts[tris[t][1]], c = verts[tris[t][2]];
        double twice = (b - a).cross(c - a);
        if (twice <= 0.0)
            throw MeshError("triangle " + std::to_string(t) + " is not counterclockwise");
        tri_area[t] = 0.5 * twice;
        // grad of hat_k is (opposite edge rotated) / (2 area); for ccw
        // vertices (a,b,c): grad lambda_a = (c-b)^perp / (2A), etc.
        hat_grad[t][0] = (c - b).perp() / twice;
        hat_grad[t][1] = (a - c).perp() / twice;
        hat_grad[t][2] = (b - a).perp() / twice;
    }

    for (const BEdge& e : bedges) {
        if (e.a < 0 || e.a >= nv || e.b < 0 || e.b >= nv)
            throw MeshError("boundary edge index out of range");
        on_boundary[e.a] = 1;
        on_boundary[e.b] = 1;
    }

    vert_tris.assign(nv, {});
    for (int t = 0; t < nt; ++t)
        for (int k = 0; k < 3; ++k) vert_tris[tris[t][k]].push_back(t);

    // chain boundary edges into cycles (each boundary vertex has exactly one
    // outgoing tau-directed edge on a manifold mesh)
    loops.clear();
    loop_tags.clear();
    std::map<int, int> next, edge_tag;
    for (const BEdge& e : bedges) {
        if (next.count(e.a)) throw MeshError("non-manifold boundary at vertex " + std::to_string(e.a));
        next[e.a] = e.b;
        edge_tag[e.a] = e.tag;
    }
    std::map<int, char> used;
    for (const BEdge& e : bedges) {
        if (used.count(e.a)) continue;
        std::vector<int> cyc;
        int tag = edge_tag[e.a];
        int v0 = e.a, v = e.a;
        do {
            cyc.push_back(v);
            used[v] = 1;
            auto it = next.find(v);
            if (it == next.end()) throw MeshError("open boundary chain at vertex " + std::to_string(v));
            v = it->second;
        } while (v != v0);
        loops.push_back(std::move(cyc));
        loop_tags.push_back(tag);
    }
    // deterministic order: by tag, then by smallest vertex index
    std::vector<size_t> order(loops.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](size_t i, size_t j) {
        if (loop_tags[i] != loop_tags[j]) return loop_tags[i] < loop_tags[j];
        return loops[i][0] < loops[j][0];
    });
    std::vector<std::vector<int>> L;
    std::vector<int> T;
    for (size_t i : order) {
        L.push_back(std::move(loops[i]));
        T.push_back(loop_tags[i]);
    }
    loops = std::move(L);
    loop_tags = std::move(T);

    build_grid();
}

void Mesh::build_grid() {
    grid_lo_ = grid_hi_ = verts.empty() ? Vec2{0, 0} : verts[0];
    for (const Vec2& p : verts) {
        grid_lo_.x = std::min(grid_lo_.x, p.x);
        grid_lo_.y = std::min(grid_lo_.y, p.y);
        grid_hi_.x = std::max(grid_hi_.x, p.x);
        grid_hi_.y = std::max(grid_hi_.y, p.y);
    }
    double w = std::max(grid_hi_.x - grid_lo_.x, 1e-12);
    double h = std::max(grid_hi_.y - grid_lo_.y, 1e-12);
    // aim for O(1) triangles per cell away from graded regions
    int target = std::max(8, (int)std::sqrt((double)num_tris()));
    grid_cell_ = std::max(w, h) / target;
    grid_nx_ = std::max(1, (int)std::ceil(w / grid_cell_));
    grid_ny_ = std::max(1, (int)std::ceil(h / grid_cell_));
    grid_cells_.assign((size_t)grid_nx_ * grid_ny_, {});
    for (int t = 0; t < num_tris(); ++t) {
        Vec2 lo = tri_vertex(t, 0), hi = lo;
        for (int k = 1; k < 3; ++k) {
            Vec2 p = tri_vertex(t, k);
            lo.x = std::min(lo.x, p.x);
            lo.y = std::min(lo.y, p.y);
            hi.x = std::max(hi.x, p.x);
            hi.y = std::max(hi.y, p.y);
        }
        int i0 = std::clamp((int)((lo.x - grid_lo_.x) / grid_cell_), 0, grid_nx_ - 1);
        int i1 = std::clamp((int)((hi.x - grid_lo_.x) / grid_cell_), 0, grid_nx_ - 1);
        int j0 = std::clamp((int)((lo.y - grid_lo_.y) / grid_cell_), 0, grid_ny_ - 1);
        int j1 = std::clamp((int)((hi.y - grid_lo_.y) / grid_cell_), 0, grid_ny_ - 1);
        for (int j = j0; j <= j1; ++j)
            for (int i = i0; i <= i1; ++i)
                grid_cells_[(size_t)j * grid_nx_ + i].push_back(t);
    }
}

std::array<double, 3> Mesh::barycentric(int t, const Vec2& p) const {
    Vec2 a = tri_vertex(t, 0), b = tri_vertex(t, 1), c = tri_vertex(t, 2);
    double twice = 2.0 * tri_area[t];
    return {(b - p).cross(c - p) / twice,
            (c - p).cross(a - p) / twice,
            (a - p).cross(b - p) / twice};
}

int Mesh::locate(const Vec2& p) const {
    if (grid_cells_.empty()) return -1;
    // points exactly on the bounding box edge would truncate one cell out
    double tol = 1e-9 * std::max(1.0, grid_cell_ * std::max(grid_nx_, grid_ny_));
    if (p.x < grid_lo_.x - tol || p.x > grid_hi_.x + tol ||
        p.y < grid_lo_.y - tol || p.y > grid_hi_.y + tol)
        return -1;
    int i = std::clamp((int)((p.x - grid_lo_.x) / grid_cell_), 0, grid_nx_ - 1);
    int j = std::clamp((int)((p.y - grid_lo_.y) / grid_cell_), 0, grid_ny_ - 1);
    for (double eps : {0.0, 1e-12, 1e-9}) {
        // scan the 3x3 neighborhood so cell-boundary points cannot slip through
        for (int dj = -1; dj <= 1; ++dj) {
            for (int di = -1; di <= 1; ++di) {
                int ii = i + di, jj = j + dj;
                if (ii < 0 || ii >= grid_nx_ || jj < 0 || jj >= grid_ny_) continue;
                for (int t : grid_cells_[(size_t)jj * grid_nx_ + ii]) {
                    auto l = barycentric(t, p);
                    if (l[0] >= -eps && l[1] >= -eps && l[2] >= -eps) return t;
                }
            }
        }
    }
    return -1;
}

double Mesh::min_angle_deg() const {
    double worst = 180.0;
    for (int t = 0; t < num_tris(); ++t) {
        for (int k = 0; k < 3; ++k) {
            Vec2 u = tri_vertex(t, (k + 1) % 3) - tri_vertex(t, k);
            Vec2 v = tri_vertex(t, (k + 2) % 3) - tri_vertex(t, k);
            double ang = std::atan2(std::abs(u.cross(v)), u.dot(v)) * 180.0 / PI;
            worst = std::min(worst, ang);
        }
    }
    return worst;
}

double Mesh::total_area() const {
    double s = 0.0;
    for (double a : tri_area) s += a;
    return s;
}

// ----------------------------------------------------------------------- IO

void write_mesh(const Mesh& m, std::ostream& os) {
    os << m.num_verts() << ' ' << m.bedges.size() << ' ' << m.num_tris() << '\n';
    for (const Vec2& p : m.verts)
        os << fmt_g17(p.x) << ' ' << fmt_g17(p.y) << '\n';
    for (const auto& t : m.tris)
        os << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
    for (const auto& e : m.bedges)
        os << e.a << ' ' << e.b << ' ' << e.tag << '\n';
}

void write_mesh_file(const Mesh& m, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw Error("cannot write mesh file: " + path);
    write_mesh(m, f);
}

Mesh read_mesh(std::istream& is) {
    Mesh m;
    size_t V, E, T;
    if (!(is >> V >> E >> T)) throw Error("mesh file: bad header");
    m.verts.resize(V);
    for (size_t i = 0; i < V; ++i)
        if (!(is >> m.verts[i].x >> m.verts[i].y)) throw Error("mesh file: bad vertex line");
    m.tris.resize(T);
    for (size_t i = 0; i < T; ++i)
        if (!(is >> m.tris[i][0] >> m.tris[i][1] >> m.tris[i][2]))
            throw Error("mesh file: bad triangle line");
    m.bedges.resize(E);
    for (size_t i = 0; i < E; ++i)
        if (!(is >> m.bedges[i].a >> m.bedges[i].b >> m.bedges[i].tag))
            throw Error("mesh file: bad boundary edge line");
    m.finalize();
    return m;
}

Mesh read_mesh_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw Error("cannot open mesh file: " + path);
    return read_mesh(f);
}

} // namespace vlab
