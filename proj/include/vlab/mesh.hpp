#pragma once

// Triangular meshes: storage, derived P1 quantities (areas, hat-function
// gradients), point location, boundary loops, quality metrics, ASCII IO.
//
// File format: line 1 "V E T"; then V lines "x y"; then T lines "i j k"
// (0-based, counterclockwise); then E lines "i j tag" (boundary edges,
// domain on the left, tag = boundary component index).

#include "vlab/common.hpp"
#include "vlab/geom.hpp"

#include <array>
#include <iosfwd>

namespace vlab {

struct Mesh {
    std::vector<Vec2> verts;
    std::vector<std::array<int, 3>> tris; // counterclockwise

    struct BEdge {
        int a = -1, b = -1; // directed: interior on the left (tau orientation)
        int tag = 0;        // boundary component index (0 = outer)
    };
    std::vector<BEdge> bedges;

    // Grading metadata recorded at build time (not serialized).
    std::vector<double> grading_radius; // per-vertex distance to nearest vortex
    double h_far = 0.0, h_near = 0.0;

    // ---- derived, built by finalize() ----
    std::vector<double> tri_area;
    std::vector<std::array<Vec2, 3>> hat_grad; // gradient of hat fn of local vertex k
    std::vector<char> on_boundary;             // per vertex
    std::vector<std::vector<int>> vert_tris;   // triangles incident to each vertex
    std::vector<std::vector<int>> loops;       // tau-ordered boundary vertex cycles
    std::vector<int> loop_tags;                // component tag per cycle

    void finalize(); // builds everything above + the locate grid; validates orientation

    int num_verts() const { return (int)verts.size(); }
    int num_tris() const { return (int)tris.size(); }

    Vec2 tri_vertex(int t, int k) const { return verts[tris[t][k]]; }
    Vec2 centroid(int t) const {
        return (verts[tris[t][0]] + verts[tris[t][1]] + verts[tris[t][2]]) / 3.0;
    }

    // Containing triangle index, or -1 if outside every triangle. Points on
    // shared edges resolve to the lowest triangle index (deterministic).
    int locate(const Vec2& p) const;

    // Barycentric coordinates of p in triangle t.
    std::array<double, 3> barycentric(int t, const Vec2& p) const;

    double min_angle_deg() const;
    double total_area() const;

private:
    // uniform locate grid over the bbox
    Vec2 grid_lo_, grid_hi_;
    int grid_nx_ = 0, grid_ny_ = 0;
    double grid_cell_ = 0.0;
    std::vector<std::vector<int>> grid_cells_;
    void build_grid();
};

void write_mesh(const Mesh& m, std::ostream& os);
void write_mesh_file(const Mesh& m, const std::string& path);
Mesh read_mesh(std::istream& is);
Mesh read_mesh_file(const std::string& path);

// ------------------------------------------------------------------ mesher

struct MeshParams {
    double h_far = 0.06;
    double h_near = 0.0;    // <= 0 means h_far / 20
    double grading = 0.3;   // local size ~ grading * distance to nearest vortex
    int smoothing_passes = 2;
    double min_angle_deg = 20.0; // quality gate, MeshError below this
};

// Graded Delaunay mesh: local target size
//   h(x) = clamp(grading * dist(x, nearest vortex), h_near, h_far),
// every vortex strictly interior to a dedicated small triangle (never a
// vertex), boundary loops resolved at the local target size.
Mesh build_graded_mesh(const Domain& dom, const std::vector<Vec2>& vortices,
                       const MeshParams& params = {});

} // namespace vlab
