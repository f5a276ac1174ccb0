#include "vlab/singular.hpp"
#include "vlab/mesh.hpp"

namespace vlab {

bool point_in_tri(const TriXY& T, const Vec2& p) {
    double d0 = (T[1] - T[0]).cross(p - T[0]);
    double d1 = (T[2] - T[1]).cross(p - T[1]);
    double d2 = (T[0] - T[2]).cross(p - T[2]);
    return d0 > 0.0 && d1 > 0.0 && d2 > 0.0; // strict, ccw
}

double tri_area(const TriXY& T) {
    return 0.5 * (T[1] - T[0]).cross(T[2] - T[0]);
}

namespace {

double point_segment_dist(const Vec2& p, const Vec2& a, const Vec2& b) {
    Vec2 ab = b - a;
    double tt = ab.norm2() > 0.0 ? std::clamp((p - a).dot(ab) / ab.norm2(), 0.0, 1.0) : 0.0;
    return dist(p, a + tt * ab);
}

// adaptive edge integration: bisect while a relevant center is closer than
// ~0.7 of the sub-edge length; 20-pt Gauss on the leaves is then accurate to
// near machine precision (Bernstein ellipse argument)
template <class F>
void edge_adaptive(const Vec2& a, const Vec2& b, const std::vector<Vec2>& near_pts,
                   int depth, const F& leaf) {
    double len = dist(a, b);
    bool split = false;
    if (depth < 10) {
        for (const Vec2& c : near_pts)
            if (point_segment_dist(c, a, b) < 0.7 * len) { split = true; break; }
    }
    if (split) {
        Vec2 mid = 0.5 * (a + b);
        edge_adaptive(a, mid, near_pts, depth + 1, leaf);
        edge_adaptive(mid, b, near_pts, depth + 1, leaf);
    } else {
        leaf(a, b);
    }
}

} // namespace

Vec2 tri_int_kernel(const TriXY& T, const Vec2& c) {
    Vec2 acc{0, 0};
    for (int e = 0; e < 3; ++e) {
        const Vec2 &a = T[e], &b = T[(e + 1) % 3];
        edge_adaptive(a, b, {c}, 0, [&](const Vec2& p, const Vec2& q) {
            Vec2 tau = (q - p).normalized();
            double s = integrate_segment(p, q, 20, [&](const Vec2& x) {
                return std::log(dist(x, c));
            });
            acc += s * tau;
        });
    }
    return acc;
}

double tri_int_kk(const TriXY& T, const Vec2& ci_, const Vec2& cj_) {
    Vec2 ci = ci_, cj = cj_;
    bool same = (ci - cj).norm2() == 0.0;
    bool i_in = point_in_tri(T, ci), j_in = point_in_tri(T, cj);
    if (same && (i_in || j_in))
        throw SingularPoint("tri_int_kk: |K|^2 with the center inside the triangle diverges");
    if (i_in && j_in)
        throw SingularPoint("tri_int_kk: both centers inside one triangle");
    if (i_in) std::swap(ci, cj); // put the interior center in the d_nu slot

    double acc = 0.0;
    for (int e = 0; e < 3; ++e) {
        const Vec2 &a = T[e], &b = T[(e + 1) % 3];
        edge_adaptive(a, b, {ci, cj}, 0, [&](const Vec2& p, const Vec2& q) {
            Vec2 tau = (q - p).normalized();
            Vec2 nu{tau.y, -tau.x}; // outward for ccw triangles
            acc += integrate_segment(p, q, 20, [&](const Vec2& x) {
                Vec2 dj = x - cj;
                return std::log(dist(x, ci)) * dj.dot(nu) / dj.norm2();
            });
        });
    }
    if (point_in_tri(T, cj)) acc -= TWO_PI * std::log(dist(ci, cj));
    return acc;
}

double tri_int_current_sq(const TriXY& T, const Vec2& R, const std::vector<Charge>& charges) {
    double A = tri_area(T);
    double acc = R.norm2() * A;
    for (size_t m = 0; m < charges.size(); ++m) {
        if (point_in_tri(T, charges[m].c))
            throw SingularPoint("tri_int_current_sq: charge inside the triangle");
        acc += 2.0 * charges[m].s * R.dot(tri_int_kernel(T, charges[m].c));
        for (size_t mm = 0; mm < charges.size(); ++mm) {
            double w = charges[m].s * charges[mm].s;
            if (mm == m)
                acc += w * tri_int_kk(T, charges[m].c, charges[m].c);
            else if (mm > m)
                acc += 2.0 * w * tri_int_kk(T, charges[m].c, charges[mm].c);
        }
    }
    return acc;
}

double ring_integrate(const Vec2& c, double r_lo, double r_hi,
                      const std::function<double(const Vec2&)>& f,
                      int n_theta, int panels, int gauss) {
    if (!(r_lo > 0.0 && r_hi > r_lo)) throw BadRadius("ring_integrate: need 0 < r_lo < r_hi");
    const GaussRule& gr = gauss_legendre(gauss);
    double ratio = std::pow(r_hi / r_lo, 1.0 / panels);
    double acc = 0.0;
    for (int p = 0; p < panels; ++p) {
        double a = r_lo * std::pow(ratio, p), b = a * ratio;
        for (size_t q = 0; q < gr.nodes.size(); ++q) {
            double r = 0.5 * (a + b) + 0.5 * (b - a) * gr.nodes[q];
            double wr = 0.5 * (b - a) * gr.weights[q] * r; // polar Jacobian
            double ft = 0.0;
            for (int k = 0; k < n_theta; ++k) {
                double th = TWO_PI * (k + 0.5) / n_theta;
                ft += f(c + r * Vec2{std::cos(th), std::sin(th)});
            }
            acc += wr * ft * TWO_PI / n_theta;
        }
    }
    return acc;
}

Vec2 ring_integrate_vec(const Vec2& c, double r_lo, double r_hi,
                        const std::function<Vec2(const Vec2&)>& f,
                        int n_theta, int panels, int gauss) {
    if (!(r_lo > 0.0 && r_hi > r_lo)) throw BadRadius("ring_integrate_vec: need 0 < r_lo < r_hi");
    const GaussRule& gr = gauss_legendre(gauss);
    double ratio = std::pow(r_hi / r_lo, 1.0 / panels);
    Vec2 acc{0, 0};
    for (int p = 0; p < panels; ++p) {
        double a = r_lo * std::pow(ratio, p), b = a * ratio;
        for (size_t q = 0; q < gr.nodes.size(); ++q) {
            double r = 0.5 * (a + b) + 0.5 * (b - a) * gr.nodes[q];
            double wr = 0.5 * (b - a) * gr.weights[q] * r;
            Vec2 ft{0, 0};
            for (int k = 0; k < n_theta; ++k) {
                double th = TWO_PI * (k + 0.5) / n_theta;
                ft += f(c + r * Vec2{std::cos(th), std::sin(th)});
            }
            acc += (wr * TWO_PI / n_theta) * ft;
        }
    }
    return acc;
}

// ----------------------------------------------------- masked-region helpers

double tri_dist(const TriXY& T, const Vec2& p) {
    if (point_in_tri(T, p)) return 0.0;
    double best = 1e300;
    for (int k = 0; k < 3; ++k) {
        Vec2 a = T[k], b = T[(k + 1) % 3];
        Vec2 ab = b - a;
        double s = std::clamp((p - a).dot(ab) / ab.norm2(), 0.0, 1.0);
        best = std::min(best, dist(p, a + s * ab));
    }
    return best;
}

DiskMask classify_against_disks(const TriXY& T, const std::vector<Vec2>& centers,
                                double rho, int* which) {
    for (size_t j = 0; j < centers.size(); ++j) {
        if (tri_dist(T, centers[j]) >= rho) continue; // clear of this disk
        double hi = 0.0;
        for (const Vec2& v : T) hi = std::max(hi, dist(v, centers[j]));
        if (hi <= rho) return DiskMask::Inside;
        if (which) *which = (int)j;
        return DiskMask::Straddle; // disks are disjoint at these radii
    }
    return DiskMask::Outside;
}

std::pair<double, Vec2> clip_halfplane(const TriXY& T, const Vec2& a, const Vec2& n) {
    Vec2 poly[7];
    int np = 0;
    for (int k = 0; k < 3; ++k) {
        Vec2 p = T[k], q = T[(k + 1) % 3];
        double dp = (p - a).dot(n), dq = (q - a).dot(n);
        if (dp >= 0) poly[np++] = p;
        if ((dp > 0 && dq < 0) || (dp < 0 && dq > 0)) poly[np++] = p + (dp / (dp - dq)) * (q - p);
    }
    double area = 0.0;
    Vec2 cen{0.0, 0.0};
    for (int k = 1; k + 1 < np; ++k) {
        double s = 0.5 * (poly[k] - poly[0]).cross(poly[k + 1] - poly[0]);
        area += s;
        cen += (s / 3.0) * (poly[0] + poly[k] + poly[k + 1]);
    }
    if (area > 0.0) cen = cen / area;
    return {area, cen};
}

namespace {

// degree-4 symmetric triangle rule (6 points, weights sum to 1)
struct TriRule {
    double w, l1;
};
constexpr TriRule kDeg4[] = {{0.223381589678011, 0.108103018168070},
                             {0.109951743655322, 0.816847572980459}};

template <class F>
double tri_rule_deg4(const TriXY& T, F&& f) {
    double area = tri_area(T), acc = 0.0;
    for (const TriRule& r : kDeg4) {
        double l2 = 0.5 * (1.0 - r.l1);
        for (int rot = 0; rot < 3; ++rot) {
            double l[3] = {l2, l2, l2};
            l[rot] = r.l1;
            acc += r.w * f(l[0] * T[0] + l[1] * T[1] + l[2] * T[2]);
        }
    }
    return area * acc;
}

double masked_quad_rec(const TriXY& T, int root, const std::vector<Vec2>& centers, double rho,
                       const std::function<double(int, const Vec2&)>& f, int depth) {
    int which = -1;
    DiskMask m = classify_against_disks(T, centers, rho, &which);
    if (m == DiskMask::Inside) return 0.0;
    if (m == DiskMask::Outside)
        return tri_rule_deg4(T, [&](const Vec2& p) { return f(root, p); });
    if (depth >= 6) {
        Vec2 c = centers[which];
        Vec2 g = (T[0] + T[1] + T[2]) / 3.0 - c;
        Vec2 nhat = g / g.norm();
        auto [area, cen] = clip_halfplane(T, c + rho * nhat, nhat);
        return area > 0.0 ? area * f(root, cen) : 0.0;
    }
    Vec2 m01 = 0.5 * (T[0] + T[1]), m12 = 0.5 * (T[1] + T[2]), m20 = 0.5 * (T[2] + T[0]);
    return masked_quad_rec({T[0], m01, m20}, root, centers, rho, f, depth + 1) +
           masked_quad_rec({m01, T[1], m12}, root, centers, rho, f, depth + 1) +
           masked_quad_rec({m20, m12, T[2]}, root, centers, rho, f, depth + 1) +
           masked_quad_rec({m01, m12, m20}, root, centers, rho, f, depth + 1);
}

} // namespace

double masked_quadrature(const Mesh& mesh, const std::vector<Vec2>& centers, double rho,
                         const std::function<double(int, const Vec2&)>& f) {
    std::vector<double> per_tri(mesh.num_tris());
    for (int t = 0; t < mesh.num_tris(); ++t) {
        TriXY T{mesh.tri_vertex(t, 0), mesh.tri_vertex(t, 1), mesh.tri_vertex(t, 2)};
        per_tri[t] = masked_quad_rec(T, t, centers, rho, f, 0);
    }
    double s = 0.0;
    for (double v : per_tri) s += v; // fixed order
    return s;
}

} // namespace vlab
