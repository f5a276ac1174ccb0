#include "vlab/geom.hpp"

#include <algorithm>

namespace vlab {

Domain Domain::disk(double r) {
    if (!(r > 0.0)) throw InvalidDomain("disk radius must be positive");
    Domain d;
    d.kind = Kind::Disk;
    d.radius = r;
    return d;
}

Domain Domain::annulus(double r_inner, double r_outer) {
    if (!(r_inner > 0.0 && r_inner < r_outer))
        throw InvalidDomain("annulus needs 0 < r_inner < r_outer");
    Domain d;
    d.kind = Kind::Annulus;
    d.radius = r_outer;
    d.inner_radius = r_inner;
    return d;
}

Domain Domain::polygon(std::vector<Vec2> verts) {
    if (verts.size() < 3) throw InvalidDomain("polygon needs at least 3 vertices");
    // signed area: must be counterclockwise and non-degenerate
    double a2 = 0.0;
    for (size_t i = 0; i < verts.size(); ++i) {
        const Vec2& p = verts[i];
        const Vec2& q = verts[(i + 1) % verts.size()];
        a2 += p.cross(q);
    }
    if (!(std::abs(a2) > 1e-12)) throw InvalidDomain("degenerate polygon");
    if (a2 < 0.0) std::reverse(verts.begin(), verts.end());
    Domain d;
    d.kind = Kind::Polygon;
    d.poly = std::move(verts);
    d.build_poly_cache();
    return d;
}

void Domain::build_poly_cache() {
    cumlen_.assign(poly.size() + 1, 0.0);
    for (size_t i = 0; i < poly.size(); ++i)
        cumlen_[i + 1] = cumlen_[i] + dist(poly[i], poly[(i + 1) % poly.size()]);
}

bool Domain::inside(const Vec2& p) const {
    switch (kind) {
    case Kind::Disk:
        return p.norm() < radius;
    case Kind::Annulus: {
        double r = p.norm();
        return r > inner_radius && r < radius;
    }
    case Kind::Polygon: {
        // crossing-number test
        bool in = false;
        size_t n = poly.size();
        for (size_t i = 0, j = n - 1; i < n; j = i++) {
            if ((poly[i].y > p.y) != (poly[j].y > p.y)) {
                double xc = poly[j].x + (poly[i].x - poly[j].x) * (p.y - poly[j].y) / (poly[i].y - poly[j].y);
                if (p.x < xc) in = !in;
            }
        }
        return in;
    }
    }
    return false;
}

static double point_segment_dist(const Vec2& p, const Vec2& a, const Vec2& b) {
    Vec2 ab = b - a;
    double tt = ab.norm2() > 0.0 ? std::clamp((p - a).dot(ab) / ab.norm2(), 0.0, 1.0) : 0.0;
    return dist(p, a + tt * ab);
}

double Domain::dist_to_boundary(const Vec2& p) const {
    switch (kind) {
    case Kind::Disk:
        return std::abs(radius - p.norm());
    case Kind::Annulus: {
        double r = p.norm();
        return std::min(std::abs(radius - r), std::abs(r - inner_radius));
    }
    case Kind::Polygon: {
        double d = 1e300;
        for (size_t i = 0; i < poly.size(); ++i)
            d = std::min(d, point_segment_dist(p, poly[i], poly[(i + 1) % poly.size()]));
        return d;
    }
    }
    return 0.0;
}

Vec2 Domain::loop_point(int loop, double t) const {
    t -= std::floor(t);
    switch (kind) {
    case Kind::Disk:
        if (loop != 0) throw InvalidDomain("disk has a single boundary loop");
        return {radius * std::cos(TWO_PI * t), radius * std::sin(TWO_PI * t)};
    case Kind::Annulus: {
        double r = (loop == 0) ? radius : inner_radius;
        if (loop < 0 || loop > 1) throw InvalidDomain("annulus has loops 0 and 1");
        return {r * std::cos(TWO_PI * t), r * std::sin(TWO_PI * t)};
    }
    case Kind::Polygon: {
        if (loop != 0) throw InvalidDomain("polygon has a single boundary loop");
        double s = t * cumlen_.back();
        size_t i = size_t(std::upper_bound(cumlen_.begin(), cumlen_.end(), s) - cumlen_.begin());
        i = std::min(std::max<size_t>(i, 1), poly.size()) - 1;
        double seg = cumlen_[i + 1] - cumlen_[i];
        double u = seg > 0.0 ? (s - cumlen_[i]) / seg : 0.0;
        return poly[i] + u * (poly[(i + 1) % poly.size()] - poly[i]);
    }
    }
    return {};
}

double Domain::loop_length(int loop) const {
    switch (kind) {
    case Kind::Disk:
        (void)loop;
        return TWO_PI * radius;
    case Kind::Annulus:
        return TWO_PI * (loop == 0 ? radius : inner_radius);
    case Kind::Polygon:
        return cumlen_.back();
    }
    return 0.0;
}

double Domain::loop_param(int loop, const Vec2& p) const {
    switch (kind) {
    case Kind::Disk:
    case Kind::Annulus: {
        double t = std::atan2(p.y, p.x) / TWO_PI;
        return t - std::floor(t);
    }
    case Kind::Polygon: {
        // nearest segment, arclength fraction
        double best = 1e300, s_best = 0.0;
        for (size_t i = 0; i < poly.size(); ++i) {
            const Vec2& a = poly[i];
            const Vec2& b = poly[(i + 1) % poly.size()];
            Vec2 ab = b - a;
            double u = ab.norm2() > 0.0 ? std::clamp((p - a).dot(ab) / ab.norm2(), 0.0, 1.0) : 0.0;
            double d = dist(p, a + u * ab);
            if (d < best) {
                best = d;
                s_best = cumlen_[i] + u * (cumlen_[i + 1] - cumlen_[i]);
            }
        }
        double t = s_best / cumlen_.back();
        return t - std::floor(t);
    }
    }
    return 0.0;
}

std::vector<Vec2> Domain::anchors() const {
    if (kind == Kind::Annulus) return {Vec2{0.0, 0.0}};
    return {};
}

void Domain::bbox(Vec2& lo, Vec2& hi) const {
    switch (kind) {
    case Kind::Disk:
    case Kind::Annulus:
        lo = {-radius, -radius};
        hi = {radius, radius};
        return;
    case Kind::Polygon: {
        lo = hi = poly[0];
        for (const Vec2& p : poly) {
            lo.x = std::min(lo.x, p.x);
            lo.y = std::min(lo.y, p.y);
            hi.x = std::max(hi.x, p.x);
            hi.y = std::max(hi.y, p.y);
        }
        return;
    }
    }
}

// ------------------------------------------------------------- boundary data

double LoopDatum::phase(double t) const {
    double ph = TWO_PI * winding * t + phase0;
    for (size_t k = 0; k < cos_coef.size(); ++k)
        ph += cos_coef[k] * std::cos(TWO_PI * (k + 1) * t);
    for (size_t k = 0; k < sin_coef.size(); ++k)
        ph += sin_coef[k] * std::sin(TWO_PI * (k + 1) * t);
    return ph;
}

double LoopDatum::dphase_dt(double t) const {
    double d = TWO_PI * winding;
    for (size_t k = 0; k < cos_coef.size(); ++k)
        d -= cos_coef[k] * TWO_PI * (k + 1) * std::sin(TWO_PI * (k + 1) * t);
    for (size_t k = 0; k < sin_coef.size(); ++k)
        d += sin_coef[k] * TWO_PI * (k + 1) * std::cos(TWO_PI * (k + 1) * t);
    return d;
}

double BoundaryDatum::phase_speed_tau(const Domain& dom, int loop, double t) const {
    double ds_dt = dom.loop_length(loop); // uniform-speed parameterizations
    double v = loops.at(loop).dphase_dt(t) / ds_dt;
    return loop == 0 ? v : -v; // tau runs clockwise (against t) on holes
}

BoundaryDatum winding_datum(const Domain& dom, std::vector<int> windings) {
    if ((int)windings.size() != dom.num_loops())
        throw InvalidConfig("winding_datum: one winding per boundary loop required");
    BoundaryDatum bd;
    for (int w : windings) {
        LoopDatum ld;
        ld.winding = w;
        bd.loops.push_back(ld);
    }
    return bd;
}

} // namespace vlab
