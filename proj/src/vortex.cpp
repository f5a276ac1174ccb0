#include "vlab/vortex.hpp"

namespace vlab {

double VortexConfig::min_separation() const {
    double m = 1e300;
    for (size_t i = 0; i < points.size(); ++i)
        for (size_t j = i + 1; j < points.size(); ++j)
            m = std::min(m, dist(points[i], points[j]));
    return m;
}

double VortexConfig::boundary_clearance(const Domain& dom) const {
    double m = 1e300;
    for (const Vec2& p : points) m = std::min(m, dom.dist_to_boundary(p));
    return m;
}

void VortexConfig::validate(const Domain& dom) const {
    if (points.empty()) throw InvalidConfig("need at least one vortex");
    if (points.size() != degrees.size())
        throw InvalidConfig("one degree per vortex point required");
    for (const Vec2& p : points)
        if (!dom.inside(p)) throw InvalidConfig("vortex on or outside the boundary");
    if (min_separation() < 1e-12) throw InvalidConfig("coincident vortex points");
    for (int d : degrees)
        if (d == 0) throw InvalidConfig("vortex degrees must be nonzero");
}

bool check_compatibility(const Domain& dom, const BoundaryDatum& bd, const VortexConfig& cfg) {
    int rhs = cfg.total_degree();
    for (int l = 1; l < dom.num_loops(); ++l) rhs += bd.winding(l);
    return bd.winding(0) == rhs;
}

namespace {

// z^s for integer s by repeated multiplication (|s| small)
std::complex<double> ipow(std::complex<double> z, int s) {
    std::complex<double> r{1.0, 0.0};
    int a = std::abs(s);
    for (int k = 0; k < a; ++k) r *= z;
    return s >= 0 ? r : std::complex<double>{1.0, 0.0} / r;
}

std::complex<double> unit_toward(const Vec2& from_c, const Vec2& x) {
    Vec2 d = x - from_c;
    double n = d.norm();
    return {d.x / n, d.y / n};
}

} // namespace

CanonicalMap build_canonical_map(std::shared_ptr<const Mesh> mesh, const Domain& dom,
                                 const BoundaryDatum& bd, const VortexConfig& cfg) {
    cfg.validate(dom);
    if (!check_compatibility(dom, bd, cfg))
        throw IncompatibleDegrees("boundary winding does not match the vortex degrees");

    CanonicalMap cm;
    cm.mesh = mesh;
    cm.op = std::make_shared<LaplaceOp>(mesh);
    cm.domain = dom;
    cm.datum = bd;
    cm.config = cfg;
    for (int j = 0; j < cfg.n(); ++j)
        cm.charges.push_back({cfg.points[j], (double)cfg.degrees[j]});
    auto anchors = dom.anchors();
    for (size_t l = 0; l < anchors.size(); ++l)
        cm.charges.push_back({anchors[l], (double)bd.winding((int)l + 1)});

    // boundary residual: arg( g * prod_m unit(x - c_m)^{-s_m} ), unwrapped
    // along each tau-ordered loop, starting value pinned to (-pi, pi]
    const Mesh& m = *mesh;
    cm.boundary_phase = Eigen::VectorXd::Zero(m.num_verts());
    for (size_t li = 0; li < m.loops.size(); ++li) {
        const auto& cyc = m.loops[li];
        int tag = m.loop_tags[li];
        std::vector<double> raw(cyc.size());
        for (size_t k = 0; k < cyc.size(); ++k) {
            const Vec2& v = m.verts[cyc[k]];
            double t = dom.loop_param(tag, v);
            std::complex<double> z = bd.value(tag, t);
            for (const Charge& ch : cm.charges)
                z *= ipow(unit_toward(ch.c, v), -(int)std::lround(ch.s));
            raw[k] = std::arg(z);
        }
        auto lift = unwrap_phase(raw);
        // closure: residual winding must vanish, otherwise the lift is not a
        // function on the loop
        double gap = wrap_angle(raw[0] - raw[raw.size() - 1]);
        double total = (lift[lift.size() - 1] + gap) - lift[0];
        if (std::lround(total / TWO_PI) != 0)
            throw IncompatibleDegrees("residual phase winds around a boundary loop");
        for (size_t k = 0; k < cyc.size(); ++k) cm.boundary_phase[cyc[k]] = lift[k];
    }

    cm.phi = cm.op->solve_dirichlet(cm.boundary_phase);
    return cm;
}

std::complex<double> CanonicalMap::value(const Vec2& p) const {
    double ph = phi.eval(p);
    std::complex<double> u{std::cos(ph), std::sin(ph)};
    for (const Charge& ch : charges)
        u *= ipow(unit_toward(ch.c, p), (int)std::lround(ch.s));
    return u;
}

CanonicalMap transport_config(const CanonicalMap& base, const std::vector<Vec2>& new_points) {
    if (new_points.size() != base.config.points.size())
        throw InvalidConfig("transport: vortex count changed");

    VortexConfig moved = base.config;
    moved.points = new_points;
    moved.validate(base.domain);

    double step = 0.0;
    for (size_t j = 0; j < new_points.size(); ++j)
        step = std::max(step, dist(new_points[j], base.config.points[j]));
    double guard = 0.5 * std::min(std::min(base.config.min_separation(), moved.min_separation()),
                                  std::min(base.config.boundary_clearance(base.domain),
                                           moved.boundary_clearance(base.domain)));
    if (step >= guard)
        throw TransportTooFar("transport step " + fmt_g17(step) + " exceeds guard " + fmt_g17(guard));

    const Mesh& m = *base.mesh;
    Eigen::VectorXd bvals = base.boundary_phase;
    for (size_t li = 0; li < m.loops.size(); ++li) {
        const auto& cyc = m.loops[li];
        std::vector<double> raw(cyc.size());
        for (size_t k = 0; k < cyc.size(); ++k) {
            const Vec2& v = m.verts[cyc[k]];
            std::complex<double> z{1.0, 0.0};
            for (size_t j = 0; j < new_points.size(); ++j) {
                int d = base.config.degrees[j];
                z *= ipow(unit_toward(base.config.points[j], v) *
                              std::conj(unit_toward(new_points[j], v)),
                          d);
            }
            raw[k] = std::arg(z);
        }
        std::vector<double> lift;
        try {
            lift = unwrap_phase(raw);
        } catch (const AmbiguousLift&) {
            throw TransportTooFar("boundary phase correction jump too large to lift");
        }
        double gap = wrap_angle(raw[0] - raw[raw.size() - 1]);
        if (std::lround((lift[lift.size() - 1] + gap - lift[0]) / TWO_PI) != 0)
            throw TransportTooFar("boundary phase correction has nonzero winding");
        for (size_t k = 0; k < cyc.size(); ++k) bvals[cyc[k]] += lift[k];
    }

    CanonicalMap out;
    out.mesh = base.mesh;
    out.op = base.op; // factorization reuse: transports cost one back-substitution
    out.domain = base.domain;
    out.datum = base.datum;
    out.config = moved;
    out.charges = base.charges;
    for (int j = 0; j < moved.n(); ++j) out.charges[j].c = new_points[j];
    out.boundary_phase = bvals;
    out.phi = out.op->solve_dirichlet(bvals);
    return out;
}

// ---------------------------------------------------------------- currents

Vec2 singular_current(const std::vector<Charge>& charges, const Vec2& p) {
    Vec2 s{0, 0};
    for (const Charge& ch : charges) s += ch.s * log_kernel(p, ch.c);
    return s;
}

CurrentField current_field(const CanonicalMap& cm, const ScalarField* extra_phase) {
    CurrentField f;
    f.mesh = cm.mesh;
    f.charges = cm.charges;
    const Mesh& m = *cm.mesh;
    f.tri_grad.resize(m.num_tris());
    f.tri_mean.resize(m.num_tris());
    for (int t = 0; t < m.num_tris(); ++t) {
        Vec2 g = cm.phi.grad_tri(t);
        if (extra_phase) g += extra_phase->grad_tri(t);
        f.tri_grad[t] = g;
        TriXY T{m.tri_vertex(t, 0), m.tri_vertex(t, 1), m.tri_vertex(t, 2)};
        Vec2 s{0, 0};
        for (const Charge& ch : f.charges) s += ch.s * tri_int_kernel(T, ch.c);
        f.tri_mean[t] = g + s / m.tri_area[t];
    }
    return f;
}

Vec2 CurrentField::eval_in_tri(int t, const Vec2& p) const {
    for (const Charge& ch : charges)
        if (dist(p, ch.c) < 1e-12)
            throw SingularPoint("current evaluated at a vortex center");
    return tri_grad[t] + singular_current(charges, p);
}

Vec2 CurrentField::eval(const Vec2& p) const {
    int t = mesh->locate(p);
    if (t < 0) throw OutOfDomain("current evaluation outside the mesh");
    return eval_in_tri(t, p);
}

Vec2 CurrentField::regular_part_at(const Vec2& p) const {
    int t = mesh->locate(p);
    if (t < 0) throw OutOfDomain("current evaluation outside the mesh");
    size_t nearest = 0;
    double best = 1e300;
    for (size_t m = 0; m < charges.size(); ++m) {
        double d = dist(p, charges[m].c);
        if (d < best) { best = d; nearest = m; }
    }
    Vec2 v = tri_grad[t];
    for (size_t m = 0; m < charges.size(); ++m)
        if (m != nearest) v += charges[m].s * log_kernel(p, charges[m].c);
    return v;
}

double circulation(const CurrentField& f, const Vec2& center, double radius, int npts) {
    for (const Charge& ch : f.charges)
        if (std::abs(dist(center, ch.c) - radius) < 1e-12)
            throw SingularPoint("circulation circle passes through a vortex");
    double acc = 0.0;
    for (int k = 0; k < npts; ++k) {
        double a = TWO_PI * k / npts;
        Vec2 x = center + radius * Vec2{std::cos(a), std::sin(a)};
        Vec2 tau{-std::sin(a), std::cos(a)};
        acc += f.eval(x).dot(tau);
    }
    return acc * TWO_PI * radius / npts;
}

} // namespace vlab
