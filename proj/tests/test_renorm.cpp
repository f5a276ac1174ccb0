#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "vlab/renorm.hpp"

#include <complex>

using namespace vlab;

namespace {

CanonicalMap disk_map(const std::vector<Vec2>& pts, const std::vector<int>& degs,
                      int boundary_winding, double h_far = 0.06) {
    Domain dom = Domain::disk();
    MeshParams P;
    P.h_far = h_far;
    auto mesh = std::make_shared<const Mesh>(build_graded_mesh(dom, pts, P));
    return build_canonical_map(mesh, dom, winding_datum(dom, {boundary_winding}),
                               VortexConfig{pts, degs});
}

// closed form on the unit disk with datum e^{i n theta}, all via images:
//   W = -2 pi sum_{i != j} d_i d_j ln|z_i - z_j| - 2 pi sum_{j,k} d_j d_k ln|1 - conj(z_k) z_j|
double disk_W_exact(const std::vector<std::complex<double>>& z, const std::vector<int>& d) {
    double W = 0.0;
    for (size_t i = 0; i < z.size(); ++i)
        for (size_t j = 0; j < z.size(); ++j) {
            if (i != j) W -= TWO_PI * d[i] * d[j] * std::log(std::abs(z[i] - z[j]));
            W -= TWO_PI * d[i] * d[j] * std::log(std::abs(1.0 - std::conj(z[j]) * z[i]));
        }
    return W;
}

std::vector<Vec2> disk_gradW_exact(const std::vector<std::complex<double>>& z,
                                   const std::vector<int>& d) {
    std::vector<Vec2> g(z.size());
    for (size_t m = 0; m < z.size(); ++m) {
        std::complex<double> s{0.0, 0.0};
        for (size_t i = 0; i < z.size(); ++i) {
            if (i != m) s += double(d[i]) / std::conj(z[m] - z[i]); // (z_m-z_i)/|.|^2
            s += double(d[i]) * std::conj(-std::conj(z[i]) / (1.0 - std::conj(z[i]) * z[m]));
        }
        s *= -4.0 * PI * double(d[m]);
        g[m] = {s.real(), s.imag()};
    }
    return g;
}

double rel_vec_err(const std::vector<Vec2>& a, const std::vector<Vec2>& b) {
    double num = 0.0, den = 0.0;
    for (size_t j = 0; j < a.size(); ++j) {
        num = std::max(num, (a[j] - b[j]).norm());
        den = std::max(den, b[j].norm());
    }
    return num / std::max(den, 1e-12);
}

} // namespace

TEST_CASE("single off-center vortex on the disk: both routes hit the closed form") {
    Vec2 a{0.3, 0.0};
    CanonicalMap cm = disk_map({a}, {1}, 1);
    double W_exact = -TWO_PI * std::log(1.0 - a.norm2());

    GreenResult gr = renorm_energy_green(cm);
    CAPTURE(gr.pair_term);
    CAPTURE(gr.boundary_term);
    CAPTURE(gr.self_term);
    // regular part of the potential at the vortex: ln(1 - |a|^2), mean-zero gauge
    CHECK(gr.h_at_vortex[0] == doctest::Approx(std::log(1.0 - a.norm2())).epsilon(0.05));
    CHECK(std::abs(gr.h_at_vortex[0] - std::log(1.0 - a.norm2())) < 5e-3);
    CHECK(std::abs(gr.W - W_exact) < 8e-3);

    RhoLimitResult rr = renorm_energy_rho(cm);
    CAPTURE(rr.W_rho);
    CAPTURE(rr.slope);
    CAPTURE(rr.curv);
    CHECK(rr.fit_residual < 2e-3);
    CHECK(std::abs(rr.W - W_exact) < 1.5e-2);

    // the acceptance bar for route agreement
    CHECK(std::abs(rr.W - gr.W) / (1.0 + std::abs(gr.W)) < 1e-2);
}

TEST_CASE("gradient triple agreement against the closed form, one vortex") {
    Vec2 a{0.3, 0.12};
    CanonicalMap cm = disk_map({a}, {1}, 1);
    std::vector<Vec2> exact{4.0 * PI / (1.0 - a.norm2()) * a};

    std::vector<Vec2> g_phase = grad_w_phase(cm);
    std::vector<Vec2> g_green = grad_w_green(cm);
    std::vector<Vec2> g_fd = grad_w_fd(cm);
    CAPTURE(g_phase[0].x);
    CAPTURE(g_phase[0].y);
    CAPTURE(g_green[0].x);
    CAPTURE(g_fd[0].x);

    CHECK(rel_vec_err(g_phase, exact) < 2.5e-2);
    CHECK(rel_vec_err(g_green, exact) < 2.5e-2);
    CHECK(rel_vec_err(g_fd, exact) < 2.5e-2);
    CHECK(rel_vec_err(g_phase, g_green) < 2e-2);
    CHECK(rel_vec_err(g_phase, g_fd) < 2e-2);
    CHECK(rel_vec_err(g_green, g_fd) < 2e-2);
}

TEST_CASE("two vortices on the disk against the image series") {
    std::vector<Vec2> pts{{0.5, 0.0}, {-0.4, 0.1}};
    std::vector<int> degs{1, 1};
    std::vector<std::complex<double>> z{{0.5, 0.0}, {-0.4, 0.1}};
    CanonicalMap cm = disk_map(pts, degs, 2);

    double W_exact = disk_W_exact(z, degs);
    GreenResult gr = renorm_energy_green(cm);
    RhoLimitResult rr = renorm_energy_rho(cm);
    CAPTURE(W_exact);
    CAPTURE(gr.W);
    CAPTURE(rr.W);
    CHECK(std::abs(gr.W - W_exact) < 1.2e-2);
    CHECK(std::abs(rr.W - W_exact) < 2e-2);
    CHECK(std::abs(rr.W - gr.W) / (1.0 + std::abs(gr.W)) < 1e-2);

    std::vector<Vec2> exact = disk_gradW_exact(z, degs);
    CHECK(rel_vec_err(grad_w_phase(cm), exact) < 2.5e-2);
    CHECK(rel_vec_err(grad_w_green(cm), exact) < 2.5e-2);
}

TEST_CASE("annulus: the two routes agree without a closed form") {
    Domain dom = Domain::annulus(0.35);
    std::vector<Vec2> pts{{0.7, 0.0}};
    MeshParams P;
    P.h_far = 0.06;
    auto mesh = std::make_shared<const Mesh>(build_graded_mesh(dom, pts, P));
    CanonicalMap cm = build_canonical_map(mesh, dom, winding_datum(dom, {2, 1}),
                                          VortexConfig{pts, {1}});

    GreenResult gr = renorm_energy_green(cm);
    RhoLimitResult rr = renorm_energy_rho(cm);
    CAPTURE(gr.W);
    CAPTURE(gr.flow_term);
    CAPTURE(gr.gamma);
    CAPTURE(rr.W);
    CHECK(std::abs(rr.W - gr.W) / (1.0 + std::abs(gr.W)) < 1.5e-2);
    // the hole flow must be active in this configuration
    CHECK(std::abs(gr.gamma) > 1e-3);
}

TEST_CASE("global phase shifts of the datum do not move the energy") {
    Domain dom = Domain::disk();
    std::vector<Vec2> pts{{0.25, -0.2}};
    MeshParams P;
    P.h_far = 0.07;
    auto mesh = std::make_shared<const Mesh>(build_graded_mesh(dom, pts, P));
    BoundaryDatum bd = winding_datum(dom, {1});
    CanonicalMap cm0 = build_canonical_map(mesh, dom, bd, VortexConfig{pts, {1}});
    bd.loops[0].phase0 += 0.7;
    CanonicalMap cm1 = build_canonical_map(mesh, dom, bd, VortexConfig{pts, {1}});

    CHECK(std::abs(renorm_energy_green(cm0).W - renorm_energy_green(cm1).W) < 1e-9);
    CHECK(std::abs(renorm_energy_rho(cm0).W - renorm_energy_rho(cm1).W) < 1e-8);
}

TEST_CASE("modulated datum: routes still agree (no closed form)") {
    Domain dom = Domain::disk();
    std::vector<Vec2> pts{{0.25, -0.2}};
    MeshParams P;
    P.h_far = 0.06;
    auto mesh = std::make_shared<const Mesh>(build_graded_mesh(dom, pts, P));
    BoundaryDatum bd = winding_datum(dom, {1});
    bd.loops[0].cos_coef = {0.3};
    bd.loops[0].sin_coef = {0.0, -0.2};
    CanonicalMap cm = build_canonical_map(mesh, dom, bd, VortexConfig{pts, {1}});

    GreenResult gr = renorm_energy_green(cm);
    RhoLimitResult rr = renorm_energy_rho(cm);
    CAPTURE(gr.W);
    CAPTURE(rr.W);
    CHECK(std::abs(rr.W - gr.W) / (1.0 + std::abs(gr.W)) < 1e-2);

    std::vector<Vec2> g_phase = grad_w_phase(cm);
    std::vector<Vec2> g_fd = grad_w_fd(cm);
    std::vector<Vec2> g_green = grad_w_green(cm);
    CHECK(rel_vec_err(g_phase, g_fd) < 2e-2);
    CHECK(rel_vec_err(g_green, g_fd) < 2e-2);
}

TEST_CASE("rho ladder guards") {
    CanonicalMap cm = disk_map({{0.3, 0.0}}, {1}, 1, 0.1);
    CHECK_THROWS_AS(renorm_energy_rho(cm, {0.9, 0.8, 0.7, 0.6}), BadRadius);
    CHECK_THROWS_AS(renorm_energy_rho(cm, {1e-4, 2e-4, 3e-4, 4e-4}), BadRadius);
}
