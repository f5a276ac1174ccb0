#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "vlab/geom.hpp"

using namespace vlab;

TEST_CASE("wrap_angle maps to (-pi, pi]") {
    CHECK(wrap_angle(0.0) == doctest::Approx(0.0));
    CHECK(wrap_angle(PI) == doctest::Approx(PI));
    CHECK(wrap_angle(-PI) == doctest::Approx(PI)); // -pi wraps to +pi
    CHECK(wrap_angle(3.0 * PI) == doctest::Approx(PI));
    CHECK(wrap_angle(7.1) == doctest::Approx(7.1 - TWO_PI));
    CHECK(wrap_angle(-9.0) == doctest::Approx(-9.0 + TWO_PI));
}

TEST_CASE("unwrap_phase lifts a winding path continuously") {
    // phase of e^{i 3 theta} sampled around the circle, reduced mod 2pi
    int N = 64, w = 3;
    std::vector<double> raw(N);
    for (int k = 0; k < N; ++k) raw[k] = wrap_angle(w * TWO_PI * k / N + 0.2);
    auto lift = unwrap_phase(raw);
    for (int k = 0; k < N; ++k)
        CHECK(lift[k] == doctest::Approx(w * TWO_PI * k / N + 0.2).epsilon(1e-12));
}

TEST_CASE("unwrap_phase refuses ambiguous jumps") {
    std::vector<double> raw{0.0, 3.0}; // jump 3.0 > 0.75*pi
    CHECK_THROWS_AS(unwrap_phase(raw), AmbiguousLift);
}

TEST_CASE("winding_of_loop counts signed turns") {
    int N = 48;
    for (int w : {-2, -1, 0, 1, 3}) {
        std::vector<double> raw(N);
        for (int k = 0; k < N; ++k)
            raw[k] = wrap_angle(w * TWO_PI * k / N + 0.4 * std::sin(TWO_PI * k / N));
        CHECK(winding_of_loop(raw) == w);
    }
}

TEST_CASE("disk domain predicates") {
    Domain d = Domain::disk();
    CHECK(d.inside({0.3, 0.4}));
    CHECK(!d.inside({1.2, 0.0}));
    CHECK(d.dist_to_boundary({0.3, 0.0}) == doctest::Approx(0.7));
    CHECK(d.loop_length(0) == doctest::Approx(TWO_PI));
    Vec2 p = d.loop_point(0, 0.25);
    CHECK(p.x == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(p.y == doctest::Approx(1.0));
    CHECK(d.loop_param(0, {0.0, 1.0}) == doctest::Approx(0.25));
}

TEST_CASE("annulus domain predicates and anchor") {
    Domain d = Domain::annulus(0.35);
    CHECK(d.num_loops() == 2);
    CHECK(d.inside({0.5, 0.0}));
    CHECK(!d.inside({0.2, 0.0}));
    CHECK(d.dist_to_boundary({0.5, 0.0}) == doctest::Approx(0.15));
    CHECK(d.loop_length(1) == doctest::Approx(TWO_PI * 0.35));
    auto a = d.anchors();
    REQUIRE(a.size() == 1);
    CHECK(a[0].norm() == doctest::Approx(0.0));
    CHECK_THROWS_AS(Domain::annulus(1.2, 1.0), InvalidDomain);
}

TEST_CASE("polygon domain: orientation fix, inside, params") {
    // clockwise square gets re-oriented
    Domain d = Domain::polygon({{-1, -1}, {-1, 1}, {1, 1}, {1, -1}});
    CHECK(d.inside({0.0, 0.0}));
    CHECK(!d.inside({1.5, 0.0}));
    CHECK(d.loop_length(0) == doctest::Approx(8.0));
    CHECK(d.dist_to_boundary({0.25, 0.0}) == doctest::Approx(0.75));
    // loop_point / loop_param are inverse along the boundary
    for (double t : {0.01, 0.2, 0.49, 0.77}) {
        Vec2 p = d.loop_point(0, t);
        CHECK(d.loop_param(0, p) == doctest::Approx(t).epsilon(1e-10));
    }
    CHECK_THROWS_AS(Domain::polygon({{0, 0}, {1, 0}, {2, 0}}), InvalidDomain);
}

TEST_CASE("boundary datum evaluates |g|=1 and consistent phase speed") {
    Domain dom = Domain::disk();
    BoundaryDatum bd;
    LoopDatum ld;
    ld.winding = 2;
    ld.phase0 = 0.3;
    ld.cos_coef = {0.2};
    ld.sin_coef = {0.0, -0.1};
    bd.loops.push_back(ld);

    for (double t : {0.0, 0.13, 0.5, 0.99}) {
        auto g = bd.value(0, t);
        CHECK(std::abs(std::abs(g) - 1.0) < 1e-15);
        // finite difference of the phase lift vs dphase_dt
        double dt = 1e-6;
        double fd = (ld.phase(t + dt) - ld.phase(t - dt)) / (2 * dt);
        CHECK(ld.dphase_dt(t) == doctest::Approx(fd).epsilon(1e-6));
    }
    // phase speed per arclength: winding 2 on unit circle -> sigma' = 2 when
    // the residual is dropped
    BoundaryDatum pure = winding_datum(dom, {2});
    CHECK(pure.phase_speed_tau(dom, 0, 0.37) == doctest::Approx(2.0));
}

TEST_CASE("pure winding datum on annulus: tau orientation flips the hole sign") {
    Domain dom = Domain::annulus(0.5);
    BoundaryDatum bd = winding_datum(dom, {1, 1});
    // on the hole, tau runs clockwise, so the ccw winding 1 reads as negative
    // phase speed along tau; |speed| = 1/r = 2
    CHECK(bd.phase_speed_tau(dom, 1, 0.0) == doctest::Approx(-2.0));
    CHECK(bd.phase_speed_tau(dom, 0, 0.0) == doctest::Approx(1.0));
}
