#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "vlab/singular.hpp"

using namespace vlab;

namespace {

// brute-force reference: uniform 4^depth midpoint subdivision (smooth
// integrands only)
template <class F>
double brute_tri(const TriXY& T, int depth, const F& f) {
    if (depth == 0) {
        Vec2 c = (T[0] + T[1] + T[2]) / 3.0;
        return f(c) * tri_area(T);
    }
    Vec2 m01 = 0.5 * (T[0] + T[1]), m12 = 0.5 * (T[1] + T[2]), m20 = 0.5 * (T[2] + T[0]);
    return brute_tri({T[0], m01, m20}, depth - 1, f) +
           brute_tri({m01, T[1], m12}, depth - 1, f) +
           brute_tri({m20, m12, T[2]}, depth - 1, f) +
           brute_tri({m01, m12, m20}, depth - 1, f);
}

const TriXY TRI{Vec2{0.1, 0.05}, Vec2{0.9, 0.25}, Vec2{0.35, 0.85}};

} // namespace

TEST_CASE("kernel integral vs brute force, center outside") {
    Vec2 c{1.4, -0.3};
    Vec2 exact = tri_int_kernel(TRI, c);
    Vec2 ref = {brute_tri(TRI, 7, [&](Vec2 x) { return log_kernel(x, c).x; }),
                brute_tri(TRI, 7, [&](Vec2 x) { return log_kernel(x, c).y; })};
    CHECK((exact - ref).norm() < 1e-6);
}

TEST_CASE("kernel integral vanishes on a centered equilateral triangle") {
    // rotational equivariance: the integral over any 3-fold symmetric region
    // about the center is zero
    TriXY eq;
    for (int k = 0; k < 3; ++k) {
        double a = PI / 2 + TWO_PI * k / 3.0;
        eq[k] = {0.01 * std::cos(a), 0.01 * std::sin(a)};
    }
    Vec2 v = tri_int_kernel(eq, {0.0, 0.0});
    CHECK(v.norm() < 1e-13);
}

TEST_CASE("kernel integral with interior center: additive against a split at the center") {
    Vec2 c{0.4, 0.3}; // inside TRI
    REQUIRE(point_in_tri(TRI, c));
    Vec2 whole = tri_int_kernel(TRI, c);
    // split at an interior point q != c; c stays interior to exactly one part
    Vec2 q{0.55, 0.35};
    Vec2 parts{0, 0};
    for (int k = 0; k < 3; ++k) {
        TriXY part{TRI[k], TRI[(k + 1) % 3], q};
        parts += tri_int_kernel(part, c);
    }
    CHECK((whole - parts).norm() < 1e-11);
}

TEST_CASE("cross-term integral vs brute force, both centers outside") {
    Vec2 ci{1.2, 0.4}, cj{-0.4, 1.1};
    double exact = tri_int_kk(TRI, ci, cj);
    double ref = brute_tri(TRI, 7, [&](Vec2 x) { return log_kernel(x, ci).dot(log_kernel(x, cj)); });
    CHECK(exact == doctest::Approx(ref).epsilon(1e-5));
}

TEST_CASE("self-term integral vs brute force, center outside") {
    Vec2 c{1.05, 0.55}; // close to the triangle but outside
    double exact = tri_int_kk(TRI, c, c);
    double ref = brute_tri(TRI, 8, [&](Vec2 x) { return log_kernel(x, c).norm2(); });
    CHECK(exact == doctest::Approx(ref).epsilon(1e-4));
    CHECK_THROWS_AS(tri_int_kk(TRI, Vec2{0.4, 0.3}, Vec2{0.4, 0.3}), SingularPoint);
}

TEST_CASE("cross-term with one interior center: additivity across a 4-way split") {
    Vec2 ci{1.3, -0.2};  // outside
    Vec2 cj{0.42, 0.31}; // inside
    REQUIRE(point_in_tri(TRI, cj));
    double whole = tri_int_kk(TRI, ci, cj);

    Vec2 m01 = 0.5 * (TRI[0] + TRI[1]), m12 = 0.5 * (TRI[1] + TRI[2]), m20 = 0.5 * (TRI[2] + TRI[0]);
    TriXY kids[4] = {{TRI[0], m01, m20}, {m01, TRI[1], m12}, {m20, m12, TRI[2]}, {m01, m12, m20}};
    double parts = 0.0;
    int inside_count = 0;
    for (const TriXY& k : kids) {
        if (point_in_tri(k, cj)) ++inside_count;
        parts += tri_int_kk(k, ci, cj);
    }
    REQUIRE(inside_count == 1); // the correction term fires exactly once
    CHECK(whole == doctest::Approx(parts).epsilon(1e-11));
}

TEST_CASE("full current square on a triangle, smooth case") {
    std::vector<Charge> ch{{{1.5, 0.2}, 1.0}, {{-0.8, -0.4}, -2.0}};
    Vec2 R{0.3, -0.7};
    double exact = tri_int_current_sq(TRI, R, ch);
    double ref = brute_tri(TRI, 7, [&](Vec2 x) {
        Vec2 v = R + 1.0 * log_kernel(x, ch[0].c) - 2.0 * log_kernel(x, ch[1].c);
        return v.norm2();
    });
    CHECK(exact == doctest::Approx(ref).epsilon(1e-5));
}

TEST_CASE("near-singular edges: additivity across scales (graded-mesh regime)") {
    // center just outside a tiny triangle, distance ~ 0.3 of edge length,
    // exactly the micro-triangle neighborhood situation
    TriXY tiny{Vec2{0.0, 0.0}, Vec2{0.003, 0.0004}, Vec2{0.001, 0.0028}};
    Vec2 c{0.0015, -0.0009};
    double whole = tri_int_kk(tiny, c, c);
    Vec2 m01 = 0.5 * (tiny[0] + tiny[1]), m12 = 0.5 * (tiny[1] + tiny[2]),
         m20 = 0.5 * (tiny[2] + tiny[0]);
    double parts = tri_int_kk({tiny[0], m01, m20}, c, c) + tri_int_kk({m01, tiny[1], m12}, c, c) +
                   tri_int_kk({m20, m12, tiny[2]}, c, c) + tri_int_kk({m01, m12, m20}, c, c);
    CHECK(whole == doctest::Approx(parts).epsilon(1e-12));
}

TEST_CASE("ring quadrature: exact areas and the 1/r^2 mass") {
    Vec2 c{0.2, -0.1};
    double area = ring_integrate(c, 0.01, 0.3, [](const Vec2&) { return 1.0; });
    CHECK(area == doctest::Approx(PI * (0.3 * 0.3 - 0.01 * 0.01)).epsilon(1e-12));
    double mass = ring_integrate(c, 1e-4, 0.5, [&](const Vec2& x) { return 1.0 / (x - c).norm2(); },
                                 64, 24, 8);
    CHECK(mass == doctest::Approx(TWO_PI * std::log(0.5 / 1e-4)).epsilon(1e-10));
    // angular structure: f = cos^2(theta)/r^2 integrates to pi ln(r_hi/r_lo)
    double half = ring_integrate(c, 0.01, 0.4, [&](const Vec2& x) {
        Vec2 d = x - c;
        return d.x * d.x / (d.norm2() * d.norm2());
    }, 64, 16, 8);
    CHECK(half == doctest::Approx(PI * std::log(40.0)).epsilon(1e-10));
    CHECK_THROWS_AS(ring_integrate(c, 0.0, 0.1, [](const Vec2&) { return 1.0; }), BadRadius);
}
