#pragma once

// Small shared utilities: 2-vectors, error types, Gauss-Legendre rules,
// deterministic formatting. Everything downstream includes this.

#include <cmath>
#include <cstdio>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace vlab {

constexpr double PI = 3.14159265358979323846264338327950288;
constexpr double TWO_PI = 2.0 * PI;

// ---------------------------------------------------------------- vectors

struct Vec2 {
    double x = 0.0, y = 0.0;
    Vec2() = default;
    Vec2(double x_, double y_) : x(x_), y(y_) {}

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2 operator/(double s) const { return {x / s, y / s}; }
    Vec2 operator-() const { return {-x, -y}; }
    Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }
    Vec2& operator-=(const Vec2& o) { x -= o.x; y -= o.y; return *this; }
    Vec2& operator*=(double s) { x *= s; y *= s; return *this; }

    double dot(const Vec2& o) const { return x * o.x + y * o.y; }
    double cross(const Vec2& o) const { return x * o.y - y * o.x; }
    double norm2() const { return x * x + y * y; }
    double norm() const { return std::sqrt(norm2()); }

    // Rotation by +90 degrees: (h1,h2)^perp = (-h2,h1).
    Vec2 perp() const { return {-y, x}; }

    Vec2 normalized() const {
        double n = norm();
        return n > 0.0 ? Vec2{x / n, y / n} : Vec2{0.0, 0.0};
    }
};

inline Vec2 operator*(double s, const Vec2& v) { return v * s; }
inline double dist(const Vec2& a, const Vec2& b) { return (a - b).norm(); }

// ------------------------------------------------------------------ errors

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Input / setup problems (CLI exit code 2).
struct ConfigError : Error { using Error::Error; };
struct InvalidConfig : ConfigError { using ConfigError::ConfigError; };
struct InvalidDomain : ConfigError { using ConfigError::ConfigError; };
struct BadSchedule : ConfigError { using ConfigError::ConfigError; };
struct BadExponent : ConfigError { using ConfigError::ConfigError; };
struct BadRadius : ConfigError { using ConfigError::ConfigError; };

// Geometric / topological failures during computation (exit code 3).
struct SolverError : Error { using Error::Error; };
struct AmbiguousLift : SolverError { using SolverError::SolverError; };
struct SingularPoint : SolverError { using SolverError::SolverError; };
struct IncompatibleDegrees : SolverError { using SolverError::SolverError; };
struct TransportTooFar : SolverError { using SolverError::SolverError; };
struct SolveFailure : SolverError { using SolverError::SolverError; };
struct OutOfDomain : SolverError { using SolverError::SolverError; };
struct SolverStalled : SolverError { using SolverError::SolverError; };
struct NoCriticalPoint : SolverError { using SolverError::SolverError; };
struct TrustViolation : SolverError { using SolverError::SolverError; };
struct MeshError : Error { using Error::Error; };

// Honest refusal to certify a Brouwer degree (not a crash).
struct DegreeUndefined : Error { using Error::Error; };

// --------------------------------------------------------- quadrature rules

// Gauss-Legendre nodes/weights on [-1,1], computed once by Newton iteration
// on P_n (deterministic, no table transcription).
struct GaussRule {
    std::vector<double> nodes, weights;
};

const GaussRule& gauss_legendre(int n);

// Convenience: integrate f over the segment [a,b] in R^2 with an n-point rule.
template <class F>
double integrate_segment(const Vec2& a, const Vec2& b, int n, F&& f) {
    const GaussRule& gr = gauss_legendre(n);
    const double half_len = 0.5 * dist(a, b);
    Vec2 mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double s = 0.0;
    for (size_t k = 0; k < gr.nodes.size(); ++k)
        s += gr.weights[k] * f(mid + gr.nodes[k] * half);
    return s * half_len;
}

// ------------------------------------------------------------- formatting

// All floats emitted by the tool go through this (17 significant digits,
// locale-independent) so outputs are byte-stable.
inline std::string fmt_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// ---------------------------------------------------------------- angles

// Wrap to (-pi, pi].
inline double wrap_angle(double a) {
    a = std::fmod(a, TWO_PI);
    if (a <= -PI) a += TWO_PI;
    if (a > PI) a -= TWO_PI;
    return a;
}

// Given angles along a path, return a continuous lift: out[0] = wrap(in[0]),
// out[k+1] = out[k] + wrap(in[k+1]-in[k]). Throws AmbiguousLift-style error if
// a single jump is too close to pi to trust (the sampling is too coarse).
std::vector<double> unwrap_phase(const std::vector<double>& angles, double max_jump = 0.75 * PI);

// Winding number of a closed loop of phase samples (values of arg along the
// loop, *without* the closing duplicate): nearest integer of total lift / 2pi.
int winding_of_loop(const std::vector<double>& angles, double max_jump = 0.75 * PI);

// ------------------------------------------------------------- parallelism

// Runs fn(i) for i in [0,n) on `threads` workers; each index writes only its
// own slot, results combined in index order, so output is identical for any
// thread count.
void parallel_for(int n, int threads, const std::function<void(int)>& fn);

} // namespace vlab
