#include "vlab/common.hpp"

#include <map>
#include <mutex>
#include <thread>

namespace vlab {

// Legendre polynomial value and derivative via the three-term recurrence.
static void legendre_pd(int n, double x, double& p, double& dp) {
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    p = p1;
    dp = n * (x * p1 - p0) / (x * x - 1.0);
}

static GaussRule make_gauss(int n) {
    GaussRule r;
    r.nodes.resize(n);
    r.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        // Chebyshev-like initial guess, then Newton.
        double x = std::cos(PI * (i + 0.75) / (n + 0.5));
        double p, dp;
        for (int it = 0; it < 100; ++it) {
            legendre_pd(n, x, p, dp);
            double dx = p / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        legendre_pd(n, x, p, dp);
        r.nodes[i] = x;
        r.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    return r;
}

const GaussRule& gauss_legendre(int n) {
    static std::map<int, GaussRule> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, make_gauss(n)).first;
    return it->second;
}

std::vector<double> unwrap_phase(const std::vector<double>& angles, double max_jump) {
    std::vector<double> out(angles.size());
    if (angles.empty()) return out;
    out[0] = wrap_angle(angles[0]);
    for (size_t k = 1; k < angles.size(); ++k) {
        double d = wrap_angle(angles[k] - angles[k - 1]);
        if (std::abs(d) > max_jump)
            throw AmbiguousLift("unwrap_phase: phase jump " + fmt_g17(d) +
                                " exceeds trust threshold; sampling too coarse for an unambiguous lift");
        out[k] = out[k - 1] + d;
    }
    return out;
}

int winding_of_loop(const std::vector<double>& angles, double max_jump) {
    if (angles.size() < 3) throw AmbiguousLift("winding_of_loop: need at least 3 samples");
    double total = 0.0;
    for (size_t k = 0; k < angles.size(); ++k) {
        double d = wrap_angle(angles[(k + 1) % angles.size()] - angles[k]);
        if (std::abs(d) > max_jump)
            throw AmbiguousLift("winding_of_loop: ambiguous jump of " + fmt_g17(d));
        total += d;
    }
    double w = total / TWO_PI;
    int wi = (int)std::lround(w);
    if (std::abs(w - wi) > 1e-6)
        throw AmbiguousLift("winding_of_loop: non-integer winding " + fmt_g17(w));
    return wi;
}

void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
    if (threads <= 1 || n <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    int nw = std::min(threads, n);
    std::vector<std::thread> pool;
    pool.reserve(nw);
    std::vector<std::exception_ptr> errs(nw);
    for (int w = 0; w < nw; ++w) {
        pool.emplace_back([&, w]() {
            try {
                for (int i = w; i < n; i += nw) fn(i);
            } catch (...) {
                errs[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errs)
        if (e) std::rethrow_exception(e);
}

} // namespace vlab
