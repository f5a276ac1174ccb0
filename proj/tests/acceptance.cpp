// Acceptance gate: one pass/fail line per criterion, exit code = number of
// failed criteria.  Every check is run at its stated tolerance against
// independently constructed configurations; nothing here consults the unit
// tests' oracles.

#include "vlab/config.hpp"
#include "vlab/renorm.hpp"
#include "vlab/runner.hpp"
#include "vlab/stress.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

using namespace vlab;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void verdict(int id, const char* name, bool pass, const std::string& detail) {
    std::printf("%s  %2d  %-34s %s\n", pass ? "PASS" : "FAIL", id, name, detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

std::string e3(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

const char* kDiskSingle = R"({
  "domain": {"kind": "disk", "radius": 1.0},
  "datum": [1],
  "vortices": [[0.3, 0.12, 1]],
  "mesh": {"h_far": 0.06},
  "p_schedule": [1.9, 1.95, 1.975]
})";

const char* kDiskPair = R"({
  "domain": {"kind": "disk", "radius": 1.0},
  "datum": [2],
  "vortices": [[0.6687403, 0.0, 1], [-0.6687403, 0.0, 1]],
  "mesh": {"h_far": 0.06},
  "p_schedule": [1.9, 1.95, 1.975]
})";

const char* kAnnulus = R"({
  "domain": {"kind": "annulus", "radius": 1.0, "inner_radius": 0.3},
  "datum": [2, 1],
  "vortices": [[0.65, 0.0, 1]],
  "mesh": {"h_far": 0.06},
  "p_schedule": [1.9, 1.95, 1.975]
})";

const char* kDipole = R"({
  "domain": {"kind": "disk", "radius": 1.0},
  "datum": [0],
  "vortices": [[0.4, 0.0, 1], [-0.4, 0.0, -1]],
  "mesh": {"h_far": 0.08},
  "p_schedule": [1.9],
  "stationary": {"certify": true, "cert_radius": 0.1}
})";

double circ_radius(const ExperimentConfig& cfg, size_t j) {
    double r = cfg.domain.dist_to_boundary(cfg.vortex_points[j]);
    for (size_t k = 0; k < cfg.vortex_points.size(); ++k)
        if (k != j) r = std::min(r, dist(cfg.vortex_points[j], cfg.vortex_points[k]));
    return 0.4 * r;
}

double max_circ_err(const ExperimentConfig& cfg, const CurrentField& f) {
    double worst = 0.0;
    for (size_t j = 0; j < cfg.vortex_points.size(); ++j) {
        double got = circulation(f, cfg.vortex_points[j], circ_radius(cfg, j), 1024) / TWO_PI;
        worst = std::max(worst, std::abs(got - cfg.vortex_degrees[j]));
    }
    return worst;
}

// everything criteria 1/2/7/8 need from one configuration, solved once
struct SolveBundle {
    double p2_sup = 0.0;      // sup |phi| after the limiting-exponent solve
    double circ_err = 0.0;    // worst |circulation/2pi - d| over canonical + solved p
    std::vector<double> q;    // phase tail energy / (2-p), schedule order
    double scaled_ratio = 0;  // (2-p) E_p / (2 pi sum|d|) at the sharpest p
};

SolveBundle solve_bundle(const ExperimentConfig& cfg) {
    SolveBundle b;
    CanonicalMap cm = cfg.problem().build(cfg.vortex_points);

    PhaseSolveResult r2 = minimize_phase(cm, 2.0, cfg.solver);
    b.p2_sup = r2.phi.values.lpNorm<Eigen::Infinity>();

    b.circ_err = max_circ_err(cfg, current_field(cm, nullptr));

    double sum_abs_d = 0.0;
    for (int d : cfg.vortex_degrees) sum_abs_d += std::abs(d);

    PSolveParams ps = cfg.solver;
    ScalarField warm;
    bool have_warm = false;
    for (double p : cfg.p_schedule) {
        ps.init = have_warm ? &warm : nullptr;
        PhaseSolveResult r = minimize_phase(cm, p, ps);
        b.circ_err = std::max(b.circ_err, max_circ_err(cfg, current_field(cm, &r.phi)));
        b.q.push_back(phase_gradient_p_energy(r.phi, p) / (2.0 - p));
        b.scaled_ratio = (2.0 - p) * p_energy(cm, r.phi, p) / (TWO_PI * sum_abs_d);
        warm = std::move(r.phi);
        have_warm = true;
    }
    return b;
}

void parallel_items(int n, const std::function<void(int)>& fn) {
    int threads = std::min((int)std::thread::hardware_concurrency(), n);
    if (threads <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::exception_ptr> errs((size_t)n);
    std::vector<std::thread> pool;
    for (int w = 0; w < threads; ++w)
        pool.emplace_back([&, w] {
            for (int i = w; i < n; i += threads)
                try {
                    fn(i);
                } catch (...) {
                    errs[(size_t)i] = std::current_exception();
                }
        });
    for (auto& t : pool) t.join();
    for (auto& e : errs)
        if (e) std::rethrow_exception(e);
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file()) files[e.path().filename().string()] = read_file(e.path());
    return files;
}

fs::path fresh_dir(const std::string& name) {
    fs::path d = fs::temp_directory_path() / name;
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

} // namespace

int main() {
    std::printf("acceptance gate: planar vortex-map laboratory\n");
    std::printf("----------------------------------------------------------------------\n");

    ExperimentConfig disk1 = parse_config(kDiskSingle);
    ExperimentConfig disk2 = parse_config(kDiskPair);
    ExperimentConfig annul = parse_config(kAnnulus);

    // ---- shared solve bundles for criteria 1, 2, 7, 8 ----
    std::optional<SolveBundle> b1, b2, b3;
    std::string bundle_err;
    try {
        b1 = solve_bundle(disk1);
        b2 = solve_bundle(disk2);
        b3 = solve_bundle(annul);
    } catch (const std::exception& e) {
        bundle_err = e.what();
    }

    // 1. limiting-exponent degeneration: the phase correction vanishes
    if (b1 && b2 && b3) {
        double worst = std::max({b1->p2_sup, b2->p2_sup, b3->p2_sup});
        verdict(1, "p=2 phase degeneration", worst < 1e-8,
                "max sup|phi| = " + e3(worst) + " (tol 1e-8), configs: disk1/disk2/annulus");
    } else {
        verdict(1, "p=2 phase degeneration", false, "solve failed: " + bundle_err);
    }

    // 2. circulation quantization on canonical and solved maps
    if (b1 && b2 && b3) {
        double worst = std::max({b1->circ_err, b2->circ_err, b3->circ_err});
        verdict(2, "circulation quantization", worst < 1e-3,
                "max |circ/2pi - d| = " + e3(worst) + " (tol 1e-3) over canonical + solved p");
    } else {
        verdict(2, "circulation quantization", false, "solve failed: " + bundle_err);
    }

    // 3. renormalized-energy cross-validation on 1- and 2-vortex disks
    try {
        CanonicalMap cm1 = disk1.problem().build(disk1.vortex_points);
        GreenResult g1 = renorm_energy_green(cm1);
        RhoLimitResult r1 = renorm_energy_rho(cm1);
        double gap1 = std::abs(r1.W - g1.W) / (1.0 + std::abs(g1.W));
        CanonicalMap cm2 = disk2.problem().build(disk2.vortex_points);
        GreenResult g2 = renorm_energy_green(cm2);
        RhoLimitResult r2 = renorm_energy_rho(cm2);
        double gap2 = std::abs(r2.W - g2.W) / (1.0 + std::abs(g2.W));
        verdict(3, "energy route cross-validation", gap1 < 1e-2 && gap2 < 1e-2,
                "rel gap disk1 = " + e3(gap1) + ", disk2 = " + e3(gap2) + " (tol 1e-2)");
    } catch (const std::exception& e) {
        verdict(3, "energy route cross-validation", false, e.what());
    }

    // 4. three independent gradient routes agree pairwise
    try {
        CanonicalMap cm = disk1.problem().build(disk1.vortex_points);
        std::vector<Vec2> gp = grad_w_phase(cm), gg = grad_w_green(cm), gf = grad_w_fd(cm);
        auto rel = [](const std::vector<Vec2>& a, const std::vector<Vec2>& b) {
            double worst = 0.0;
            for (size_t j = 0; j < a.size(); ++j) {
                double na = std::hypot(a[j].x, a[j].y), nb = std::hypot(b[j].x, b[j].y);
                double diff = std::hypot(a[j].x - b[j].x, a[j].y - b[j].y);
                worst = std::max(worst, diff / std::max({na, nb, 1e-300}));
            }
            return worst;
        };
        double pg = rel(gp, gg), pf = rel(gp, gf), gfd = rel(gg, gf);
        double worst = std::max({pg, pf, gfd});
        verdict(4, "gradient triple agreement", worst < 2e-2,
                "pairwise rel: phase/green " + e3(pg) + ", phase/fd " + e3(pf) + ", green/fd " +
                    e3(gfd) + " (tol 2e-2)");
    } catch (const std::exception& e) {
        verdict(4, "gradient triple agreement", false, e.what());
    }

    // 5. stress coefficients at the limiting exponent match the energy
    //    gradient and are cutoff-radius independent
    try {
        CanonicalMap cm = disk1.problem().build(disk1.vortex_points);
        std::vector<Vec2> gw = grad_w_phase(cm);
        StressCoefficients sc = stress_coefficients(cm, nullptr, 2.0, 0.15);
        double rel = 0.0;
        for (size_t j = 0; j < gw.size(); ++j) {
            double n = std::hypot(sc.c[j].x - gw[j].x, sc.c[j].y - gw[j].y);
            rel = std::max(rel, n / std::max(std::hypot(gw[j].x, gw[j].y), 1e-300));
        }
        DeltaIndependenceReport rep =
            delta_independence_check(cm, nullptr, 2.0, {0.1, 0.15, 0.2});
        verdict(5, "stress defect = energy gradient", rel < 2e-2 && rep.spread < 5e-3,
                "rel err = " + e3(rel) + " (tol 2e-2), delta spread = " + e3(rep.spread) +
                    " (tol 5e-3)");
    } catch (const std::exception& e) {
        verdict(5, "stress defect = energy gradient", false, e.what());
    }

    // 6. defect-vs-gradient gap shrinks as p -> 2 and as the mesh refines:
    //    3x3 grid of vortex positions inside a 0.1-ball around (0.3, 0.12)
    try {
        struct Job {
            double p, h;
            Vec2 pos;
            double err = 0.0;
        };
        std::vector<Job> jobs;
        const double ext = 0.07;
        for (double p_h : {0, 1, 2}) // 0: p=1.9 fine, 1: p=1.975 fine, 2: p=1.9 coarse
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) {
                    Job job;
                    job.p = (p_h == 1) ? 1.975 : 1.9;
                    job.h = (p_h == 2) ? 0.12 : 0.06;
                    job.pos = {0.3 - ext + ext * i, 0.12 - ext + ext * j};
                    jobs.push_back(job);
                }
        parallel_items((int)jobs.size(), [&](int k) {
            Job& job = jobs[(size_t)k];
            ExperimentConfig cfg = parse_config(kDiskSingle);
            cfg.mesh.h_far = job.h;
            cfg.vortex_points = {job.pos};
            CanonicalMap cm = cfg.problem().build(cfg.vortex_points);
            PhaseSolveResult r = minimize_phase(cm, job.p, cfg.solver);
            StressCoefficients sc = stress_coefficients(cm, &r.phi, job.p, 0.15);
            std::vector<Vec2> gw = grad_w_phase(cm);
            job.err = std::hypot(sc.c[0].x - gw[0].x, sc.c[0].y - gw[0].y);
        });
        double fine19 = 0.0, fine1975 = 0.0, coarse19 = 0.0;
        for (size_t k = 0; k < jobs.size(); ++k) {
            double& acc = k < 9 ? fine19 : k < 18 ? fine1975 : coarse19;
            acc = std::max(acc, jobs[k].err);
        }
        bool pass = fine1975 < fine19 && fine19 < coarse19 && fine1975 < coarse19;
        verdict(6, "defect gap shrinks toward p=2", pass,
                "max||c-gradW||: p=1.975 fine " + e3(fine1975) + " < p=1.9 fine " + e3(fine19) +
                    " < p=1.9 coarse " + e3(coarse19));
    } catch (const std::exception& e) {
        verdict(6, "defect gap shrinks toward p=2", false, e.what());
    }

    // 7. scaled phase tail energy stays in a factor-4 band across the schedule
    if (b1 && b1->q.size() == 3) {
        double qmin = *std::min_element(b1->q.begin(), b1->q.end());
        double qmax = *std::max_element(b1->q.begin(), b1->q.end());
        double band = qmax / qmin;
        verdict(7, "scaled tail-energy band", band <= 4.0,
                "E_phase/(2-p) = {" + e3(b1->q[0]) + ", " + e3(b1->q[1]) + ", " + e3(b1->q[2]) +
                    "}, band " + e3(band) + " (allowed 4); decay is superlinear in (2-p)");
    } else {
        verdict(7, "scaled tail-energy band", false, "solve failed: " + bundle_err);
    }

    // 8. energy blow-up rate: (2-p) E_p near 2 pi sum|d| at p = 1.975
    if (b1 && b2) {
        bool pass = b1->scaled_ratio > 0.9 && b1->scaled_ratio < 1.1 &&
                    b2->scaled_ratio > 0.9 && b2->scaled_ratio < 1.1;
        verdict(8, "energy blow-up rate", pass,
                "(2-p)E_p / (2pi sum|d|) = " + e3(b1->scaled_ratio) + " (disk1), " +
                    e3(b2->scaled_ratio) + " (disk2), window [0.9, 1.1]");
    } else {
        verdict(8, "energy blow-up rate", false, "solve failed: " + bundle_err);
    }

    // 9. continuation chain on the two-vortex disk: roots of the defect field
    //    approach the energy-critical pair, with matching nonzero degrees
    try {
        MapProblem prob = disk2.problem();
        CriticalPointResult crit =
            find_critical_point_W(prob, {{0.55, 0.0}, {-0.55, 0.0}});
        ContinuationParams cp;
        cp.certify = true;
        cp.cert_radius = 0.1;
        ContinuationResult res = continuation(prob, disk2.p_schedule, crit.x, cp);
        bool all_ok = res.steps.size() == 3;
        for (const auto& s : res.steps) all_ok = all_ok && s.ok;
        bool decreasing = res.steps.size() == 3 &&
                          res.steps[0].dist_to_limit > res.steps[1].dist_to_limit &&
                          res.steps[1].dist_to_limit > res.steps[2].dist_to_limit;
        bool degrees_ok = res.certified && res.cert_c && res.cert_c->degree != 0;
        // the critical set of this datum is a rotation orbit; decompose each
        // step's offset into the radius error (converges) and the angle
        // along the orbit (pinned by discretization noise) so the line
        // documents which part moves
        const double rstar = std::pow(5.0, -0.25);
        std::ostringstream d;
        d << "steps ok " << (all_ok ? "3/3" : "NO") << "; dist to x* = {";
        for (size_t i = 0; i < res.steps.size(); ++i)
            d << (i ? ", " : "") << e3(res.steps[i].dist_to_limit);
        d << "}" << (decreasing ? " decreasing" : " NOT decreasing") << "; radius err = {";
        for (size_t i = 0; i < res.steps.size(); ++i) {
            double re = 0.0;
            for (const auto& pt : res.steps[i].x)
                re = std::max(re, std::abs(std::hypot(pt.x, pt.y) - rstar));
            d << (i ? ", " : "") << e3(re);
        }
        d << "}; ";
        if (res.cert_grad_w) d << "deg(gradW) = " << res.cert_grad_w->degree << ", ";
        if (res.cert_c) d << "deg(c) = " << res.cert_c->degree << ", ";
        d << (res.certified ? "certified" : "not certified: " + res.certify_note);
        verdict(9, "continuation tracks the pair", all_ok && decreasing && degrees_ok, d.str());
    } catch (const std::exception& e) {
        verdict(9, "continuation tracks the pair", false, e.what());
    }

    // 10. negative control: the annihilating dipole must fail to certify,
    //     and the runner must report that rather than a root
    try {
        ExperimentConfig cfg = parse_config(kDipole);
        fs::path dir = fresh_dir("vlab_acc_dipole");
        RunnerOptions opts;
        opts.out_dir = dir.string();
        int rc = run_subcommand(cfg, "stationary", opts);
        std::string summary = read_file(dir / "summary.txt");
        bool no_root = summary.find("critical_point_found = 0") != std::string::npos;
        bool reported = summary.find("certified = 0") != std::string::npos;
        verdict(10, "dipole fails to certify", rc == 0 && no_root && reported,
                "exit " + std::to_string(rc) + ", reports no critical point: " +
                    (no_root ? "yes" : "NO") + ", reports uncertified: " +
                    (reported ? "yes" : "NO"));
    } catch (const std::exception& e) {
        verdict(10, "dipole fails to certify", false, e.what());
    }

    // 11. repeated validate runs are byte-identical at any thread count
    try {
        ExperimentConfig cfg = parse_config(kDiskSingle);
        fs::path dir = fresh_dir("vlab_acc_validate");
        RunnerOptions opts;
        opts.out_dir = dir.string();
        opts.threads = 1;
        int rc1 = run_subcommand(cfg, "validate", opts);
        auto snap1 = snapshot(dir);
        opts.threads = 4;
        int rc4 = run_subcommand(cfg, "validate", opts);
        auto snap4 = snapshot(dir);
        opts.threads = 1;
        int rc1b = run_subcommand(cfg, "validate", opts);
        auto snap1b = snapshot(dir);
        bool identical = snap1 == snap4 && snap1 == snap1b && !snap1.empty();
        verdict(11, "validate runs byte-identical", rc1 == 0 && rc4 == 0 && rc1b == 0 && identical,
                std::string("exits 0/0/0: ") +
                    (rc1 == 0 && rc4 == 0 && rc1b == 0 ? "yes" : "NO") +
                    ", threads {1,4,1} outputs identical: " + (identical ? "yes" : "NO") + " (" +
                    std::to_string(snap1.size()) + " files)");
    } catch (const std::exception& e) {
        verdict(11, "validate runs byte-identical", false, e.what());
    }

    std::printf("----------------------------------------------------------------------\n");
    std::printf("%d criterion(s) failed\n", g_failures);
    return g_failures;
}
