#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "vlab/config.hpp"
#include "vlab/runner.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

using namespace vlab;
namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path fresh_dir(const std::string& name) {
    fs::path d = fs::temp_directory_path() / name;
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file()) files[e.path().filename().string()] = read_file(e.path());
    return files;
}

const char* kSmokeConfig = R"({
  "domain": {"kind": "disk", "radius": 1.0},
  "datum": [1],
  "vortices": [[0.3, 0.12, 1]],
  "mesh": {"h_far": 0.1},
  "p_schedule": [1.9]
})";

} // namespace

TEST_CASE("experiment configs round-trip losslessly") {
    const char* text = R"({
      "domain": {"kind": "annulus", "radius": 1.0, "inner_radius": 0.25},
      "datum": {"loops": [
        {"winding": 2, "phase0": 0.3, "cos": [0.05], "sin": [0.0, -0.02]},
        {"winding": 1}
      ]},
      "vortices": [[0.6, 0.0, 1], [-0.55, 0.1, -1], [0.0, 0.62, 1]],
      "mesh": {"h_far": 0.07, "h_near": 0.004, "grading": 0.35, "smoothing_passes": 3},
      "p_schedule": [1.9, 1.95, 1.975],
      "solver": {"max_iters_per_stage": 40, "stage_tol": 1e-12},
      "stress": {"delta": 0.12, "deltas": [0.08, 0.12, 0.16]},
      "stationary": {"certify": true, "cert_radius": 0.08, "max_evals": 50},
      "sweep": {"grid": 5, "extent": 0.04},
      "out_dir": "results/annulus_a",
      "seed": 42
    })";
    ExperimentConfig cfg = parse_config(text);
    CHECK(cfg.domain.kind == Domain::Kind::Annulus);
    CHECK(cfg.datum.loops.size() == 2);
    CHECK(cfg.datum.loops[0].winding == 2);
    CHECK(cfg.vortex_degrees == std::vector<int>{1, -1, 1});
    CHECK(cfg.p_schedule.size() == 3);
    CHECK(cfg.stationary.certify);
    CHECK(cfg.sweep.grid == 5);
    CHECK(cfg.seed == 42);

    // serialize -> parse -> serialize reaches a fixed point immediately
    std::string once = serialize_config(cfg);
    std::string twice = serialize_config(parse_config(once));
    CHECK(once == twice);
    CHECK_NOTHROW(validate_config(cfg));
}

TEST_CASE("config validation names the offending vortex") {
    ExperimentConfig cfg = parse_config(R"({
      "domain": {"kind": "disk", "radius": 1.0},
      "datum": [2],
      "vortices": [[0.3, 0.12, 1], [1.5, 0.0, 1]]
    })");
    try {
        validate_config(cfg);
        FAIL("expected InvalidConfig");
    } catch (const InvalidConfig& e) {
        std::string msg = e.what();
        CHECK(msg.find("vortex 1") != std::string::npos);
        CHECK(msg.find("outside") != std::string::npos);
    }
}

TEST_CASE("config parsing and validation reject malformed input") {
    SUBCASE("unknown top-level key") {
        CHECK_THROWS_AS(parse_config(R"({"domain": {"kind": "disk", "radius": 1},
            "datum": [1], "vortices": [[0, 0, 1]], "bogus": 1})"),
                        InvalidConfig);
    }
    SUBCASE("unknown nested key") {
        try {
            parse_config(R"({"domain": {"kind": "disk", "radius": 1}, "datum": [1],
                "vortices": [[0, 0, 1]], "stationary": {"params": {}}})");
            FAIL("expected InvalidConfig");
        } catch (const InvalidConfig& e) {
            CHECK(std::string(e.what()).find("params") != std::string::npos);
        }
    }
    SUBCASE("non-integer vortex degree") {
        CHECK_THROWS_AS(parse_config(R"({"domain": {"kind": "disk", "radius": 1},
            "datum": [1], "vortices": [[0.3, 0.1, 1.5]]})"),
                        InvalidConfig);
    }
    SUBCASE("zero vortex degree") {
        CHECK_THROWS_AS(parse_config(R"({"domain": {"kind": "disk", "radius": 1},
            "datum": [0], "vortices": [[0.3, 0.1, 0]]})"),
                        InvalidConfig);
    }
    SUBCASE("exponent outside the relaxation range") {
        ExperimentConfig cfg = parse_config(kSmokeConfig);
        cfg.p_schedule = {1.9, 2.5};
        CHECK_THROWS_AS(validate_config(cfg), BadExponent);
    }
    SUBCASE("boundary winding incompatible with the vortex degrees") {
        ExperimentConfig cfg = parse_config(R"({"domain": {"kind": "disk", "radius": 1},
            "datum": [2], "vortices": [[0.3, 0.1, 1]]})");
        try {
            validate_config(cfg);
            FAIL("expected InvalidConfig");
        } catch (const InvalidConfig& e) {
            CHECK(std::string(e.what()).find("incompatible") != std::string::npos);
        }
    }
    SUBCASE("unknown subcommand") {
        ExperimentConfig cfg = parse_config(kSmokeConfig);
        RunnerOptions opts;
        opts.out_dir = fresh_dir("vlab_cli_badsub").string();
        CHECK_THROWS_AS(run_subcommand(cfg, "frobnicate", opts), InvalidConfig);
    }
}

TEST_CASE("runner writes the artifact set with a loadable config echo") {
    ExperimentConfig cfg = parse_config(kSmokeConfig);
    RunnerOptions opts;

    fs::path mesh_dir = fresh_dir("vlab_cli_mesh");
    opts.out_dir = mesh_dir.string();
    CHECK(run_subcommand(cfg, "mesh", opts) == 0);
    CHECK(fs::exists(mesh_dir / "mesh.csv"));
    CHECK(fs::exists(mesh_dir / "summary.txt"));
    CHECK(fs::exists(mesh_dir / "config.resolved.json"));

    // the echoed config parses back to the same serialization
    ExperimentConfig echoed = parse_config(read_file(mesh_dir / "config.resolved.json"));
    CHECK(serialize_config(echoed) == serialize_config(cfg));

    fs::path ren_dir = fresh_dir("vlab_cli_renorm");
    opts.out_dir = ren_dir.string();
    CHECK(run_subcommand(cfg, "renorm", opts) == 0);
    CHECK(fs::exists(ren_dir / "energy_report.txt"));
    CHECK(fs::exists(ren_dir / "gradients.csv"));

    // the four-term breakdown sums to the reported energy exactly as printed
    std::istringstream csv(read_file(ren_dir / "renorm.csv"));
    std::map<std::string, double> terms;
    std::string line;
    std::getline(csv, line); // header
    while (std::getline(csv, line)) {
        auto comma = line.find(',');
        REQUIRE(comma != std::string::npos);
        terms[line.substr(0, comma)] = std::stod(line.substr(comma + 1));
    }
    REQUIRE(terms.count("w_green") == 1);
    double sum = terms.at("pair_term") + terms.at("boundary_term") + terms.at("self_term") +
                 terms.at("flow_term");
    CHECK(std::abs(sum - terms.at("w_green")) < 1e-12 * (1.0 + std::abs(terms.at("w_green"))));
    CHECK(terms.at("rel_gap") < 1e-2);
}

TEST_CASE("runner outputs are deterministic and thread-invariant") {
    ExperimentConfig cfg = parse_config(R"({
      "domain": {"kind": "disk", "radius": 1.0},
      "datum": [1],
      "vortices": [[0.3, 0.12, 1]],
      "mesh": {"h_far": 0.1},
      "p_schedule": [1.9],
      "sweep": {"grid": 2, "extent": 0.05}
    })");
    fs::path dir = fresh_dir("vlab_cli_det");
    RunnerOptions opts;
    opts.out_dir = dir.string();

    opts.threads = 1;
    CHECK(run_subcommand(cfg, "sweep", opts) == 0);
    auto first = snapshot(dir);
    REQUIRE(first.count("sweep.csv") == 1);

    opts.threads = 3;
    CHECK(run_subcommand(cfg, "sweep", opts) == 0);
    auto second = snapshot(dir);
    CHECK(first == second);

    // outputs must not leak run conditions that vary between equal runs
    for (const auto& [name, body] : first) {
        CAPTURE(name);
        CHECK(body.find("thread") == std::string::npos);
        CHECK(body.find("elapsed") == std::string::npos);
    }
}
