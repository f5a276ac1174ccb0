#include "vlab/config.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace vlab {

using nlohmann::json;

MapProblem ExperimentConfig::problem() const {
    MapProblem prob;
    prob.domain = domain;
    prob.datum = datum;
    prob.degrees = vortex_degrees;
    prob.mesh_prm = mesh;
    return prob;
}

namespace {

[[noreturn]] void bad(const std::string& what) { throw InvalidConfig("config: " + what); }

// strict field access: typos in keys are configuration errors, not silence
void check_keys(const json& j, const std::string& where,
                std::initializer_list<const char*> allowed) {
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!ok.count(it.key())) bad("unknown key \"" + it.key() + "\" in " + where);
}

double num_at(const json& j, const char* key, double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_number()) bad(std::string("\"") + key + "\" must be a number");
    return j[key].get<double>();
}

int int_at(const json& j, const char* key, int fallback) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_number_integer()) bad(std::string("\"") + key + "\" must be an integer");
    return j[key].get<int>();
}

bool bool_at(const json& j, const char* key, bool fallback) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_boolean()) bad(std::string("\"") + key + "\" must be a boolean");
    return j[key].get<bool>();
}

std::vector<double> num_list(const json& j, const std::string& where) {
    if (!j.is_array()) bad(where + " must be an array of numbers");
    std::vector<double> v;
    for (const auto& e : j) {
        if (!e.is_number()) bad(where + " must contain numbers only");
        v.push_back(e.get<double>());
    }
    return v;
}

Domain parse_domain(const json& j) {
    check_keys(j, "\"domain\"", {"kind", "radius", "inner_radius", "points"});
    std::string kind = j.contains("kind") ? j["kind"].get<std::string>() : "disk";
    if (kind == "disk") return Domain::disk(num_at(j, "radius", 1.0));
    if (kind == "annulus")
        return Domain::annulus(num_at(j, "inner_radius", 0.25), num_at(j, "radius", 1.0));
    if (kind == "polygon") {
        if (!j.contains("points")) bad("polygon domain needs \"points\"");
        std::vector<Vec2> pts;
        for (const auto& e : j["points"]) {
            auto xy = num_list(e, "polygon point");
            if (xy.size() != 2) bad("polygon points must be [x, y] pairs");
            pts.push_back({xy[0], xy[1]});
        }
        return Domain::polygon(std::move(pts));
    }
    bad("unknown domain kind \"" + kind + "\"");
}

json domain_json(const Domain& d) {
    json j;
    switch (d.kind) {
    case Domain::Kind::Disk:
        j["kind"] = "disk";
        j["radius"] = d.radius;
        break;
    case Domain::Kind::Annulus:
        j["kind"] = "annulus";
        j["radius"] = d.radius;
        j["inner_radius"] = d.inner_radius;
        break;
    case Domain::Kind::Polygon: {
        j["kind"] = "polygon";
        json pts = json::array();
        for (const auto& p : d.poly) pts.push_back(json::array({p.x, p.y}));
        j["points"] = std::move(pts);
        break;
    }
    }
    return j;
}

LoopDatum parse_loop(const json& j, int loop) {
    std::string where = "datum loop " + std::to_string(loop);
    check_keys(j, where, {"winding", "phase0", "cos", "sin"});
    LoopDatum L;
    L.winding = int_at(j, "winding", 0);
    L.phase0 = num_at(j, "phase0", 0.0);
    if (j.contains("cos")) L.cos_coef = num_list(j["cos"], where + " \"cos\"");
    if (j.contains("sin")) L.sin_coef = num_list(j["sin"], where + " \"sin\"");
    return L;
}

BoundaryDatum parse_datum(const json& j, const Domain& dom) {
    BoundaryDatum bd;
    if (j.is_array()) { // shorthand: list of windings
        std::vector<int> w;
        for (const auto& e : j) {
            if (!e.is_number_integer()) bad("datum winding shorthand must hold integers");
            w.push_back(e.get<int>());
        }
        return winding_datum(dom, std::move(w));
    }
    check_keys(j, "\"datum\"", {"loops"});
    if (!j.contains("loops") || !j["loops"].is_array()) bad("\"datum\" needs a \"loops\" array");
    int loop = 0;
    for (const auto& e : j["loops"]) bd.loops.push_back(parse_loop(e, loop++));
    return bd;
}

json datum_json(const BoundaryDatum& bd) {
    json loops = json::array();
    for (const auto& L : bd.loops) {
        json j;
        j["winding"] = L.winding;
        j["phase0"] = L.phase0;
        j["cos"] = L.cos_coef;
        j["sin"] = L.sin_coef;
        loops.push_back(std::move(j));
    }
    return json{{"loops", std::move(loops)}};
}

} // namespace

ExperimentConfig parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        bad(std::string("malformed JSON: ") + e.what());
    }
    if (!j.is_object()) bad("top level must be an object");
    check_keys(j, "config",
               {"domain", "datum", "vortices", "mesh", "p_schedule", "solver", "stress",
                "stationary", "sweep", "out_dir", "seed"});

    ExperimentConfig c;
    if (j.contains("domain")) c.domain = parse_domain(j["domain"]);
    c.datum = j.contains("datum") ? parse_datum(j["datum"], c.domain)
                                  : winding_datum(c.domain, std::vector<int>(
                                                                (size_t)c.domain.num_loops(), 0));

    if (j.contains("vortices")) {
        if (!j["vortices"].is_array()) bad("\"vortices\" must be an array of [x, y, d]");
        int idx = 0;
        for (const auto& e : j["vortices"]) {
            auto row = num_list(e, "vortex " + std::to_string(idx));
            if (row.size() != 3) bad("vortex " + std::to_string(idx) + " must be [x, y, d]");
            if (row[2] != (int)row[2] || row[2] == 0.0)
                bad("vortex " + std::to_string(idx) + " degree must be a nonzero integer");
            c.vortex_points.push_back({row[0], row[1]});
            c.vortex_degrees.push_back((int)row[2]);
            ++idx;
        }
    }

    if (j.contains("mesh")) {
        const json& m = j["mesh"];
        check_keys(m, "\"mesh\"",
                   {"h_far", "h_near", "grading", "smoothing_passes", "min_angle_deg"});
        c.mesh.h_far = num_at(m, "h_far", c.mesh.h_far);
        c.mesh.h_near = num_at(m, "h_near", c.mesh.h_near);
        c.mesh.grading = num_at(m, "grading", c.mesh.grading);
        c.mesh.smoothing_passes = int_at(m, "smoothing_passes", c.mesh.smoothing_passes);
        c.mesh.min_angle_deg = num_at(m, "min_angle_deg", c.mesh.min_angle_deg);
    }

    if (j.contains("p_schedule")) c.p_schedule = num_list(j["p_schedule"], "\"p_schedule\"");

    if (j.contains("solver")) {
        const json& s = j["solver"];
        check_keys(s, "\"solver\"",
                   {"max_iters_per_stage", "stage_tol", "eps_cut", "eps_floor_factor"});
        c.solver.max_iters_per_stage =
            int_at(s, "max_iters_per_stage", c.solver.max_iters_per_stage);
        c.solver.stage_tol = num_at(s, "stage_tol", c.solver.stage_tol);
        c.solver.eps_cut = num_at(s, "eps_cut", c.solver.eps_cut);
        c.solver.eps_floor_factor = num_at(s, "eps_floor_factor", c.solver.eps_floor_factor);
    }

    if (j.contains("stress")) {
        const json& s = j["stress"];
        check_keys(s, "\"stress\"", {"delta", "deltas"});
        c.stress.delta = num_at(s, "delta", c.stress.delta);
        if (s.contains("deltas")) c.stress.deltas = num_list(s["deltas"], "\"stress.deltas\"");
    }

    if (j.contains("stationary")) {
        const json& s = j["stationary"];
        check_keys(s, "\"stationary\"",
                   {"delta_trust", "root_tol", "fd_step_scale", "max_evals", "refresh_every",
                    "coeff_delta", "certify", "cert_radius", "cert_p", "cert_n_theta",
                    "cert_disk_rings"});
        StationaryParams& p = c.stationary.params;
        p.delta_trust = num_at(s, "delta_trust", p.delta_trust);
        p.root_tol = num_at(s, "root_tol", p.root_tol);
        p.fd_step_scale = num_at(s, "fd_step_scale", p.fd_step_scale);
        p.max_evals = int_at(s, "max_evals", p.max_evals);
        p.refresh_every = int_at(s, "refresh_every", p.refresh_every);
        p.coeff_delta = num_at(s, "coeff_delta", p.coeff_delta);
        c.stationary.certify = bool_at(s, "certify", c.stationary.certify);
        c.stationary.cert_radius = num_at(s, "cert_radius", c.stationary.cert_radius);
        c.stationary.cert_p = num_at(s, "cert_p", c.stationary.cert_p);
        c.stationary.cert_n_theta = int_at(s, "cert_n_theta", c.stationary.cert_n_theta);
        c.stationary.cert_disk_rings = int_at(s, "cert_disk_rings", c.stationary.cert_disk_rings);
    }

    if (j.contains("sweep")) {
        const json& s = j["sweep"];
        check_keys(s, "\"sweep\"", {"grid", "extent"});
        c.sweep.grid = int_at(s, "grid", c.sweep.grid);
        c.sweep.extent = num_at(s, "extent", c.sweep.extent);
    }

    if (j.contains("out_dir")) {
        if (!j["out_dir"].is_string()) bad("\"out_dir\" must be a string");
        c.out_dir = j["out_dir"].get<std::string>();
    }
    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned() && !j["seed"].is_number_integer())
            bad("\"seed\" must be a nonnegative integer");
        c.seed = j["seed"].get<std::uint64_t>();
    }
    return c;
}

std::string serialize_config(const ExperimentConfig& c) {
    json j;
    j["domain"] = domain_json(c.domain);
    j["datum"] = datum_json(c.datum);
    json vx = json::array();
    for (size_t i = 0; i < c.vortex_points.size(); ++i)
        vx.push_back(json::array(
            {c.vortex_points[i].x, c.vortex_points[i].y, (double)c.vortex_degrees[i]}));
    j["vortices"] = std::move(vx);
    j["mesh"] = {{"h_far", c.mesh.h_far},
                 {"h_near", c.mesh.h_near},
                 {"grading", c.mesh.grading},
                 {"smoothing_passes", c.mesh.smoothing_passes},
                 {"min_angle_deg", c.mesh.min_angle_deg}};
    j["p_schedule"] = c.p_schedule;
    j["solver"] = {{"max_iters_per_stage", c.solver.max_iters_per_stage},
                   {"stage_tol", c.solver.stage_tol},
                   {"eps_cut", c.solver.eps_cut},
                   {"eps_floor_factor", c.solver.eps_floor_factor}};
    j["stress"] = {{"delta", c.stress.delta}, {"deltas", c.stress.deltas}};
    j["stationary"] = {{"delta_trust", c.stationary.params.delta_trust},
                       {"root_tol", c.stationary.params.root_tol},
                       {"fd_step_scale", c.stationary.params.fd_step_scale},
                       {"max_evals", c.stationary.params.max_evals},
                       {"refresh_every", c.stationary.params.refresh_every},
                       {"coeff_delta", c.stationary.params.coeff_delta},
                       {"certify", c.stationary.certify},
                       {"cert_radius", c.stationary.cert_radius},
                       {"cert_p", c.stationary.cert_p},
                       {"cert_n_theta", c.stationary.cert_n_theta},
                       {"cert_disk_rings", c.stationary.cert_disk_rings}};
    j["sweep"] = {{"grid", c.sweep.grid}, {"extent", c.sweep.extent}};
    j["out_dir"] = c.out_dir;
    j["seed"] = c.seed;
    return j.dump(2) + "\n";
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidConfig("config: cannot read \"" + path + "\"");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

void validate_config(const ExperimentConfig& c) {
    // domain sanity (factories normally enforce this; configs may bypass them)
    if (!(c.domain.radius > 0.0)) throw InvalidDomain("config: domain radius must be positive");
    if (c.domain.kind == Domain::Kind::Annulus &&
        !(c.domain.inner_radius > 0.0 && c.domain.inner_radius < c.domain.radius))
        throw InvalidDomain("config: annulus needs 0 < inner_radius < radius");

    if ((int)c.datum.loops.size() != c.domain.num_loops())
        throw InvalidConfig("config: datum has " + std::to_string(c.datum.loops.size()) +
                            " loops, domain has " + std::to_string(c.domain.num_loops()));

    if (c.vortex_points.size() != c.vortex_degrees.size())
        throw InvalidConfig("config: vortex points/degrees length mismatch");
    for (size_t jv = 0; jv < c.vortex_points.size(); ++jv) {
        const Vec2& p = c.vortex_points[jv];
        if (!c.domain.inside(p))
            throw InvalidConfig("config: vortex " + std::to_string(jv) + " at (" + fmt_g17(p.x) +
                                ", " + fmt_g17(p.y) + ") lies outside the domain");
        if (c.vortex_degrees[jv] == 0)
            throw InvalidConfig("config: vortex " + std::to_string(jv) + " has degree zero");
        for (size_t k = 0; k < jv; ++k)
            if (dist(p, c.vortex_points[k]) == 0.0)
                throw InvalidConfig("config: vortex " + std::to_string(jv) +
                                    " coincides with vortex " + std::to_string(k));
    }

    // winding compatibility: deg g|outer = sum d_j + sum deg g|holes
    int holes = 0;
    for (size_t l = 1; l < c.datum.loops.size(); ++l) holes += c.datum.loops[l].winding;
    int total = 0;
    for (int d : c.vortex_degrees) total += d;
    if (!c.datum.loops.empty() && c.datum.loops[0].winding != total + holes)
        throw InvalidConfig(
            "config: boundary winding " + std::to_string(c.datum.loops[0].winding) +
            " incompatible with vortex degrees (sum " + std::to_string(total) +
            ") plus hole windings (" + std::to_string(holes) + ")");

    if (!(c.mesh.h_far > 0.0)) throw InvalidConfig("config: mesh.h_far must be positive");
    if (!(c.mesh.grading > 0.0)) throw InvalidConfig("config: mesh.grading must be positive");

    for (size_t i = 0; i < c.p_schedule.size(); ++i)
        if (!(c.p_schedule[i] > 1.0 && c.p_schedule[i] <= 2.0))
            throw BadExponent("config: p_schedule[" + std::to_string(i) +
                              "] must lie in (1, 2]");

    if (!(c.stress.delta > 0.0)) throw BadRadius("config: stress.delta must be positive");
    for (size_t i = 0; i < c.stress.deltas.size(); ++i)
        if (!(c.stress.deltas[i] > 0.0))
            throw BadRadius("config: stress.deltas[" + std::to_string(i) +
                            "] must be positive");
    if (!(c.sweep.grid >= 1)) throw InvalidConfig("config: sweep.grid must be >= 1");
    if (!(c.sweep.extent > 0.0)) throw InvalidConfig("config: sweep.extent must be positive");
}

} // namespace vlab
