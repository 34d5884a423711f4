#include "config.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "json_fields.hpp"
#include "network_io.hpp"

namespace msrd {

using nlohmann::json;
using namespace jf;

namespace {

std::string join_violations(const std::vector<Violation>& v) {
    std::string s = "network failed validation:";
    for (const auto& x : v) {
        s += "\n  ";
        if (x.reaction_index >= 0) s += "reaction " + std::to_string(x.reaction_index + 1) + ": ";
        s += x.reason;
    }
    return s;
}

double get_epsilon0(const json& v, const std::string& path) {
    if (v.is_null()) return INFINITY;
    const double e = get_number(v, path);
    if (e < 0.0) semantic(path, "must be >= 0");
    return e;
}

void read_simulate(const json& j, SimulateParams& p, const std::string& path) {
    check_keys(j, {"n", "mu", "t_end", "samples", "epsilon0", "max_events", "trajectory", "event_log", "path_integrals"}, path);
    if (j.contains("n")) p.n = get_int(j["n"], path + "/n");
    if (j.contains("mu")) p.mu = get_number(j["mu"], path + "/mu");
    if (j.contains("t_end")) p.t_end = get_number(j["t_end"], path + "/t_end");
    if (j.contains("samples")) p.samples = get_int(j["samples"], path + "/samples");
    if (j.contains("epsilon0")) p.epsilon0 = get_epsilon0(j["epsilon0"], path + "/epsilon0");
    if (j.contains("max_events")) p.max_events = get_u64(j["max_events"], path + "/max_events");
    if (j.contains("trajectory")) p.trajectory = get_u64(j["trajectory"], path + "/trajectory");
    if (j.contains("event_log")) p.event_log = get_bool(j["event_log"], path + "/event_log");
    if (j.contains("path_integrals")) p.path_integrals = get_bool(j["path_integrals"], path + "/path_integrals");
}

void read_limit_options(const json& j, LimitOptions& o, const std::string& path) {
    if (j.contains("t_end")) o.t_end = get_number(j["t_end"], path + "/t_end");
    if (j.contains("dt")) o.dt = get_number(j["dt"], path + "/dt");
    if (j.contains("tol")) o.tol = get_number(j["tol"], path + "/tol");
    if (j.contains("max_halvings")) o.max_halvings = get_int(j["max_halvings"], path + "/max_halvings");
    if (j.contains("samples")) o.samples = get_int(j["samples"], path + "/samples");
}

void read_limit(const json& j, LimitParams& p, const std::string& path) {
    check_keys(j, {"n", "t_end", "dt", "tol", "max_halvings", "samples"}, path);
    if (j.contains("n")) p.n = get_int(j["n"], path + "/n");
    read_limit_options(j, p.options, path);
}

void read_spectral(const json& j, SpectralParams& p, const std::string& path) {
    check_keys(j, {"n"}, path);
    if (!j.contains("n")) return;
    const auto& ns = j["n"];
    p.ns.clear();
    if (ns.is_array()) {
        for (std::size_t i = 0; i < ns.size(); ++i) p.ns.push_back(get_int(ns[i], path + "/n/" + std::to_string(i)));
    } else {
        p.ns.push_back(get_int(ns, path + "/n"));
    }
}

void read_martingale(const json& j, MartingaleParams& p, const std::string& path) {
    check_keys(j, {"n", "mu", "replicas", "t_end", "z_threshold"}, path);
    if (j.contains("n")) p.n = get_int(j["n"], path + "/n");
    if (j.contains("mu")) p.mu = get_number(j["mu"], path + "/mu");
    if (j.contains("replicas")) p.replicas = get_int(j["replicas"], path + "/replicas");
    if (j.contains("t_end")) p.t_end = get_number(j["t_end"], path + "/t_end");
    if (j.contains("z_threshold")) p.z_threshold = get_number(j["z_threshold"], path + "/z_threshold");
}

std::vector<std::pair<int, double>> read_schedule(const json& s, const std::string& path) {
    if (!s.is_array()) semantic(path, "expected an array of [N, mu] pairs");
    std::vector<std::pair<int, double>> out;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const std::string q = path + "/" + std::to_string(i);
        if (!s[i].is_array() || s[i].size() != 2) semantic(q, "expected [N, mu]");
        out.emplace_back(get_int(s[i][0], q + "/0"), get_number(s[i][1], q + "/1"));
    }
    return out;
}

void read_sweep(const json& j, SweepPlan& p, const std::string& path) {
    check_keys(j,
               {"schedule", "replicas", "t_end", "grid_points", "epsilons", "epsilon0", "reference_n",
                "martingale_replicas", "limit"},
               path);
    if (j.contains("schedule")) p.schedule = read_schedule(j["schedule"], path + "/schedule");
    if (j.contains("replicas")) p.replicas = get_int(j["replicas"], path + "/replicas");
    if (j.contains("t_end")) p.t_end = get_number(j["t_end"], path + "/t_end");
    if (j.contains("grid_points")) p.grid_points = get_int(j["grid_points"], path + "/grid_points");
    if (j.contains("epsilons")) {
        const auto& e = j["epsilons"];
        if (!e.is_array()) semantic(path + "/epsilons", "expected an array");
        p.epsilons.clear();
        for (std::size_t i = 0; i < e.size(); ++i)
            p.epsilons.push_back(get_number(e[i], path + "/epsilons/" + std::to_string(i)));
    }
    if (j.contains("epsilon0")) p.epsilon0 = get_epsilon0(j["epsilon0"], path + "/epsilon0");
    if (j.contains("reference_n")) p.reference_n = get_int(j["reference_n"], path + "/reference_n");
    if (j.contains("martingale_replicas"))
        p.martingale_replicas = get_int(j["martingale_replicas"], path + "/martingale_replicas");
    if (j.contains("limit")) {
        const std::string q = path + "/limit";
        check_keys(j["limit"], {"dt", "tol", "max_halvings", "samples"}, q);
        read_limit_options(j["limit"], p.limit, q);
    }
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json number_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

}  // namespace

ValidationError::ValidationError(std::vector<Violation> v)
    : std::runtime_error(join_violations(v)), violations(std::move(v)) {}

RunConfig parse_config(const std::string& text, const std::string& base_dir) {
    const json j = parse_json_document(text);
    check_keys(j,
               {"network", "network_file", "network_source", "seed", "output_dir", "format", "plot_data", "workers",
                "simulate", "limit", "spectral", "martingale", "sweep"},
               "");
    RunConfig cfg;
    if (j.contains("network") && j.contains("network_file"))
        semantic("/network_file", "give either network or network_file, not both");
    if (j.contains("network")) {
        cfg.network = network_from_json(j["network"], "/network");
        cfg.network_source = j.contains("network_source") ? get_string(j["network_source"], "/network_source")
                                                          : "inline";
    } else if (j.contains("network_file")) {
        const std::string rel = get_string(j["network_file"], "/network_file");
        const std::filesystem::path p = std::filesystem::path(rel).is_absolute()
                                            ? std::filesystem::path(rel)
                                            : std::filesystem::path(base_dir) / rel;
        std::string body;
        try {
            body = read_file(p.string());
        } catch (const std::runtime_error& e) {
            semantic("/network_file", e.what());
        }
        try {
            cfg.network = parse_network(body);
        } catch (const ParseError& e) {
            throw ParseError(p.string() + ": " + e.what(), e.line, e.column, e.path);
        }
        cfg.network_source = rel;
    }
    if (auto v = validate_network(cfg.network); !v.empty()) throw ValidationError(std::move(v));

    if (j.contains("seed")) cfg.seed = get_u64(j["seed"], "/seed");
    if (j.contains("output_dir")) cfg.output_dir = get_string(j["output_dir"], "/output_dir");
    if (j.contains("format")) cfg.format = get_string(j["format"], "/format");
    if (j.contains("plot_data")) cfg.plot_data = get_bool(j["plot_data"], "/plot_data");
    if (j.contains("workers")) cfg.workers = get_int(j["workers"], "/workers");
    if (j.contains("simulate")) read_simulate(j["simulate"], cfg.simulate, "/simulate");
    if (j.contains("limit")) read_limit(j["limit"], cfg.limit, "/limit");
    if (j.contains("spectral")) read_spectral(j["spectral"], cfg.spectral, "/spectral");
    if (j.contains("martingale")) read_martingale(j["martingale"], cfg.martingale, "/martingale");
    if (j.contains("sweep")) read_sweep(j["sweep"], cfg.sweep, "/sweep");
    cfg.sweep.seed = cfg.seed;
    cfg.sweep.workers = cfg.workers;
    if (cfg.format != "csv" && cfg.format != "json" && cfg.format != "both")
        semantic("/format", "expected csv, json or both");
    return cfg;
}

void apply_overrides(RunConfig& cfg, const std::string& command, const json& o) {
    if (!o.is_object()) semantic("", "overrides must be an object");
    check_keys(o,
               {"seed", "output_dir", "format", "plot_data", "workers", "n", "mu", "t_end", "replicas", "epsilon0",
                "max_events", "samples", "schedule", "event_log", "path_integrals", "network_file"},
               "");
    if (o.contains("network_file")) {
        const std::string path = get_string(o["network_file"], "/network_file");
        try {
            cfg.network = parse_network(read_file(path));
        } catch (const ParseError& e) {
            throw ParseError(path + ": " + e.what(), e.line, e.column, e.path);
        } catch (const std::runtime_error& e) {
            semantic("/network_file", e.what());
        }
        cfg.network_source = path;
        if (auto v = validate_network(cfg.network); !v.empty()) throw ValidationError(std::move(v));
    }
    if (o.contains("seed")) cfg.seed = get_u64(o["seed"], "/seed");
    if (o.contains("output_dir")) cfg.output_dir = get_string(o["output_dir"], "/output_dir");
    if (o.contains("format")) {
        cfg.format = get_string(o["format"], "/format");
        if (cfg.format != "csv" && cfg.format != "json" && cfg.format != "both")
            semantic("/format", "expected csv, json or both");
    }
    if (o.contains("plot_data")) cfg.plot_data = get_bool(o["plot_data"], "/plot_data");
    if (o.contains("workers")) cfg.workers = get_int(o["workers"], "/workers");
    cfg.sweep.seed = cfg.seed;
    cfg.sweep.workers = cfg.workers;

    auto num = [&](const char* k) { return get_number(o[k], std::string("/") + k); };
    auto integer = [&](const char* k) { return get_int(o[k], std::string("/") + k); };
    if (command == "simulate") {
        SimulateParams& p = cfg.simulate;
        if (o.contains("n")) p.n = integer("n");
        if (o.contains("mu")) p.mu = num("mu");
        if (o.contains("t_end")) p.t_end = num("t_end");
        if (o.contains("samples")) p.samples = integer("samples");
        if (o.contains("epsilon0")) p.epsilon0 = get_epsilon0(o["epsilon0"], "/epsilon0");
        if (o.contains("max_events")) p.max_events = get_u64(o["max_events"], "/max_events");
        if (o.contains("event_log")) p.event_log = get_bool(o["event_log"], "/event_log");
        if (o.contains("path_integrals")) p.path_integrals = get_bool(o["path_integrals"], "/path_integrals");
    } else if (command == "solve-limit") {
        if (o.contains("n")) cfg.limit.n = integer("n");
        if (o.contains("t_end")) cfg.limit.options.t_end = num("t_end");
        if (o.contains("samples")) cfg.limit.options.samples = integer("samples");
    } else if (command == "spectral-check") {
        if (o.contains("n")) {
            cfg.spectral.ns.clear();
            if (o["n"].is_array())
                for (const auto& x : o["n"]) cfg.spectral.ns.push_back(get_int(x, "/n"));
            else
                cfg.spectral.ns.push_back(integer("n"));
        }
    } else if (command == "martingale-check") {
        if (o.contains("n")) cfg.martingale.n = integer("n");
        if (o.contains("mu")) cfg.martingale.mu = num("mu");
        if (o.contains("t_end")) cfg.martingale.t_end = num("t_end");
        if (o.contains("replicas")) cfg.martingale.replicas = integer("replicas");
    } else if (command == "lln-sweep") {
        if (o.contains("schedule")) {
            cfg.sweep.schedule = read_schedule(o["schedule"], "/schedule");
        } else if (o.contains("n")) {
            std::vector<int> ns;
            if (o["n"].is_array())
                for (const auto& x : o["n"]) ns.push_back(get_int(x, "/n"));
            else
                ns.push_back(integer("n"));
            cfg.sweep.schedule = default_schedule(ns);
        }
        if (o.contains("t_end")) cfg.sweep.t_end = num("t_end");
        if (o.contains("replicas")) cfg.sweep.replicas = integer("replicas");
        if (o.contains("epsilon0")) cfg.sweep.epsilon0 = get_epsilon0(o["epsilon0"], "/epsilon0");
    }
}

void check_config(const RunConfig& cfg) {
    if (cfg.workers < 1) throw std::invalid_argument("workers must be >= 1");
    const SimulateParams& s = cfg.simulate;
    if (auto e = check_scaling({s.n, s.mu}); !e.empty()) throw std::invalid_argument("simulate: " + e);
    if (!(s.t_end > 0.0)) throw std::invalid_argument("simulate: t_end must be positive");
    if (s.samples < 1) throw std::invalid_argument("simulate: samples must be >= 1");
    if (cfg.limit.n < 1) throw std::invalid_argument("limit: n must be >= 1");
    const LimitOptions& lo = cfg.limit.options;
    if (!(lo.t_end > 0.0) || !(lo.dt > 0.0) || !(lo.tol > 0.0) || lo.max_halvings < 0 || lo.samples < 1)
        throw std::invalid_argument("limit: t_end, dt, tol must be positive; samples >= 1; max_halvings >= 0");
    for (int n : cfg.spectral.ns)
        if (n < 1) throw std::invalid_argument("spectral: n must be >= 1");
    const MartingaleParams& m = cfg.martingale;
    if (auto e = check_scaling({m.n, m.mu}); !e.empty()) throw std::invalid_argument("martingale: " + e);
    if (m.replicas < 2) throw std::invalid_argument("martingale: replicas must be >= 2");
    if (!(m.t_end > 0.0)) throw std::invalid_argument("martingale: t_end must be positive");
    validate_plan(cfg.sweep);
}

json config_to_json(const RunConfig& cfg) {
    json j;
    j["network"] = network_to_json(cfg.network);
    j["network_source"] = cfg.network_source;
    j["seed"] = cfg.seed;
    j["output_dir"] = cfg.output_dir;
    j["format"] = cfg.format;
    j["plot_data"] = cfg.plot_data;
    j["workers"] = cfg.workers;
    const SimulateParams& s = cfg.simulate;
    j["simulate"] = {{"n", s.n},
                     {"mu", s.mu},
                     {"t_end", s.t_end},
                     {"samples", s.samples},
                     {"epsilon0", number_or_null(s.epsilon0)},
                     {"max_events", s.max_events},
                     {"trajectory", s.trajectory},
                     {"event_log", s.event_log},
                     {"path_integrals", s.path_integrals}};
    const LimitOptions& lo = cfg.limit.options;
    j["limit"] = {{"n", cfg.limit.n},     {"t_end", lo.t_end},       {"dt", lo.dt},
                  {"tol", lo.tol},        {"max_halvings", lo.max_halvings}, {"samples", lo.samples}};
    j["spectral"] = {{"n", cfg.spectral.ns}};
    const MartingaleParams& m = cfg.martingale;
    j["martingale"] = {{"n", m.n},
                       {"mu", m.mu},
                       {"replicas", m.replicas},
                       {"t_end", m.t_end},
                       {"z_threshold", m.z_threshold}};
    const SweepPlan& p = cfg.sweep;
    json sched = json::array();
    for (const auto& [n, mu] : p.schedule) sched.push_back({n, mu});
    j["sweep"] = {{"schedule", sched},
                  {"replicas", p.replicas},
                  {"t_end", p.t_end},
                  {"grid_points", p.grid_points},
                  {"epsilons", p.epsilons},
                  {"epsilon0", number_or_null(p.epsilon0)},
                  {"reference_n", p.reference_n},
                  {"martingale_replicas", p.martingale_replicas},
                  {"limit",
                   {{"dt", p.limit.dt},
                    {"tol", p.limit.tol},
                    {"max_halvings", p.limit.max_halvings},
                    {"samples", p.limit.samples}}}};
    return j;
}

}  // namespace msrd
