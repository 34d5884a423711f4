#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "msrd/msrd.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Flags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out, format, network;
    std::optional<int> workers, replicas, samples;
    std::vector<int> n;
    std::optional<double> mu, t_end, epsilon0;
    std::optional<std::uint64_t> max_events;
    bool plot_data = false;
    bool event_log = false;
    bool no_integrals = false;
    bool quiet = false;
};

void add_common(CLI::App* sub, Flags& f) {
    sub->add_option("--config", f.config, "JSON config file");
    sub->add_option("--seed", f.seed, "Master seed (overrides MSRD_SEED and the config)");
    sub->add_option("--out", f.out, "Output directory");
    sub->add_option("--workers", f.workers, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--format", f.format, "Artifact format")->check(CLI::IsMember({"csv", "json", "both"}));
    sub->add_option("--network", f.network, "Network JSON file");
    sub->add_flag("--plot-data", f.plot_data, "Also emit tidy CSV for plotting");
    sub->add_flag("-q,--quiet", f.quiet, "Suppress the summary");
}

// Returns nullopt and prints a message if MSRD_SEED is malformed.
bool env_seed(std::optional<std::uint64_t>& seed) {
    const char* s = std::getenv("MSRD_SEED");
    if (!s || !*s) return true;
    errno = 0;
    char* end = nullptr;
    const unsigned long long v = std::strtoull(s, &end, 10);
    if (errno != 0 || *end != '\0' || *s == '-') {
        std::cerr << "error: MSRD_SEED must be a non-negative integer, got '" << s << "'\n";
        return false;
    }
    seed = v;
    return true;
}

json overrides_of(const std::string& command, const Flags& f) {
    json o = json::object();
    if (f.seed) o["seed"] = *f.seed;
    if (f.out) o["output_dir"] = *f.out;
    if (f.format) o["format"] = *f.format;
    if (f.workers) o["workers"] = *f.workers;
    if (f.network) o["network_file"] = *f.network;
    if (f.plot_data) o["plot_data"] = true;
    if (!f.n.empty()) {
        if (command == "spectral-check" || command == "lln-sweep")
            o["n"] = f.n;
        else
            o["n"] = f.n.front();
    }
    if (f.mu) o["mu"] = *f.mu;
    if (f.t_end) o["t_end"] = *f.t_end;
    if (f.replicas) o["replicas"] = *f.replicas;
    if (f.samples) o["samples"] = *f.samples;
    if (f.epsilon0) o["epsilon0"] = *f.epsilon0;
    if (f.max_events) o["max_events"] = *f.max_events;
    if (f.event_log) o["event_log"] = true;
    if (f.no_integrals) o["path_integrals"] = false;
    return o;
}

int exit_for_status(msrd_status s) {
    switch (s) {
        case MSRD_OK: return 0;
        case MSRD_INVALID_ARGUMENT:
        case MSRD_PARSE:
        case MSRD_VALIDATION: return 2;
        case MSRD_CHECK_FAILED: return 3;
        default: return 1;
    }
}

bool write_artifacts(const msrd_result* r) {
    const fs::path dir = msrd_result_output_dir(r);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        std::cerr << "error: cannot create " << dir.string() << ": " << ec.message() << "\n";
        return false;
    }
    for (std::size_t i = 0; i < msrd_result_artifact_count(r); ++i) {
        std::size_t size = 0;
        const char* data = msrd_result_artifact_data(r, i, &size);
        const fs::path p = dir / msrd_result_artifact_name(r, i);
        std::ofstream os(p, std::ios::binary);
        os.write(data, static_cast<std::streamsize>(size));
        if (!os) {
            std::cerr << "error: cannot write " << p.string() << "\n";
            return false;
        }
    }
    return true;
}

int run(const std::string& command, Flags f) {
    if (!f.seed && !env_seed(f.seed)) return 2;
    std::string config_text, base_dir = ".";
    if (!f.config.empty()) {
        std::ifstream in(f.config, std::ios::binary);
        if (!in) {
            std::cerr << "error: cannot open config " << f.config << "\n";
            return 2;
        }
        std::ostringstream ss;
        ss << in.rdbuf();
        config_text = ss.str();
        base_dir = fs::path(f.config).parent_path().string();
        if (base_dir.empty()) base_dir = ".";
    }
    const std::string overrides = overrides_of(command, f).dump();
    msrd_result* r = nullptr;
    const msrd_status s =
        msrd_run(command.c_str(), config_text.empty() ? nullptr : config_text.c_str(), overrides.c_str(),
                 base_dir.c_str(), &r);
    if (!r) {
        std::cerr << "error: " << msrd_last_error() << "\n";
        return exit_for_status(s);
    }
    int code = msrd_result_exit_code(r);
    if (!write_artifacts(r)) code = 1;
    if (!f.quiet) std::cout << msrd_result_summary(r);
    std::cerr << msrd_result_diagnostics(r);
    if (code == 0 && s != MSRD_OK) code = exit_for_status(s);
    msrd_result_free(r);
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multiscale reaction-diffusion simulator"};
    app.set_version_flag("--version", msrd_version());
    app.require_subcommand(1);
    Flags f;
    std::string chosen;

    auto* validate = app.add_subcommand("validate", "Validate a network and report assumption checks");
    add_common(validate, f);

    auto* simulate = app.add_subcommand("simulate", "Simulate one trajectory");
    add_common(simulate, f);
    simulate->add_option("--n", f.n, "Number of sites")->expected(1);
    simulate->add_option("--mu", f.mu, "Scale separation");
    simulate->add_option("--t-end", f.t_end, "Horizon");
    simulate->add_option("--samples", f.samples, "Uniform snapshot intervals");
    simulate->add_option("--epsilon0", f.epsilon0, "Truncation radius against the discrete limit");
    simulate->add_option("--max-events", f.max_events, "Event cap");
    simulate->add_flag("--event-log", f.event_log, "Write events.bin for replay");
    simulate->add_flag("--no-integrals", f.no_integrals, "Skip path integrals (O(N^2) per event)");

    auto* limit = app.add_subcommand("solve-limit", "Solve the discrete limit system");
    add_common(limit, f);
    limit->add_option("--n", f.n, "Number of sites")->expected(1);
    limit->add_option("--t-end", f.t_end, "Horizon");
    limit->add_option("--samples", f.samples, "Uniform output intervals");

    auto* spectral = app.add_subcommand("spectral-check", "Check the discrete Laplacian eigenbasis and semigroup");
    add_common(spectral, f);
    spectral->add_option("--n", f.n, "Grid sizes")->delimiter(',');

    auto* mg = app.add_subcommand("martingale-check", "Monte Carlo check of martingale identities");
    add_common(mg, f);
    mg->add_option("--n", f.n, "Number of sites")->expected(1);
    mg->add_option("--mu", f.mu, "Scale separation");
    mg->add_option("--t-end", f.t_end, "Horizon");
    mg->add_option("--replicas", f.replicas, "Replicas");

    auto* sweep = app.add_subcommand("lln-sweep", "Convergence sweep against the continuum limit");
    add_common(sweep, f);
    sweep->add_option("--n", f.n, "Grid sizes (mu = 4N)")->delimiter(',');
    sweep->add_option("--t-end", f.t_end, "Horizon");
    sweep->add_option("--replicas", f.replicas, "Replicas per (N, mu)");
    sweep->add_option("--epsilon0", f.epsilon0, "Stopping-time radius");

    for (auto* s : app.get_subcommands({})) s->callback([&chosen, s] { chosen = s->get_name(); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }
    return run(chosen, f);
}
