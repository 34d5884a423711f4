#include "commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "debit.hpp"
#include "grid.hpp"
#include "limit.hpp"
#include "lln.hpp"
#include "martingale.hpp"
#include "ssa.hpp"
#include "system.hpp"

namespace msrd {

using nlohmann::json;

namespace {

std::string fmt(const char* f, double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, x);
    return buf;
}

json num(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json grid_json(const GridFunction& g) { return json(g.vec()); }

bool want_csv(const RunConfig& cfg) { return cfg.format != "json"; }
bool want_json(const RunConfig& cfg) { return cfg.format != "csv"; }

std::string csv_prelude(const RunConfig& cfg) {
    return std::string("# ") + kVersion + "\n# config: " + artifact_config(cfg).dump() + "\n";
}

std::string json_artifact(const RunConfig& cfg, const std::string& command, json payload) {
    json j;
    j["version"] = kVersion;
    j["command"] = command;
    j["config"] = artifact_config(cfg);
    j["result"] = std::move(payload);
    return j.dump(2) + "\n";
}

double elapsed(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// validate ------------------------------------------------------------------

CommandResult cmd_validate(const RunConfig& cfg) {
    CommandResult res;
    const auto violations = validate_network(cfg.network);
    const Box box;
    json vj = json::array();
    for (const auto& v : violations)
        vj.push_back({{"reaction", v.reaction_index >= 0 ? json(v.reaction_index + 1) : json(nullptr)},
                      {"reason", v.reason}});
    json payload = {{"network", cfg.network.name}, {"valid", violations.empty()}, {"violations", vj}};
    std::ostringstream sum;
    sum << "network '" << cfg.network.name << "': " << cfg.network.reactions.size() << " reactions, "
        << (violations.empty() ? "valid" : "INVALID") << "\n";
    for (const auto& v : violations)
        sum << "  violation" << (v.reaction_index >= 0 ? " (reaction " + std::to_string(v.reaction_index + 1) + ")" : "")
            << ": " << v.reason << "\n";
    if (violations.empty()) {
        const AssumptionReport a = assumption_check(cfg.network, box);
        payload["assumptions"] = {
            {"box", {{"c_max", box.c_max}, {"d_max", box.d_max}, {"samples", box.samples}}},
            {"c1", {{"status", to_string(a.c1)}, {"min_f_at_zero", a.c1_min_f_at_zero}}},
            {"c2", {{"status", to_string(a.c2)}, {"radius", num(a.c2_radius)}, {"note", a.c2_note}}},
            {"d2", {{"status", to_string(a.d2)}, {"m1", a.d2_m1}, {"note", a.d2_note}}},
            {"advisory", true}};
        sum << "  C1 " << to_string(a.c1) << " (min F(0, y) = " << fmt("%.6g", a.c1_min_f_at_zero) << ")\n"
            << "  C2 " << to_string(a.c2) << (a.c2_note.empty() ? "" : " (" + a.c2_note + ")") << "\n"
            << "  D2 " << to_string(a.d2) << " (M1 = " << fmt("%.6g", a.d2_m1) << ")\n";
    }
    res.exit_code = violations.empty() ? 0 : 2;
    res.artifacts.push_back({"validation.json", json_artifact(cfg, "validate", payload)});
    res.summary = sum.str();
    return res;
}

// simulate ------------------------------------------------------------------

CommandResult cmd_simulate(const RunConfig& cfg) {
    CommandResult res;
    const auto t0 = std::chrono::steady_clock::now();
    const SimulateParams& p = cfg.simulate;
    const SpatialSystem sys(cfg.network, ScalingParams{p.n, p.mu});
    const PairField init = initial_state(cfg.network, p.n);
    const std::vector<double> times = uniform_times(p.t_end, p.samples);
    StopRule stop;
    stop.t_end = p.t_end;
    stop.max_events = p.max_events;
    SimOptions so;
    so.seed = cfg.seed;
    so.trajectory = p.trajectory;
    so.full_log = p.event_log;
    so.path_integrals = p.path_integrals;

    Trajectory tr;
    std::optional<LimitSolution> ref;
    try {
        if (std::isfinite(p.epsilon0)) {
            LimitOptions lo = cfg.limit.options;
            lo.t_end = p.t_end;
            ref = solve_discrete_limit(cfg.network, p.n, init, lo);
            stop.epsilon0 = p.epsilon0;
            stop.reference = &*ref;
            tr = truncated_simulate(sys, init, stop, times, so);
        } else {
            tr = simulate(sys, init, stop, times, so);
        }
    } catch (const PositivityViolation& e) {
        res.exit_code = 1;
        res.failure = "positivity";
        res.summary = std::string("simulation halted: ") + e.what() + "\n";
        return res;
    } catch (const NonConvergentError& e) {
        res.exit_code = 1;
        res.failure = "nonconvergent";
        res.summary = std::string("reference limit failed: ") + e.what() + "\n";
        return res;
    }

    json counts = json::object();
    for (int c = 0; c < kEvClassCount; ++c) counts[event_class_name(c)] = tr.event_counts[static_cast<std::size_t>(c)];
    json payload = {{"seed", tr.seed},
                    {"trajectory", tr.trajectory},
                    {"n", tr.n},
                    {"mu", tr.mu},
                    {"t_end", p.t_end},
                    {"final_time", tr.final_time},
                    {"events", tr.events},
                    {"event_counts", counts},
                    {"truncated", std::isfinite(p.epsilon0)},
                    {"epsilon0", num(p.epsilon0)},
                    {"tau", num(tr.tau)},
                    {"cap_exceeded", tr.cap_exceeded},
                    {"samples_written", tr.samples.size()},
                    {"final_state", {{"c", grid_json(tr.final_state.c)}, {"d", grid_json(tr.final_state.d)}}},
                    {"jumps",
                     {{"checked", tr.log.jumps_checked},
                      {"bound_violations", tr.log.bound_violations},
                      {"max_c", tr.log.max_jump_c},
                      {"max_d", tr.log.max_jump_d},
                      {"bound_c", sys.jump_bound_c()},
                      {"bound_d", sys.jump_bound_d()}}},
                    {"accumulators",
                     {{"sum_sq_c", grid_json(tr.log.sum_sq_c)},
                      {"sum_cross_c_next", grid_json(tr.log.sum_cross_c_next)},
                      {"sum_sq_d", grid_json(tr.log.sum_sq_d)}}}};
    if (tr.integrals) {
        const PathIntegrals& in = *tr.integrals;
        payload["integrals"] = {{"psi_c", grid_json(in.psi_c)},
                                {"psi_d", grid_json(in.psi_d)},
                                {"qv_c", grid_json(in.qv_c)},
                                {"cross_c_next", grid_json(in.cross_c_next)},
                                {"qv_d", grid_json(in.qv_d)}};
    }
    if (want_json(cfg)) res.artifacts.push_back({"trajectory.json", json_artifact(cfg, "simulate", payload)});
    if (want_csv(cfg)) {
        std::ostringstream os;
        os << csv_prelude(cfg);
        write_csv(os, tr);
        res.artifacts.push_back({"trajectory.csv", os.str()});
    }
    if (cfg.plot_data) {
        std::ostringstream os;
        os << csv_prelude(cfg) << "time,site,field,value\n";
        for (std::size_t k = 0; k < tr.samples.size(); ++k)
            for (std::size_t j = 0; j < tr.samples[k].c.size(); ++j) {
                os << fmt("%.17g", tr.sample_times[k]) << "," << j + 1 << ",u_c," << fmt("%.17g", tr.samples[k].c[j])
                   << "\n";
                os << fmt("%.17g", tr.sample_times[k]) << "," << j + 1 << ",u_d," << fmt("%.17g", tr.samples[k].d[j])
                   << "\n";
            }
        res.artifacts.push_back({"trajectory_plot.csv", os.str()});
    }
    if (p.event_log) {
        std::ostringstream os(std::ios::binary);
        write_event_log(os, tr, json({{"version", kVersion}, {"config", artifact_config(cfg)}}).dump());
        res.artifacts.push_back({"events.bin", os.str()});
    }

    std::ostringstream sum;
    sum << "simulated N = " << tr.n << ", mu = " << tr.mu << " to t = " << fmt("%.6g", tr.final_time) << ": "
        << tr.events << " events";
    if (std::isfinite(p.epsilon0))
        sum << ", tau = " << (std::isfinite(tr.tau) ? fmt("%.6g", tr.tau) : std::string("inf"));
    sum << "\n";
    if (tr.cap_exceeded) {
        sum << "event cap of " << p.max_events << " reached: partial trajectory written\n";
        res.exit_code = 1;
        res.failure = "event_cap";
    }
    res.summary = sum.str();
    res.diagnostics = "simulate runtime " + fmt("%.3f", elapsed(t0)) + " s\n";
    return res;
}

// solve-limit ---------------------------------------------------------------

CommandResult cmd_solve_limit(const RunConfig& cfg) {
    CommandResult res;
    const auto t0 = std::chrono::steady_clock::now();
    const int n = cfg.limit.n;
    const PairField v0 = initial_state(cfg.network, n);
    LimitSolution sol;
    try {
        sol = solve_discrete_limit(cfg.network, n, v0, cfg.limit.options);
    } catch (const NonConvergentError& e) {
        res.exit_code = 1;
        res.failure = "nonconvergent";
        res.summary = std::string("limit solve failed: ") + e.what() + "\n";
        return res;
    }
    const AssumptionReport a = assumption_check(cfg.network, Box{});
    const BoundsCheck b =
        check_bounds(sol, v0.c.sup_norm(), v0.d.sup_norm(), a.d2_m1, cfg.network.kernel.peak());
    json refine = json::array();
    for (const auto& r : sol.refinement) refine.push_back({{"dt", r.dt}, {"diff", num(r.diff)}});
    const PairField& last = sol.path.back();
    json payload = {{"n", sol.n},
                    {"method", sol.method},
                    {"dt", sol.dt},
                    {"converged", sol.converged},
                    {"refinement", refine},
                    {"max_c", sol.max_c},
                    {"max_d", sol.max_d},
                    {"min_value", sol.min_value},
                    {"negative_excursion", sol.negative_excursion},
                    {"bounds",
                     {{"rho_c", v0.c.sup_norm()},
                      {"rho_d", v0.d.sup_norm()},
                      {"m1", a.d2_m1},
                      {"cap_rho_c", b.cap_rho_c},
                      {"cap_rho_max", b.cap_rho_max},
                      {"envelope_d", b.envelope_d}}},
                    {"final_state", {{"c", grid_json(last.c)}, {"d", grid_json(last.d)}}}};
    if (want_json(cfg)) res.artifacts.push_back({"limit.json", json_artifact(cfg, "solve-limit", payload)});
    if (want_csv(cfg) || cfg.plot_data) {
        std::ostringstream os;
        os << csv_prelude(cfg);
        write_csv(os, sol);
        res.artifacts.push_back({"limit.csv", os.str()});
    }
    std::ostringstream sum;
    sum << "limit N = " << n << " converged at dt = " << fmt("%.6g", sol.dt) << " after " << sol.refinement.size() - 1
        << " halvings; sup v_C = " << fmt("%.6g", sol.max_c) << ", sup v_D = " << fmt("%.6g", sol.max_d) << "\n";
    if (sol.negative_excursion) sum << "warning: negative values below -1e-10 (min " << fmt("%.3g", sol.min_value) << ")\n";
    res.summary = sum.str();
    res.diagnostics = "solve-limit runtime " + fmt("%.3f", elapsed(t0)) + " s\n";
    return res;
}

// spectral-check ------------------------------------------------------------

struct SpectralRow {
    int n = 0;
    double eig_rel = 0.0;   // max ‖Δφ + βφ‖∞ / max(β, 1)
    double beta_rel = 0.0;  // max |β − 2N²(1 − cos(πm/N))| / max(β, 1)
    double gram = 0.0;      // max |⟨φ_a, φ_b⟩₂ − δ_ab|
    double contraction = 0.0;  // max ‖T_N(t)‖_{∞→∞} over probe times
    double symmetry = 0.0;     // max |[T 𝟙_i]_j − [T 𝟙_j]_i|
    double min_entry = 0.0;    // min entry of T_N(t)
    bool pass = false;
};

SpectralRow spectral_row(int n) {
    SpectralRow r;
    r.n = n;
    const SpectralBasis basis(n);
    const auto N = static_cast<std::size_t>(n);
    for (const auto& m : basis.modes()) {
        const GridFunction lap = discrete_laplacian(m.vec);
        double e = 0.0;
        for (std::size_t k = 0; k < N; ++k) e = std::max(e, std::fabs(lap[k] + m.beta * m.vec[k]));
        const double scale = std::max(m.beta, 1.0);
        r.eig_rel = std::max(r.eig_rel, e / scale);
        const double closed = 2.0 * n * n * (1.0 - std::cos(M_PI * m.m / n));
        r.beta_rel = std::max(r.beta_rel, std::fabs(m.beta - closed) / scale);
    }
    for (std::size_t a = 0; a < basis.size(); ++a)
        for (std::size_t b = 0; b < basis.size(); ++b) {
            const double g = inner(basis.modes()[a].vec, basis.modes()[b].vec);
            r.gram = std::max(r.gram, std::fabs(g - (a == b ? 1.0 : 0.0)));
        }
    r.min_entry = INFINITY;
    for (double t : {1e-4, 1e-3, 1e-2, 1e-1, 1.0}) {
        const std::vector<double> m = basis.matrix(t);
        for (std::size_t i = 0; i < N; ++i) {
            double row = 0.0;
            for (std::size_t j = 0; j < N; ++j) {
                row += std::fabs(m[i * N + j]);
                r.symmetry = std::max(r.symmetry, std::fabs(m[i * N + j] - m[j * N + i]));
                r.min_entry = std::min(r.min_entry, m[i * N + j]);
            }
            r.contraction = std::max(r.contraction, row);
        }
    }
    r.pass = basis.size() == N && r.eig_rel <= 1e-10 && r.beta_rel <= 1e-10 && r.gram <= 1e-12 &&
             r.contraction <= 1.0 + 1e-12 && r.symmetry <= 1e-12 && r.min_entry >= -1e-12;
    return r;
}

CommandResult cmd_spectral_check(const RunConfig& cfg) {
    CommandResult res;
    json rows = json::array();
    std::ostringstream csv, sum;
    csv << csv_prelude(cfg) << "n,eigen_residual,beta_residual,gram_error,contraction,symmetry_error,min_entry,pass\n";
    bool all = true;
    for (int n : cfg.spectral.ns) {
        const SpectralRow r = spectral_row(n);
        all = all && r.pass;
        rows.push_back({{"n", r.n},
                        {"eigen_residual", r.eig_rel},
                        {"beta_residual", r.beta_rel},
                        {"gram_error", r.gram},
                        {"contraction", r.contraction},
                        {"symmetry_error", r.symmetry},
                        {"min_entry", r.min_entry},
                        {"pass", r.pass}});
        csv << r.n << "," << fmt("%.17g", r.eig_rel) << "," << fmt("%.17g", r.beta_rel) << ","
            << fmt("%.17g", r.gram) << "," << fmt("%.17g", r.contraction) << "," << fmt("%.17g", r.symmetry) << ","
            << fmt("%.17g", r.min_entry) << "," << (r.pass ? "true" : "false") << "\n";
        sum << "N = " << r.n << ": eigen " << fmt("%.2e", r.eig_rel) << ", gram " << fmt("%.2e", r.gram)
            << ", contraction " << fmt("%.15g", r.contraction) << ", symmetry " << fmt("%.2e", r.symmetry) << " -> "
            << (r.pass ? "PASS" : "FAIL") << "\n";
    }
    if (want_json(cfg))
        res.artifacts.push_back({"spectral.json", json_artifact(cfg, "spectral-check", {{"rows", rows}, {"pass", all}})});
    if (want_csv(cfg)) res.artifacts.push_back({"spectral.csv", csv.str()});
    res.exit_code = all ? 0 : 3;
    res.summary = sum.str();
    return res;
}

// martingale-check ----------------------------------------------------------

CommandResult cmd_martingale_check(const RunConfig& cfg) {
    CommandResult res;
    const auto t0 = std::chrono::steady_clock::now();
    const MartingaleParams& p = cfg.martingale;
    const SpatialSystem sys(cfg.network, ScalingParams{p.n, p.mu});
    MartingaleOptions mo;
    mo.replicas = p.replicas;
    mo.t_end = p.t_end;
    mo.seed = cfg.seed;
    mo.workers = cfg.workers;
    MartingaleReport rep;
    try {
        rep = martingale_suite(sys, initial_state(cfg.network, p.n), mo);
    } catch (const std::runtime_error& e) {
        res.exit_code = 1;
        res.failure = "runtime";
        res.summary = std::string("martingale suite failed: ") + e.what() + "\n";
        return res;
    }
    const bool pass = rep.max_abs_z <= p.z_threshold && rep.bound_violations == 0;
    json stats = json::array();
    std::ostringstream csv;
    csv << csv_prelude(cfg) << "identity,site,mean,se,z\n";
    for (const auto& s : rep.stats) {
        stats.push_back({{"identity", s.identity}, {"site", s.site}, {"mean", s.mean}, {"se", s.se}, {"z", s.z}});
        csv << s.identity << "," << s.site << "," << fmt("%.17g", s.mean) << "," << fmt("%.17g", s.se) << ","
            << fmt("%.17g", s.z) << "\n";
    }
    json payload = {{"n", rep.n},
                    {"mu", rep.mu},
                    {"replicas", rep.replicas},
                    {"t_end", rep.t_end},
                    {"max_abs_z", rep.max_abs_z},
                    {"z_threshold", p.z_threshold},
                    {"events", rep.events},
                    {"jumps_checked", rep.jumps_checked},
                    {"bound_violations", rep.bound_violations},
                    {"pass", pass},
                    {"stats", stats}};
    if (want_json(cfg)) res.artifacts.push_back({"martingale.json", json_artifact(cfg, "martingale-check", payload)});
    if (want_csv(cfg)) res.artifacts.push_back({"martingale.csv", csv.str()});
    std::ostringstream sum;
    sum << rep.stats.size() << " statistics over " << rep.replicas << " replicas at N = " << rep.n
        << ", mu = " << rep.mu << ": max |z| = " << fmt("%.3f", rep.max_abs_z) << " (threshold "
        << fmt("%.3g", p.z_threshold) << "), jump-bound violations " << rep.bound_violations << " -> "
        << (pass ? "PASS" : "FAIL") << "\n";
    res.summary = sum.str();
    res.exit_code = pass ? 0 : 3;
    res.diagnostics = "martingale-check runtime " + fmt("%.3f", elapsed(t0)) + " s\n";
    return res;
}

// lln-sweep -----------------------------------------------------------------

json quantiles_json(const Quantiles& q) {
    return {{"q10", q.q10}, {"q25", q.q25}, {"median", q.median}, {"q75", q.q75}, {"q90", q.q90}};
}

CommandResult cmd_lln_sweep(const RunConfig& cfg) {
    CommandResult res;
    const ExperimentReport rep = lln_sweep(cfg.network, cfg.sweep);
    json rows = json::array();
    std::ostringstream csv, plot, sum, diag;
    csv << csv_prelude(cfg) << "n,mu,replica,trajectory,ok,error,error_discrete,tau,events,message\n";
    plot << csv_prelude(cfg) << "n,mu,replica,reference,error\n";
    sum << "reference resolution N_ref = " << rep.reference_n << "\n";
    for (const SweepRow& r : rep.rows) {
        json reps = json::array();
        std::uint64_t checked = 0, violations = 0;
        for (const auto& x : r.replicas) {
            checked += x.jumps_checked;
            violations += x.bound_violations;
            reps.push_back({{"replica", x.replica},
                            {"trajectory", x.trajectory},
                            {"ok", x.ok},
                            {"error", x.ok ? json(x.errors[1]) : json(nullptr)},
                            {"error_discrete", x.ok ? json(x.errors[0]) : json(nullptr)},
                            {"tau", num(x.tau)},
                            {"events", x.events},
                            {"message", x.message}});
            csv << r.n << "," << fmt("%.17g", r.mu) << "," << x.replica << "," << x.trajectory << ","
                << (x.ok ? "true" : "false") << "," << (x.ok ? fmt("%.17g", x.errors[1]) : "") << ","
                << (x.ok ? fmt("%.17g", x.errors[0]) : "") << "," << (std::isfinite(x.tau) ? fmt("%.17g", x.tau) : "inf")
                << "," << x.events << "," << x.message << "\n";
            if (x.ok) {
                plot << r.n << "," << fmt("%.17g", r.mu) << "," << x.replica << ",limit," << fmt("%.17g", x.errors[1])
                     << "\n";
                plot << r.n << "," << fmt("%.17g", r.mu) << "," << x.replica << ",discrete_limit,"
                     << fmt("%.17g", x.errors[0]) << "\n";
            }
        }
        json exc = json::object();
        for (std::size_t e = 0; e < r.exceedance.size(); ++e)
            exc[fmt("%g", cfg.sweep.epsilons[e])] = r.exceedance[e];
        rows.push_back({{"n", r.n},
                        {"mu", r.mu},
                        {"log_n_over_mu", std::log(r.n) / r.mu},
                        {"error", quantiles_json(r.error)},
                        {"error_discrete", quantiles_json(r.error_discrete)},
                        {"exceedance", exc},
                        {"tau_fraction", r.tau_fraction},
                        {"limit_error", r.limit_error},
                        {"jumps_checked", checked},
                        {"bound_violations", violations},
                        {"replicas", reps}});
        sum << "N = " << r.n << ", mu = " << r.mu << ": median " << fmt("%.4f", r.error.median) << ", q90 "
            << fmt("%.4f", r.error.q90) << ", P(err > eps) =";
        for (std::size_t e = 0; e < r.exceedance.size(); ++e)
            sum << " " << fmt("%.2f", r.exceedance[e]) << "@" << fmt("%g", cfg.sweep.epsilons[e]);
        sum << ", tau < T in " << fmt("%.2f", r.tau_fraction) << "\n";
        diag << "lln-sweep N = " << r.n << " runtime " << fmt("%.3f", r.runtime_seconds) << " s\n";
    }
    json payload = {{"reference_n", rep.reference_n},
                    {"schedule_mu_rule", "mu = 4N unless given"},
                    {"seed", cfg.seed},
                    {"rows", rows}};
    if (rep.martingale) {
        json stats = json::array();
        for (const auto& s : rep.martingale->stats)
            stats.push_back({{"identity", s.identity}, {"site", s.site}, {"mean", s.mean}, {"se", s.se}, {"z", s.z}});
        payload["martingale"] = {{"n", rep.martingale->n},
                                 {"mu", rep.martingale->mu},
                                 {"replicas", rep.martingale->replicas},
                                 {"max_abs_z", rep.martingale->max_abs_z},
                                 {"stats", stats}};
    }
    if (want_json(cfg)) res.artifacts.push_back({"sweep.json", json_artifact(cfg, "lln-sweep", payload)});
    if (want_csv(cfg)) res.artifacts.push_back({"sweep.csv", csv.str()});
    if (cfg.plot_data) res.artifacts.push_back({"sweep_plot.csv", plot.str()});
    diag << "lln-sweep total runtime " << fmt("%.3f", rep.runtime_seconds) << " s\n";
    res.summary = sum.str();
    res.diagnostics = diag.str();
    return res;
}

}  // namespace

json artifact_config(const RunConfig& cfg) {
    json j = config_to_json(cfg);
    j.erase("output_dir");
    j.erase("workers");
    return j;
}

const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names{"validate",       "simulate",         "solve-limit",
                                                "spectral-check", "martingale-check", "lln-sweep"};
    return names;
}

CommandResult run_command(const std::string& command, const RunConfig& cfg) {
    check_config(cfg);
    if (command == "validate") return cmd_validate(cfg);
    if (command == "simulate") return cmd_simulate(cfg);
    if (command == "solve-limit") return cmd_solve_limit(cfg);
    if (command == "spectral-check") return cmd_spectral_check(cfg);
    if (command == "martingale-check") return cmd_martingale_check(cfg);
    if (command == "lln-sweep") return cmd_lln_sweep(cfg);
    throw std::invalid_argument("unknown command '" + command + "'");
}

}  // namespace msrd
