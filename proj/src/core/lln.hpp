#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "limit.hpp"
#include "martingale.hpp"
#include "ssa.hpp"
#include "system.hpp"

namespace msrd {

struct EnsembleOptions {
    int replicas = 20;
    double t_end = 1.0;
    std::uint64_t seed = 0;
    std::uint64_t stream_offset = 0;  // trajectory index of replica 0
    int grid_points = 200;            // uniform cells on [0, t_end]
    double epsilon0 = 0.5;            // τ threshold against the first reference
    std::uint64_t max_events = 4'000'000'000ull;
    int workers = 1;
};

struct ReplicaResult {
    int replica = 0;
    std::uint64_t trajectory = 0;
    bool ok = false;
    std::string message;             // failure text when !ok
    std::vector<double> errors;      // sup error against each reference
    double tau = INFINITY;           // start of the first cell deviating by more than ε₀
    std::uint64_t events = 0;
    std::uint64_t jumps_checked = 0;
    std::uint64_t bound_violations = 0;
    double max_jump_c = 0.0;
    double max_jump_d = 0.0;
};

// Tracks sup_t ‖u(t) − v(t)‖_{∞,∞} for several references. The stochastic path is
// handled exactly between events; references are frozen on each grid cell at its left end
// and the terminal state is compared with v(T).
class ErrorTracker : public SimObserver {
public:
    // grid and refs are borrowed and must outlive the tracker.
    ErrorTracker(const std::vector<double>& grid, const std::vector<std::vector<PairField>>& refs, double epsilon0);

    void on_start(double t, const PairField& u) override;
    void before_event(double t, const ChannelRef& ch, const PairField& u) override;
    void after_event(double t, const ChannelRef& ch, const PairField& u) override;
    void on_stop(double t, const PairField& u) override;

    const std::vector<double>& errors() const { return errors_; }
    double tau() const { return tau_; }
    bool complete() const { return complete_; }

private:
    void advance(double t, const PairField& u);
    void close_subcell(const PairField& u);
    void reset(const PairField& u);

    const std::vector<double>& grid_;
    const std::vector<std::vector<PairField>>& refs_;  // refs_[r][k] = v_r(grid_[k])
    double epsilon0_;
    std::size_t cell_ = 0;
    std::vector<double> hi_, lo_;
    std::vector<double> errors_;
    double tau_ = INFINITY;
    bool complete_ = false;
};

// Independent replicas of u^N from `initial`, each compared with every reference on a
// uniform grid. references[0] is v^N and drives τ. References must live on sys.n() sites
// and cover [0, t_end]. Results are ordered by replica index.
std::vector<ReplicaResult> run_ensemble(const SpatialSystem& sys, const PairField& initial,
                                        const std::vector<const LimitSolution*>& references,
                                        const EnsembleOptions& opt);

struct SweepPlan {
    std::vector<std::pair<int, double>> schedule{{8, 32.0}, {16, 64.0}, {32, 128.0}};
    int replicas = 20;
    double t_end = 1.0;
    std::uint64_t seed = 0;
    int grid_points = 200;
    std::vector<double> epsilons{0.05, 0.1, 0.2};
    double epsilon0 = 0.5;
    int reference_n = 0;  // 0 selects a multiple of every N, at least 256
    int workers = 1;
    int martingale_replicas = 0;  // > 0 runs the martingale suite at the first pair
    LimitOptions limit{};
};

// Throws std::invalid_argument naming the first violated constraint.
void validate_plan(const SweepPlan& plan);
// Resolution of the limit that stands in for v.
int resolve_reference_n(const SweepPlan& plan);
// Schedule with μ = 4N for each N.
std::vector<std::pair<int, double>> default_schedule(const std::vector<int>& ns);

struct Quantiles {
    double q10 = 0.0, q25 = 0.0, median = 0.0, q75 = 0.0, q90 = 0.0;
};
// Linear interpolation between order statistics. Throws on empty input.
Quantiles quantiles(std::vector<double> xs);

struct SweepRow {
    int n = 0;
    double mu = 0.0;
    std::vector<ReplicaResult> replicas;  // errors[0] vs v^N, errors[1] vs v
    Quantiles error;                       // against v
    Quantiles error_discrete;              // against v^N
    std::vector<double> exceedance;        // per plan epsilon, against v
    double tau_fraction = 0.0;             // replicas with τ < T
    double limit_error = 0.0;              // ‖v^N − P_N v‖ on shared samples
    double runtime_seconds = 0.0;
};

struct ExperimentReport {
    SweepPlan plan;
    int reference_n = 0;
    std::vector<SweepRow> rows;
    std::optional<MartingaleReport> martingale;
    double runtime_seconds = 0.0;
};

ExperimentReport lln_sweep(const NetworkSpec& spec, const SweepPlan& plan);

}  // namespace msrd
