#include "lln.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace msrd {

namespace {

std::size_t idx(int i) { return static_cast<std::size_t>(i); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

ErrorTracker::ErrorTracker(const std::vector<double>& grid, const std::vector<std::vector<PairField>>& refs,
                           double epsilon0)
    : grid_(grid), refs_(refs), epsilon0_(epsilon0), errors_(refs.size(), 0.0) {
    if (grid_.size() < 2) throw std::invalid_argument("ErrorTracker: grid needs at least two points");
    for (const auto& r : refs_)
        if (r.size() != grid_.size()) throw std::invalid_argument("ErrorTracker: reference not sampled on the grid");
}

void ErrorTracker::reset(const PairField& u) {
    hi_.assign(u.c.data(), u.c.data() + u.c.size());
    lo_ = hi_;
}

void ErrorTracker::close_subcell(const PairField& u) {
    for (std::size_t r = 0; r < refs_.size(); ++r) {
        const PairField& v = refs_[r][cell_];
        double sc = 0.0, sd = 0.0;
        for (std::size_t j = 0; j < hi_.size(); ++j) {
            sc = std::max({sc, hi_[j] - v.c[j], v.c[j] - lo_[j]});
            sd = std::max(sd, std::fabs(u.d[j] - v.d[j]));
        }
        errors_[r] = std::max(errors_[r], sc + sd);
        if (r == 0 && sc + sd > epsilon0_ && !std::isfinite(tau_)) tau_ = grid_[cell_];
    }
}

void ErrorTracker::advance(double t, const PairField& u) {
    while (cell_ + 1 < grid_.size() && grid_[cell_ + 1] <= t) {
        close_subcell(u);
        ++cell_;
        reset(u);
    }
}

void ErrorTracker::on_start(double /*t*/, const PairField& u) {
    cell_ = 0;
    complete_ = false;
    tau_ = INFINITY;
    std::fill(errors_.begin(), errors_.end(), 0.0);
    reset(u);
}

void ErrorTracker::before_event(double t, const ChannelRef& ch, const PairField& u) {
    advance(t, u);
    if (ch.kind == ChannelKind::Slow) close_subcell(u);
}

void ErrorTracker::after_event(double /*t*/, const ChannelRef& ch, const PairField& u) {
    if (ch.kind == ChannelKind::Slow) {
        reset(u);
        return;
    }
    const int n = u.n();
    auto touch = [&](int k) {
        const auto kk = idx(k);
        hi_[kk] = std::max(hi_[kk], u.c[kk]);
        lo_[kk] = std::min(lo_[kk], u.c[kk]);
    };
    touch(ch.site);
    if (ch.kind != ChannelKind::Fast) {
        touch((ch.site + 1) % n);
        touch((ch.site + n - 1) % n);
    }
}

void ErrorTracker::on_stop(double t, const PairField& u) {
    advance(t, u);
    if (cell_ + 1 != grid_.size()) return;
    for (std::size_t r = 0; r < refs_.size(); ++r) {
        const double dev = sup_distance(u, refs_[r].back());
        errors_[r] = std::max(errors_[r], dev);
        if (r == 0 && dev > epsilon0_ && !std::isfinite(tau_)) tau_ = grid_.back();
    }
    complete_ = true;
}

std::vector<ReplicaResult> run_ensemble(const SpatialSystem& sys, const PairField& initial,
                                        const std::vector<const LimitSolution*>& references,
                                        const EnsembleOptions& opt) {
    if (opt.replicas < 1) throw std::invalid_argument("run_ensemble: replicas must be >= 1");
    if (opt.grid_points < 1) throw std::invalid_argument("run_ensemble: grid_points must be >= 1");
    if (!(opt.t_end > 0.0)) throw std::invalid_argument("run_ensemble: t_end must be positive");
    if (references.empty()) throw std::invalid_argument("run_ensemble: at least one reference is required");
    for (const LimitSolution* ref : references) {
        if (!ref || ref->n != sys.n()) throw std::invalid_argument("run_ensemble: reference resolution differs");
        if (ref->t_end() < opt.t_end - 1e-12)
            throw std::invalid_argument("run_ensemble: reference horizon shorter than t_end");
    }
    const std::vector<double> grid = uniform_times(opt.t_end, opt.grid_points);
    std::vector<std::vector<PairField>> refs;
    for (const LimitSolution* ref : references) {
        std::vector<PairField> samples;
        samples.reserve(grid.size());
        for (double t : grid) samples.push_back(ref->at(t));
        refs.push_back(std::move(samples));
    }

    std::vector<ReplicaResult> out(idx(opt.replicas));
    parallel_for(out.size(), opt.workers, [&](std::size_t i) {
        ReplicaResult& res = out[i];
        res.replica = static_cast<int>(i);
        res.trajectory = opt.stream_offset + i;
        ErrorTracker tracker(grid, refs, opt.epsilon0);
        SimOptions so;
        so.seed = opt.seed;
        so.trajectory = res.trajectory;
        so.observer = &tracker;
        StopRule stop;
        stop.t_end = opt.t_end;
        stop.max_events = opt.max_events;
        try {
            const Trajectory tr = simulate(sys, initial, stop, {}, so);
            res.events = tr.events;
            res.jumps_checked = tr.log.jumps_checked;
            res.bound_violations = tr.log.bound_violations;
            res.max_jump_c = tr.log.max_jump_c;
            res.max_jump_d = tr.log.max_jump_d;
            if (tr.cap_exceeded || !tracker.complete()) {
                res.message = "event cap exceeded";
                return;
            }
            res.errors = tracker.errors();
            res.tau = tracker.tau();
            res.ok = true;
        } catch (const std::exception& e) {
            res.message = e.what();
        }
    });
    return out;
}

std::vector<std::pair<int, double>> default_schedule(const std::vector<int>& ns) {
    std::vector<std::pair<int, double>> s;
    for (int n : ns) s.emplace_back(n, 4.0 * n);
    return s;
}

void validate_plan(const SweepPlan& plan) {
    if (plan.schedule.empty()) throw std::invalid_argument("plan: schedule is empty");
    for (std::size_t i = 0; i < plan.schedule.size(); ++i) {
        const auto [n, mu] = plan.schedule[i];
        if (auto err = check_scaling(ScalingParams{n, mu}); !err.empty())
            throw std::invalid_argument("plan: " + err + " (pair " + std::to_string(i + 1) + ")");
        if (i > 0) {
            const auto [n0, mu0] = plan.schedule[i - 1];
            if (!(std::log(n) / mu < std::log(n0) / mu0))
                throw std::invalid_argument("plan: log(N)/mu must be strictly decreasing along the schedule (pair " +
                                            std::to_string(i + 1) + ")");
        }
    }
    if (plan.replicas < 1) throw std::invalid_argument("plan: replicas must be >= 1");
    if (!(plan.t_end > 0.0)) throw std::invalid_argument("plan: t_end must be positive");
    if (plan.grid_points < 200) throw std::invalid_argument("plan: grid_points must be >= 200");
    if (plan.epsilons.empty()) throw std::invalid_argument("plan: epsilon list is empty");
    for (double e : plan.epsilons)
        if (!(e > 0.0)) throw std::invalid_argument("plan: epsilons must be positive");
    if (!(plan.epsilon0 >= 0.0)) throw std::invalid_argument("plan: epsilon0 must be >= 0");
    if (plan.workers < 1) throw std::invalid_argument("plan: workers must be >= 1");
    if (plan.martingale_replicas < 0) throw std::invalid_argument("plan: martingale_replicas must be >= 0");
    if (plan.reference_n < 0) throw std::invalid_argument("plan: reference_n must be >= 0");
    if (plan.reference_n > 0)
        for (const auto& [n, mu] : plan.schedule)
            if (plan.reference_n % n != 0)
                throw std::invalid_argument("plan: reference_n must be a multiple of every N");
}

int resolve_reference_n(const SweepPlan& plan) {
    if (plan.reference_n > 0) return plan.reference_n;
    long l = 1;
    int max_n = 1;
    for (const auto& [n, mu] : plan.schedule) {
        l = std::lcm(l, static_cast<long>(n));
        max_n = std::max(max_n, n);
        if (l > 8192) throw std::invalid_argument("plan: no common reference resolution up to 8192");
    }
    long r = l;
    while (r < 256 || r < 8L * max_n) r += l;
    if (r > 8192) throw std::invalid_argument("plan: no common reference resolution up to 8192");
    return static_cast<int>(r);
}

Quantiles quantiles(std::vector<double> xs) {
    if (xs.empty()) throw std::invalid_argument("quantiles: empty sample");
    std::sort(xs.begin(), xs.end());
    auto q = [&](double p) {
        const double h = p * static_cast<double>(xs.size() - 1);
        const auto lo = static_cast<std::size_t>(std::floor(h));
        const std::size_t hi = std::min(lo + 1, xs.size() - 1);
        return xs[lo] + (h - static_cast<double>(lo)) * (xs[hi] - xs[lo]);
    };
    return Quantiles{q(0.10), q(0.25), q(0.50), q(0.75), q(0.90)};
}

ExperimentReport lln_sweep(const NetworkSpec& spec, const SweepPlan& plan) {
    validate_plan(plan);
    const auto t0 = std::chrono::steady_clock::now();
    ExperimentReport rep;
    rep.plan = plan;
    rep.reference_n = resolve_reference_n(plan);

    LimitOptions lopt = plan.limit;
    lopt.t_end = plan.t_end;
    if (lopt.samples % plan.grid_points != 0)
        lopt.samples = plan.grid_points * ((lopt.samples + plan.grid_points - 1) / plan.grid_points);
    const LimitSolution v_ref =
        solve_discrete_limit(spec, rep.reference_n, initial_state(spec, rep.reference_n), lopt);

    for (std::size_t i = 0; i < plan.schedule.size(); ++i) {
        const auto t_row = std::chrono::steady_clock::now();
        const auto [n, mu] = plan.schedule[i];
        const SpatialSystem sys(spec, ScalingParams{n, mu});
        const PairField init = initial_state(spec, n);
        const LimitSolution v_n = solve_discrete_limit(spec, n, init, lopt);
        const LimitSolution v_p = block_average(v_ref, n);

        SweepRow row;
        row.n = n;
        row.mu = mu;
        row.limit_error = limit_error(v_n, v_ref);
        EnsembleOptions eo;
        eo.replicas = plan.replicas;
        eo.t_end = plan.t_end;
        eo.seed = plan.seed;
        eo.stream_offset = static_cast<std::uint64_t>(i) << 32;
        eo.grid_points = plan.grid_points;
        eo.epsilon0 = plan.epsilon0;
        eo.workers = plan.workers;
        row.replicas = run_ensemble(sys, init, {&v_n, &v_p}, eo);

        std::vector<double> err, err_n;
        std::size_t early = 0;
        for (const auto& r : row.replicas) {
            if (!r.ok) continue;
            err_n.push_back(r.errors[0]);
            err.push_back(r.errors[1]);
            if (r.tau < plan.t_end) ++early;
        }
        if (err.empty()) throw std::runtime_error("lln_sweep: every replica failed at N = " + std::to_string(n));
        row.error = quantiles(err);
        row.error_discrete = quantiles(err_n);
        for (double eps : plan.epsilons) {
            const auto hits = std::count_if(err.begin(), err.end(), [&](double e) { return e > eps; });
            row.exceedance.push_back(static_cast<double>(hits) / static_cast<double>(err.size()));
        }
        row.tau_fraction = static_cast<double>(early) / static_cast<double>(err.size());

        if (i == 0 && plan.martingale_replicas > 0) {
            MartingaleOptions mo;
            mo.replicas = plan.martingale_replicas;
            mo.t_end = plan.t_end;
            mo.seed = plan.seed;
            mo.workers = plan.workers;
            rep.martingale = martingale_suite(sys, init, mo);
        }
        row.runtime_seconds = seconds_since(t_row);
        rep.rows.push_back(std::move(row));
    }
    rep.runtime_seconds = seconds_since(t0);
    return rep;
}

}  // namespace msrd
