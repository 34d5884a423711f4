#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "event_table.hpp"
#include "helpers.hpp"
#include "limit.hpp"
#include "rng.hpp"
#include "ssa.hpp"
#include "system.hpp"

using namespace msrd;
using msrd::test::reaction;

namespace {

PairField constant_field(int n, double c, double d) {
    return PairField(GridFunction(static_cast<std::size_t>(n), c), GridFunction(static_cast<std::size_t>(n), d));
}

// Diffusion only: one FastC channel with a zero rate.
NetworkSpec diffusion_network() {
    NetworkSpec s = test::empty_network();
    s.reactions = {reaction(ReactionClass::FastC, 1, 0, {{0.0, 0, 0}})};
    return s;
}

NetworkSpec slow_d_network(int gamma_d, Monomial rate) {
    NetworkSpec s = test::empty_network();
    s.reactions = {reaction(ReactionClass::SlowD, 0, gamma_d, {rate})};
    return s;
}

}  // namespace

TEST_SUITE("ssa") {

TEST_CASE("event table sampling") {
    EventTable t(5);
    t.assign({0.0, 1.0, 0.0, 3.0, 0.0});
    CHECK(t.total() == 4.0);
    CHECK(t.sample(0.0) == 1);
    CHECK(t.sample(0.999) == 1);
    CHECK(t.sample(1.0) == 3);
    CHECK(t.sample(3.9999) == 3);
    t.set(4, 2.0);
    CHECK(t.total() == doctest::Approx(6.0));
    CHECK(t.sample(5.5) == 4);
    t.set(3, 0.0);
    CHECK(t.sample(1.5) == 4);

    // Frequencies follow the rates.
    EventTable u(7);
    u.assign({1, 2, 3, 4, 5, 6, 7});
    RandomStream rng(4, 0);
    std::vector<int> hits(7);
    const int draws = 280000;
    for (int i = 0; i < draws; ++i) ++hits[u.sample(rng.uniform() * u.total())];
    for (int k = 0; k < 7; ++k) {
        const double p = (k + 1) / 28.0;
        CHECK(std::fabs(hits[static_cast<std::size_t>(k)] - draws * p) < 4 * std::sqrt(draws * p * (1 - p)));
    }
}

TEST_CASE("total rate") {
    NetworkSpec s = test::empty_network();
    s.reactions = {reaction(ReactionClass::FastC, 1, 0, {{1.0, 0, 0}})};
    const SpatialSystem sys(s, {2, 10.0});
    CHECK(total_rate(sys, constant_field(2, 0.5, 0.0)) == doctest::Approx(100.0).epsilon(1e-14));

    NetworkSpec z = test::empty_network();
    z.reactions = {reaction(ReactionClass::FastC, -1, 0, {{1.0, 1, 0}}),
                   reaction(ReactionClass::SlowD, 0, -1, {{0.3, 0, 1}})};
    CHECK(total_rate(SpatialSystem(z, {5, 20.0}), constant_field(5, 0.0, 0.0)) == 0.0);
}

TEST_CASE("slow jump vectors") {
    const SpatialSystem death(slow_d_network(-1, {1.0, 0, 1}), {2, 10.0});
    // θ also gates on u_C, so C sits at 1 throughout.
    PairField a = constant_field(2, 1.0, 5.0);
    PairField j = slow_jump_vectors(death, a, 0, 0);
    CHECK(j.d[0] == doctest::Approx(-0.5));
    CHECK(j.d[1] == doctest::Approx(-0.5));
    CHECK(j.c.sup_norm() == 0.0);

    a.d[0] = 0.0;
    j = slow_jump_vectors(death, a, 1, 0);
    CHECK(j.d[0] == 0.0);
    CHECK(j.d[1] == doctest::Approx(-0.5));

    const SpatialSystem birth(slow_d_network(+1, {1.0, 0, 0}), {2, 10.0});
    j = slow_jump_vectors(birth, constant_field(2, 1.0, 0.0), 0, 0);
    CHECK(slow_jump_vectors(birth, constant_field(2, 0.0, 0.0), 0, 0).d.sup_norm() == 0.0);
    CHECK(j.d[0] == doctest::Approx(0.25));
    CHECK(j.d[1] == doctest::Approx(0.25));

    NetworkSpec fast = test::empty_network();
    fast.reactions = {reaction(ReactionClass::FastC, 1, 0, {{1.0, 0, 0}})};
    CHECK_THROWS_AS(slow_jump_vectors(SpatialSystem(fast, {2, 10.0}), a, 0, 0), std::invalid_argument);
}

TEST_CASE("slow jumps respect the kernel bound") {
    NetworkSpec s = reference_network();
    s.reactions.push_back(reaction(ReactionClass::SlowMixed, 2, -1, {{0.1, 1, 1}}));
    for (int n : {3, 8}) {
        const SpatialSystem sys(s, {n, 7.0});
        const double a0 = s.kernel.peak();
        PairField u = constant_field(n, 0.9, 1.7);
        for (int r : sys.slow_reactions())
            for (int j = 0; j < n; ++j) {
                const PairField d = slow_jump_vectors(sys, u, j, r);
                const Reaction& re = sys.reaction(r);
                CHECK(d.c.sup_norm() <= std::abs(re.gamma_c) * a0 / (7.0 * n) + 1e-15);
                CHECK(d.d.sup_norm() <= std::abs(re.gamma_d) * a0 / n + 1e-15);
            }
    }
}

TEST_CASE("constant trajectory without reactions or mass") {
    const SpatialSystem sys(diffusion_network(), {4, 10.0});
    const PairField init = constant_field(4, 0.0, 1.5);
    const Trajectory tr = simulate(sys, init, StopRule{}, uniform_times(1.0, 10), SimOptions{});
    CHECK(tr.events == 0);
    REQUIRE(tr.samples.size() == 11);
    for (const auto& s : tr.samples) CHECK(s == init);
    CHECK(tr.final_time == 1.0);
}

TEST_CASE("diffusion conserves mass and moves 1/mu") {
    const SpatialSystem sys(diffusion_network(), {5, 8.0});
    PairField init = constant_field(5, 0.0, 0.0);
    init.c[2] = 2.0;
    SimOptions o;
    o.seed = 3;
    o.full_log = true;
    StopRule stop;
    stop.t_end = 0.05;
    const Trajectory tr = simulate(sys, init, stop, uniform_times(0.05, 5), o);
    REQUIRE(tr.events > 10);
    for (const auto& s : tr.samples) CHECK(s.c.sum() == doctest::Approx(2.0).epsilon(1e-12));
    for (const auto& rec : tr.log.records) {
        REQUIRE(rec.kind != ChannelKind::Slow);
        double moved = 0.0;
        for (const auto& [site, dv] : rec.jump_c) {
            CHECK(std::fabs(std::fabs(dv) - 1.0 / 8.0) < 1e-15);
            moved += dv;
        }
        CHECK(std::fabs(moved) < 1e-15);
    }
}

TEST_CASE("single-site ring: diffusion is a no-op") {
    const SpatialSystem sys(diffusion_network(), {1, 1.0});
    const PairField init = constant_field(1, 1.0, 0.0);
    const Trajectory tr = simulate(sys, init, StopRule{}, uniform_times(1.0, 4), SimOptions{});
    CHECK(tr.events > 0);
    CHECK(tr.final_state == init);
}

TEST_CASE("waiting times are exponential") {
    // Constant-rate SlowD birth at one site, no C mass: a single channel of rate 1.
    const SpatialSystem sys(slow_d_network(+1, {1.0, 0, 0}), {1, 1.0});
    const PairField init = constant_field(1, 0.0, 0.0);
    const double lambda = total_rate(sys, init);
    REQUIRE(lambda == 1.0);
    SimOptions o;
    o.seed = 12;
    o.full_log = true;
    StopRule stop;
    stop.t_end = 1e9;
    stop.max_events = 10000;
    const Trajectory tr = simulate(sys, init, stop, {}, o);
    REQUIRE(tr.log.records.size() == 10000);
    std::vector<double> gaps;
    double prev = 0.0;
    for (const auto& r : tr.log.records) {
        gaps.push_back(r.t - prev);
        prev = r.t;
    }
    std::sort(gaps.begin(), gaps.end());
    double ks = 0.0;
    const double n = static_cast<double>(gaps.size());
    for (std::size_t i = 0; i < gaps.size(); ++i) {
        const double cdf = 1.0 - std::exp(-lambda * gaps[i]);
        ks = std::max({ks, std::fabs(cdf - i / n), std::fabs((i + 1) / n - cdf)});
    }
    // Asymptotic Kolmogorov critical value at p = 0.01.
    CHECK(ks < 1.628 / std::sqrt(n));
}

TEST_CASE("pure death with gating: one-step absorption law") {
    // From u_D = 2 the first death lands on 1, where θ(0) = 0 suppresses further jumps.
    // u_C = 1 keeps the C factor of θ at 1; diffusion on one site is a no-op.
    const SpatialSystem sys(slow_d_network(-1, {1.0, 0, 1}), {1, 1.0});
    const int runs = 10000;
    int hits = 0;
    for (int i = 0; i < runs; ++i) {
        SimOptions o;
        o.seed = 21;
        o.trajectory = static_cast<std::uint64_t>(i);
        const Trajectory tr = simulate(sys, constant_field(1, 1.0, 2.0), StopRule{}, {}, o);
        CHECK((tr.final_state.d[0] == 2.0 || tr.final_state.d[0] == 1.0));
        hits += tr.final_state.d[0] == 1.0;
    }
    const double p = 1.0 - std::exp(-2.0);
    CHECK(std::fabs(hits - runs * p) <= 3.0 * std::sqrt(runs * p * (1 - p)));

    const Trajectory one = simulate(sys, constant_field(1, 1.0, 1.0), StopRule{}, {}, SimOptions{});
    CHECK(one.events > 0);
    CHECK(one.final_state.d[0] == 1.0);
}

TEST_CASE("determinism and stream separation") {
    const NetworkSpec spec = reference_network();
    const SpatialSystem sys(spec, {8, 32.0});
    const PairField init = initial_state(spec, 8);
    SimOptions o;
    o.seed = 99;
    const auto times = uniform_times(0.3, 6);
    StopRule stop;
    stop.t_end = 0.3;
    const Trajectory a = simulate(sys, init, stop, times, o);
    const Trajectory b = simulate(sys, init, stop, times, o);
    CHECK(a.samples == b.samples);
    CHECK(a.events == b.events);
    CHECK(a.log.sum_sq_c == b.log.sum_sq_c);
    o.trajectory = 1;
    const Trajectory c = simulate(sys, init, stop, times, o);
    CHECK(c.final_state != a.final_state);
    CHECK(a.log.bound_violations == 0);
    CHECK(a.log.jumps_checked > 0);
}

TEST_CASE("event log round trip and replay") {
    const NetworkSpec spec = reference_network();
    const SpatialSystem sys(spec, {4, 16.0});
    const PairField init = initial_state(spec, 4);
    SimOptions o;
    o.seed = 5;
    o.full_log = true;
    const Trajectory tr = simulate(sys, init, StopRule{}, uniform_times(1.0, 2), o);
    std::stringstream ss(std::ios::in | std::ios::out | std::ios::binary);
    write_event_log(ss, tr, "{\"note\":1}");
    std::vector<ReplayEvent> events;
    const EventLogHeader h = read_event_log(ss, events);
    CHECK(h.n == 4);
    CHECK(h.mu == 16.0);
    CHECK(h.seed == 5);
    CHECK(h.meta == "{\"note\":1}");
    CHECK(events.size() == tr.events);
    CHECK(replay(sys, init, events) == tr.final_state);

    std::stringstream bad("MSRDEVTX");
    CHECK_THROWS(read_event_log(bad, events));
}

TEST_CASE("event cap returns a partial trajectory") {
    const NetworkSpec spec = reference_network();
    const SpatialSystem sys(spec, {4, 16.0});
    StopRule stop;
    stop.max_events = 0;
    const Trajectory tr = simulate(sys, initial_state(spec, 4), stop, uniform_times(1.0, 10), SimOptions{});
    CHECK(tr.cap_exceeded);
    CHECK(tr.events == 0);
    CHECK(tr.samples.size() < 11);
}

TEST_CASE("truncation radius limits") {
    const NetworkSpec spec = reference_network();
    const SpatialSystem sys(spec, {4, 16.0});
    const PairField init = initial_state(spec, 4);
    LimitOptions lo;
    lo.t_end = 0.5;
    const LimitSolution ref = solve_discrete_limit(spec, 4, init, lo);
    const auto times = uniform_times(0.5, 5);
    StopRule stop;
    stop.t_end = 0.5;
    stop.reference = &ref;
    SimOptions o;
    o.seed = 8;

    stop.epsilon0 = 1e6;
    const Trajectory wide = truncated_simulate(sys, init, stop, times, o);
    StopRule plain = stop;
    plain.epsilon0 = INFINITY;
    const Trajectory free_run = simulate(sys, init, plain, times, o);
    CHECK(std::isinf(wide.tau));
    CHECK(wide.samples == free_run.samples);
    CHECK(wide.events == free_run.events);

    PairField off = init;
    off.d[0] += 0.1;
    stop.epsilon0 = 0.0;
    const Trajectory a = truncated_simulate(sys, off, stop, times, o);
    o.seed = 9;
    const Trajectory b = truncated_simulate(sys, off, stop, times, o);
    CHECK(a.tau == 0.0);
    CHECK(a.events == 0);
    CHECK(a.samples == b.samples);
    CHECK(a.final_state.d[0] != off.d[0]);
}

TEST_CASE("path integrals are reproducible and finite") {
    const NetworkSpec spec = reference_network();
    const SpatialSystem sys(spec, {4, 16.0});
    SimOptions o;
    o.seed = 2;
    o.path_integrals = true;
    const Trajectory tr = simulate(sys, initial_state(spec, 4), StopRule{}, {}, o);
    REQUIRE(tr.integrals.has_value());
    for (double v : tr.integrals->qv_c.vec()) CHECK((std::isfinite(v) && v > 0.0));
    for (double v : tr.integrals->qv_d.vec()) CHECK((std::isfinite(v) && v > 0.0));
}

TEST_CASE("deterministic flow keeps constants for a balanced network") {
    // Birth 1 and death u_C balance at u_C = 1; Δ_N kills constants.
    const SpatialSystem sys(test::linear_fast_network(1.0, 1.0), {6, 10.0});
    PairField u = constant_field(6, 1.0, 0.0);
    deterministic_flow(sys, u, 0.0, 0.3);
    for (double v : u.c.vec()) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
}

}
