#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "limit.hpp"
#include "lln.hpp"
#include "martingale.hpp"
#include "system.hpp"

using namespace msrd;
using msrd::test::reaction;

namespace {

NetworkSpec inert_network() {
    NetworkSpec s = test::empty_network();
    s.reactions = {reaction(ReactionClass::FastC, 1, 0, {{0.0, 0, 0}}),
                   reaction(ReactionClass::SlowD, 0, -1, {{0.0, 0, 1}})};
    return s;
}

SweepPlan small_plan() {
    SweepPlan p;
    p.schedule = {{4, 16.0}};
    p.replicas = 3;
    p.t_end = 0.2;
    p.reference_n = 32;
    p.seed = 4;
    return p;
}

}  // namespace

TEST_SUITE("lln") {

TEST_CASE("quantiles use linear interpolation") {
    const Quantiles q = quantiles({5, 1, 4, 2, 3});
    CHECK(q.median == 3.0);
    CHECK(q.q10 == doctest::Approx(1.4));
    CHECK(q.q25 == doctest::Approx(2.0));
    CHECK(q.q90 == doctest::Approx(4.6));
    CHECK(quantiles({7}).q10 == 7.0);
}

TEST_CASE("schedules") {
    CHECK(default_schedule({8, 16}) == std::vector<std::pair<int, double>>{{8, 32.0}, {16, 64.0}});
    SweepPlan p;
    CHECK_NOTHROW(validate_plan(p));
    CHECK(resolve_reference_n(p) == 256);
    p.schedule = {{8, 32.0}, {12, 48.0}};
    CHECK(resolve_reference_n(p) == 264);
    p.schedule = {{8, 32.0}, {16, 16.0}};
    CHECK_THROWS_AS(validate_plan(p), std::invalid_argument);
    p.schedule = {{8, 32.0}};
    p.grid_points = 100;
    CHECK_THROWS_AS(validate_plan(p), std::invalid_argument);
    p.grid_points = 200;
    p.reference_n = 60;
    CHECK_THROWS_AS(validate_plan(p), std::invalid_argument);
}

TEST_CASE("ensemble on a frozen state has zero error") {
    const NetworkSpec s = inert_network();
    const SpatialSystem sys(s, {4, 16.0});
    PairField init(4);
    for (std::size_t j = 0; j < 4; ++j) init.d[j] = 1.5;
    LimitOptions lo;
    lo.t_end = 1.0;
    const LimitSolution ref = solve_discrete_limit(s, 4, init, lo);
    EnsembleOptions o;
    o.replicas = 1;
    const auto res = run_ensemble(sys, init, {&ref}, o);
    REQUIRE(res.size() == 1);
    CHECK(res[0].ok);
    CHECK(res[0].errors[0] == 0.0);
    CHECK(std::isinf(res[0].tau));
    CHECK(res[0].events == 0);
}

TEST_CASE("ensemble on the reference network") {
    const NetworkSpec spec = reference_network();
    const SpatialSystem sys(spec, {8, 32.0});
    const PairField init = initial_state(spec, 8);
    const LimitSolution ref = solve_discrete_limit(spec, 8, init, LimitOptions{});
    EnsembleOptions o;
    o.replicas = 20;
    o.seed = 1;
    const auto a = run_ensemble(sys, init, {&ref}, o);
    REQUIRE(a.size() == 20);
    for (const auto& r : a) {
        CHECK(r.ok);
        CHECK((std::isfinite(r.errors[0]) && r.errors[0] > 0.0));
        CHECK(r.bound_violations == 0);
    }
    o.workers = 3;
    const auto b = run_ensemble(sys, init, {&ref}, o);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].errors == b[i].errors);
        CHECK(a[i].tau == b[i].tau);
    }
}

TEST_CASE("the tracked error matches a direct comparison at the grid points") {
    const NetworkSpec spec = reference_network();
    const SpatialSystem sys(spec, {4, 16.0});
    const PairField init = initial_state(spec, 4);
    LimitOptions lo;
    lo.samples = 200;
    const LimitSolution ref = solve_discrete_limit(spec, 4, init, lo);
    EnsembleOptions o;
    o.replicas = 1;
    o.seed = 6;
    o.stream_offset = 3;
    const auto res = run_ensemble(sys, init, {&ref}, o);
    SimOptions so;
    so.seed = 6;
    so.trajectory = 3;
    const Trajectory tr = simulate(sys, init, StopRule{}, ref.times, so);
    double grid_err = 0.0;
    for (std::size_t k = 0; k < tr.samples.size(); ++k) grid_err = std::max(grid_err, sup_distance(tr.samples[k], ref.path[k]));
    // The tracker also sees between-grid extremes, so it can only be larger.
    CHECK(res[0].errors[0] >= grid_err - 1e-12);
    CHECK(res[0].errors[0] <= grid_err + 0.5);
}

TEST_CASE("sweep with a single pair") {
    const ExperimentReport rep = lln_sweep(reference_network(), small_plan());
    REQUIRE(rep.rows.size() == 1);
    CHECK(rep.reference_n == 32);
    const SweepRow& row = rep.rows[0];
    CHECK(row.replicas.size() == 3);
    CHECK(row.exceedance.size() == 3);
    CHECK(row.error.q10 <= row.error.median);
    CHECK(row.limit_error >= 0.0);
    const ExperimentReport again = lln_sweep(reference_network(), small_plan());
    CHECK(again.rows[0].error.median == row.error.median);
}

TEST_CASE("martingale statistics vanish without reactions") {
    const NetworkSpec s = inert_network();
    const SpatialSystem sys(s, {4, 16.0});
    PairField init(4);
    for (std::size_t j = 0; j < 4; ++j) init.d[j] = 1.0;
    MartingaleOptions o;
    o.replicas = 3;
    const MartingaleReport rep = martingale_suite(sys, init, o);
    CHECK(!rep.stats.empty());
    for (const auto& st : rep.stats) {
        CHECK(st.mean == 0.0);
        CHECK(st.z == 0.0);
    }
}

TEST_CASE("diffusion-only martingales are centred") {
    NetworkSpec s = test::empty_network();
    s.reactions = {reaction(ReactionClass::FastC, 1, 0, {{0.0, 0, 0}})};
    const SpatialSystem sys(s, {4, 16.0});
    PairField init(4);
    for (std::size_t j = 0; j < 4; ++j) init.c[j] = 1.0 + 0.25 * static_cast<double>(j);
    MartingaleOptions o;
    o.replicas = 100;
    o.t_end = 0.2;
    const MartingaleReport rep = martingale_suite(sys, init, o);
    CHECK(rep.max_abs_z < 4.5);
    CHECK(rep.bound_violations == 0);
    for (const auto& st : rep.stats)
        if (st.identity == "Z_D" || st.identity == "qv_D") CHECK(st.mean == 0.0);
}

TEST_CASE("parallel_for visits every index and propagates errors") {
    std::vector<int> seen(50, 0);
    parallel_for(seen.size(), 4, [&](std::size_t i) { seen[i] += 1; });
    for (int v : seen) CHECK(v == 1);
    CHECK_THROWS_AS(parallel_for(10, 2, [](std::size_t i) {
                        if (i == 7) throw std::runtime_error("boom");
                    }),
                    std::runtime_error);
}

}
