#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "helpers.hpp"
#include "limit.hpp"
#include "system.hpp"

using namespace msrd;
using msrd::test::reaction;

namespace {

NetworkSpec inert_network() {
    NetworkSpec s = test::empty_network();
    s.reactions = {reaction(ReactionClass::FastC, 1, 0, {{0.0, 0, 0}})};
    return s;
}

LimitOptions opts(double t_end, int samples = 100) {
    LimitOptions o;
    o.t_end = t_end;
    o.samples = samples;
    return o;
}

}  // namespace

TEST_SUITE("limit") {

TEST_CASE("pure semigroup decay of an eigenmode") {
    const int n = 4;
    PairField v0(4);
    for (int j = 0; j < n; ++j) {
        v0.c[static_cast<std::size_t>(j)] = 1.0 + 0.5 * std::sqrt(2.0) * std::cos(std::numbers::pi * j / 2);
        v0.d[static_cast<std::size_t>(j)] = 0.7;
    }
    const LimitSolution sol = solve_discrete_limit(inert_network(), n, v0, opts(0.1));
    for (std::size_t k = 0; k < sol.times.size(); ++k)
        for (int j = 0; j < n; ++j) {
            const auto jj = static_cast<std::size_t>(j);
            const double phi = std::sqrt(2.0) * std::cos(std::numbers::pi * j / 2);
            CHECK(sol.path[k].c[jj] == doctest::Approx(1.0 + 0.5 * std::exp(-32.0 * sol.times[k]) * phi).epsilon(1e-9));
            CHECK(sol.path[k].d[jj] == 0.7);
        }
    CHECK(sol.converged);
}

TEST_CASE("constant fast source grows linearly") {
    NetworkSpec s = test::empty_network();
    s.reactions = {reaction(ReactionClass::FastC, 1, 0, {{1.5, 0, 0}})};
    const LimitSolution sol = solve_discrete_limit(s, 4, PairField(4), opts(1.0));
    for (std::size_t k = 0; k < sol.times.size(); ++k)
        for (double v : sol.path[k].c.vec()) CHECK(v == doctest::Approx(1.5 * sol.times[k]).epsilon(1e-12));
}

TEST_CASE("slow linear death decays exponentially") {
    NetworkSpec s = test::empty_network();
    s.reactions = {reaction(ReactionClass::SlowD, 0, -1, {{0.3, 0, 1}})};
    PairField v0(4);
    for (std::size_t j = 0; j < 4; ++j) {
        v0.c[j] = 2.0;
        v0.d[j] = 5.0;
    }
    const LimitSolution sol = solve_discrete_limit(s, 4, v0, opts(1.0));
    for (std::size_t k = 0; k < sol.times.size(); ++k)
        for (double v : sol.path[k].d.vec()) CHECK(std::fabs(v - 5.0 * std::exp(-0.3 * sol.times[k])) < 1e-6);
}

TEST_CASE("reference network stays positive and within bounds") {
    const NetworkSpec spec = reference_network();
    const PairField v0 = initial_state(spec, 16);
    const LimitSolution sol = solve_discrete_limit(spec, 16, v0, opts(1.0));
    CHECK(sol.converged);
    CHECK(!sol.negative_excursion);
    CHECK(sol.min_value >= 0.0);
    const AssumptionReport a = assumption_check(spec, Box{});
    const BoundsCheck b = check_bounds(sol, v0.c.sup_norm(), v0.d.sup_norm(), a.d2_m1, spec.kernel.peak());
    CHECK(b.envelope_d);
    CHECK(sol.refinement.size() >= 2);
    CHECK(std::isnan(sol.refinement.front().diff));
    CHECK(sol.refinement.back().diff < 1e-8);
}

TEST_CASE("limit error") {
    const NetworkSpec spec = reference_network();
    const LimitSolution a = solve_discrete_limit(spec, 8, initial_state(spec, 8), opts(0.2));
    CHECK(limit_error(a, a) == 0.0);
    const LimitSolution b = solve_discrete_limit(spec, 12, initial_state(spec, 12), opts(0.2));
    CHECK_THROWS_AS(limit_error(a, b), std::invalid_argument);
    const LimitSolution c = solve_discrete_limit(spec, 8, initial_state(spec, 8), opts(0.3));
    CHECK_THROWS_AS(limit_error(a, c), std::invalid_argument);
}

TEST_CASE("pure diffusion refines at second order") {
    NetworkSpec s = inert_network();
    s.initial_c = "1 + 0.5*cos(2*pi*x)";
    s.initial_d = "1";
    const LimitOptions o = opts(0.05, 50);
    const LimitSolution ref = solve_discrete_limit(s, 128, initial_state(s, 128), o);
    std::vector<double> errs;
    for (int n : {8, 16, 32}) errs.push_back(limit_error(solve_discrete_limit(s, n, initial_state(s, n), o), ref));
    CHECK(errs[1] < errs[0]);
    CHECK(errs[2] < errs[1]);
    CHECK(std::log2(errs[0] / errs[2]) / 2.0 >= 1.8);
    // The leading error is the eigenvalue gap |β_{1,N} − 4π²| acting on the cosine mode.
    const double t = 0.05, pi2 = 4 * std::numbers::pi * std::numbers::pi;
    const double beta8 = 2.0 * 64 * (1.0 - std::cos(2 * std::numbers::pi / 8));
    const double gap = 0.5 * std::fabs(std::exp(-beta8 * t) - std::exp(-pi2 * t));
    CHECK(errs[0] == doctest::Approx(gap).epsilon(0.35));
}

TEST_CASE("csv export") {
    const NetworkSpec spec = reference_network();
    const LimitSolution sol = solve_discrete_limit(spec, 2, initial_state(spec, 2), opts(0.1, 2));
    std::ostringstream os;
    write_csv(os, sol);
    const std::string out = os.str();
    CHECK(out.rfind("time,site,v_c,v_d\n", 0) == 0);
    CHECK(std::count(out.begin(), out.end(), '\n') == 1 + 3 * 2);
}

}
