#include <doctest.h>

#include <cmath>
#include <random>

#include "debit.hpp"
#include "expr.hpp"
#include "helpers.hpp"
#include "system.hpp"

using namespace msrd;
using msrd::test::reaction;

namespace {

PairField constant_field(int n, double c, double d) {
    return PairField(GridFunction(static_cast<std::size_t>(n), c), GridFunction(static_cast<std::size_t>(n), d));
}

PairField random_field(std::mt19937_64& rng, int n, double lo, double hi) {
    std::uniform_real_distribution<double> d(lo, hi);
    PairField u(static_cast<std::size_t>(n));
    for (std::size_t k = 0; k < u.c.size(); ++k) {
        u.c[k] = d(rng);
        u.d[k] = d(rng);
    }
    return u;
}

NetworkSpec reference_with_box() {
    NetworkSpec s = reference_network();
    s.kernel = Kernel::constant_box();
    return s;
}

}  // namespace

TEST_SUITE("debit") {

TEST_CASE("fast debit") {
    const NetworkSpec s = test::linear_fast_network(1.0, 0.5);
    CHECK(debit_F(s, constant_field(3, 2.0, 0.0)).sup_norm() == 0.0);
    const GridFunction f0 = debit_F(s, constant_field(3, 0.0, 0.0));
    for (double v : f0.vec()) CHECK(v == 1.0);
    NetworkSpec slow = test::empty_network();
    slow.reactions = {reaction(ReactionClass::SlowD, 0, 1, {{1.0, 0, 0}})};
    CHECK(debit_F(slow, constant_field(3, 1.0, 1.0)).sup_norm() == 0.0);
}

TEST_CASE("slow C debit") {
    const SpatialSystem ref(reference_network(), {4, 10.0});
    CHECK(debit_F1N(ref, constant_field(4, 1.0, 2.0)).sup_norm() == 0.0);

    NetworkSpec s = reference_with_box();
    s.reactions.push_back(reaction(ReactionClass::SlowMixed, 2, -1, {{0.3, 1, 1}}));
    const PairField u = constant_field(4, 1.0, 2.0);
    const GridFunction f = debit_F1N(SpatialSystem(s, {4, 10.0}), u);
    for (double v : f.vec()) CHECK(v == doctest::Approx(2.0 * 0.3 * 1.0 * 2.0 / 10.0).epsilon(1e-13));
    std::mt19937_64 rng(2);
    const PairField w = random_field(rng, 4, 0.5, 2.0);
    const double a = debit_F1N(SpatialSystem(s, {4, 10.0}), w).sup_norm();
    const double b = debit_F1N(SpatialSystem(s, {4, 20.0}), w).sup_norm();
    // θ factors see γ^C/μ; doubling μ keeps them saturated here.
    CHECK(b == doctest::Approx(a / 2).epsilon(1e-12));
}

TEST_CASE("slow D debit at constant states") {
    const SpatialSystem sys(reference_with_box(), {4, 10.0});
    const GridFunction g = debit_GN(sys, constant_field(4, 1.0, 2.0));
    const double expected = -0.25 * 1.0 * 2.0 + 1.0 - 0.2 * 2.0;
    for (double v : g.vec()) CHECK(v == doctest::Approx(expected).epsilon(1e-13));

    NetworkSpec death = test::empty_network();
    death.reactions = {reaction(ReactionClass::SlowD, 0, -1, {{0.4, 0, 1}})};
    CHECK(debit_GN(SpatialSystem(death, {5, 10.0}), constant_field(5, 1.0, 0.0)).sup_norm() == 0.0);
    CHECK(debit_GN(SpatialSystem(test::linear_fast_network(1, 1), {5, 10.0}), constant_field(5, 1.0, 1.0))
              .sup_norm() == 0.0);
}

TEST_CASE("continuum slow debit") {
    const NetworkSpec s = reference_network();
    const double expected = -0.25 * 1.0 * 2.0 + 1.0 - 0.2 * 2.0;
    const ClosedForm one = ClosedForm::parse("1"), two = ClosedForm::parse("2"), zero = ClosedForm::parse("0");
    for (double x : {0.0, 0.13, 0.5, 0.97}) {
        CHECK(debit_G_at(s, one, two, x) == doctest::Approx(expected).epsilon(1e-10));
        CHECK(debit_G_at(s, one, zero, x) == 0.0);
    }
}

TEST_CASE("slow D debit is Lipschitz uniformly in N") {
    const NetworkSpec s = reference_network();
    std::mt19937_64 rng(17);
    std::vector<double> worst;
    for (int n : {8, 16, 32}) {
        const SpatialSystem sys(s, {n, 4.0 * n});
        double l = 0.0;
        for (int k = 0; k < 200; ++k) {
            const PairField u = random_field(rng, n, 0.0, 3.0);
            PairField v = u;
            const PairField dv = random_field(rng, n, -1e-3, 1e-3);
            v.c += dv.c;
            v.d += dv.d;
            l = std::max(l, sup_distance(debit_GN(sys, u), debit_GN(sys, v)) / sup_distance(u, v));
        }
        worst.push_back(l);
    }
    for (double l : worst) CHECK(l <= 2.0 * worst.front());
}

TEST_CASE("square amplitudes") {
    const SpatialSystem sys(reference_network(), {4, 10.0});
    const DebitBundle b = square_amplitudes(sys, constant_field(4, 1.0, 1.0));
    for (double v : b.lap_sq.vec()) CHECK(v == doctest::Approx(64.0));
    const auto& w = sys.gamma_matrix();
    const double a0 = reference_network().kernel.peak();
    for (double x : w) CHECK(x <= a0 / 4 + 1e-15);
    for (const GridFunction* f : {&b.lap_sq, &b.F_sq, &b.F1N_sq, &b.GN_sq, &b.qv_c, &b.qv_d})
        for (double v : f->vec()) CHECK((std::isfinite(v) && v >= 0.0));

    NetworkSpec death = test::empty_network();
    death.reactions = {reaction(ReactionClass::FastC, -1, 0, {{1.0, 1, 0}}),
                       reaction(ReactionClass::SlowD, 0, -1, {{1.0, 0, 1}})};
    const DebitBundle z = square_amplitudes(SpatialSystem(death, {4, 10.0}), constant_field(4, 0.0, 0.0));
    for (const GridFunction* f : {&z.lap_sq, &z.F_sq, &z.GN_sq, &z.qv_c, &z.qv_d, &z.psi_c, &z.psi_d})
        CHECK(f->sup_norm() == 0.0);
}

TEST_CASE("generator: constants and linear functionals") {
    const NetworkSpec s = reference_network();
    const int n = 5;
    const SpatialSystem sys(s, {n, 12.0});
    std::mt19937_64 rng(4);
    const PairField u = random_field(rng, n, 0.2, 2.5);
    CHECK(generator_apply(sys, u, [](const PairField&) { return 3.0; }) == 0.0);

    const PairField w = random_field(rng, n, -1.0, 1.0);
    const auto lin = [&](const PairField& x) { return inner(x.c, w.c) + inner(x.d, w.d); };
    const PairField psi = debit_psi(sys, u);
    const double expected = inner(w.c, psi.c) + inner(w.d, psi.d);
    CHECK(generator_apply(sys, u, lin) == doctest::Approx(expected).epsilon(1e-9));

    const GridFunction one(static_cast<std::size_t>(n), 1.0);
    const auto mass = [&](const PairField& x) { return inner(x.c, one); };
    const double diff_only = generator_apply(sys, u, mass, kFilterDiffusion);
    CHECK(std::fabs(diff_only) < 1e-9);
    CHECK(generator_apply(sys, u, mass) == doctest::Approx(inner(one, debit_F(s, u) + debit_F1N(sys, u))).epsilon(1e-9));
}

TEST_CASE("generator: quadratic functional against the closed-form compensator") {
    const NetworkSpec s = reference_network();
    const int n = 6;
    const double mu = 15.0;
    const SpatialSystem sys(s, {n, mu});
    std::mt19937_64 rng(8);
    const PairField u = random_field(rng, n, 0.3, 2.0);
    const PairField psi = debit_psi(sys, u);
    for (int j = 0; j < n; ++j) {
        const auto jj = static_cast<std::size_t>(j);
        const auto phi = [&](const PairField& x) { return (x.c[jj] / n) * (x.c[jj] / n); };
        const double second = generator_apply(sys, u, phi) - 2.0 * (u.c[jj] / n) * psi.c[jj] / n;
        // Hand-derived C jump variance at site j: fast channels (γ^C)²λ/μ, hops out of j,
        // and hops in from both neighbours, each of size 1/μ. Slow reactions leave C alone.
        const double uc = u.c[jj], ud = u.d[jj];
        const double left = u.c[static_cast<std::size_t>((j + n - 1) % n)];
        const double right = u.c[static_cast<std::size_t>((j + 1) % n)];
        const double fast = (1.0 + uc + 0.5 * ud) / mu;
        const double hops = static_cast<double>(n) * n * (2.0 * uc + left + right) / mu;
        CHECK(second * n * n == doctest::Approx(fast + hops).epsilon(1e-9));
        CHECK(square_amplitudes(sys, u).qv_c[jj] == doctest::Approx(fast + hops).epsilon(1e-12));
    }
}

TEST_CASE("generator channel guard") {
    NetworkSpec s = test::empty_network();
    for (int r = 0; r < 100; ++r) s.reactions.push_back(reaction(ReactionClass::FastC, 1, 0, {{1.0, 0, 0}}));
    const SpatialSystem sys(s, {1000, 1e5});
    REQUIRE(sys.channel_count() > kGeneratorChannelGuard);
    CHECK_THROWS_AS(generator_apply(sys, constant_field(1000, 1, 1), [](const PairField&) { return 0.0; }),
                    std::length_error);
}

}
