#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "grid.hpp"

using namespace msrd;

namespace {

GridFunction random_grid(std::mt19937_64& rng, int n) {
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    GridFunction f(static_cast<std::size_t>(n));
    for (std::size_t k = 0; k < f.size(); ++k) f[k] = d(rng);
    return f;
}

}  // namespace

TEST_SUITE("grid") {

TEST_CASE("projection") {
    const GridFunction one = project_pn([](double) { return 1.0; }, 5);
    for (double v : one.vec()) CHECK(v == doctest::Approx(1.0).epsilon(1e-15));
    const GridFunction x = project_pn([](double y) { return y; }, 2);
    CHECK(x[0] == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(x[1] == doctest::Approx(0.75).epsilon(1e-14));
    // Cell average of cos(2πx) over [k/N, (k+1)/N] in closed form.
    const int n = 6;
    const GridFunction c = project_pn(TrigPolynomial::cos_mode(1), n);
    for (int k = 0; k < n; ++k) {
        const double exact = n * (std::sin(2 * std::numbers::pi * (k + 1) / n) - std::sin(2 * std::numbers::pi * k / n)) /
                             (2 * std::numbers::pi);
        CHECK(c[static_cast<std::size_t>(k)] == doctest::Approx(exact).epsilon(1e-13));
    }
}

TEST_CASE("laplacian stencil") {
    const GridFunction lap = discrete_laplacian(GridFunction(std::vector<double>{1, 0, 0, 0}));
    CHECK(lap.vec() == std::vector<double>{-32, 16, 0, 16});
    const GridFunction flat = discrete_laplacian(GridFunction(7, 3.5));
    for (double v : flat.vec()) CHECK(v == 0.0);
    GridFunction phi(4);
    for (int j = 0; j < 4; ++j) phi[static_cast<std::size_t>(j)] = std::sqrt(2.0) * std::cos(std::numbers::pi * j / 2);
    const GridFunction lp = discrete_laplacian(phi);
    for (std::size_t j = 0; j < 4; ++j) CHECK(lp[j] == doctest::Approx(-32.0 * phi[j]).epsilon(1e-13));
}

TEST_CASE("gradients and summation by parts") {
    const Gradients g = discrete_gradients(GridFunction(std::vector<double>{0, 1}));
    CHECK(g.forward.vec() == std::vector<double>{2, -2});
    const Gradients z = discrete_gradients(GridFunction(5, 2.0));
    for (std::size_t k = 0; k < 5; ++k) CHECK((z.forward[k] == 0.0 && z.backward[k] == 0.0));

    std::mt19937_64 rng(11);
    const GridFunction f = random_grid(rng, 8), h = random_grid(rng, 8);
    // ⟨∇⁺f, h⟩ = −⟨f, ∇⁻h⟩ and ⟨Δf, h⟩ = −⟨∇⁺f, ∇⁺h⟩.
    CHECK(inner(discrete_gradients(f).forward, h) ==
          doctest::Approx(-inner(f, discrete_gradients(h).backward)).epsilon(1e-12));
    CHECK(inner(discrete_laplacian(f), h) ==
          doctest::Approx(-inner(discrete_gradients(f).forward, discrete_gradients(h).forward)).epsilon(1e-12));
}

TEST_CASE("spectral basis") {
    const SpectralBasis b4(4);
    CHECK(b4.size() == 4);
    REQUIRE(b4.distinct_betas().size() == 3);
    CHECK(b4.distinct_betas()[0] == doctest::Approx(0.0));
    CHECK(b4.distinct_betas()[1] == doctest::Approx(32.0).epsilon(1e-13));
    CHECK(b4.distinct_betas()[2] == doctest::Approx(64.0).epsilon(1e-13));
    for (std::size_t a = 0; a < 4; ++a)
        for (std::size_t c = 0; c < 4; ++c)
            CHECK(inner(b4.modes()[a].vec, b4.modes()[c].vec) == doctest::Approx(a == c ? 1.0 : 0.0).epsilon(1e-12));
    const SpectralBasis b3(3);
    CHECK(b3.size() == 3);
    for (int n : {3, 4, 8, 16}) {
        const SpectralBasis b(n);
        for (const auto& m : b.modes()) {
            const double beta = 2.0 * n * n * (1.0 - std::cos(std::numbers::pi * m.m / n));
            CHECK(m.beta == doctest::Approx(beta).epsilon(1e-12));
            const GridFunction lap = discrete_laplacian(m.vec);
            for (std::size_t k = 0; k < m.vec.size(); ++k)
                CHECK(std::fabs(lap[k] + m.beta * m.vec[k]) <= 1e-10 * std::max(m.beta, 1.0));
        }
    }
}

TEST_CASE("semigroup") {
    const SpectralBasis b(4);
    std::mt19937_64 rng(3);
    const GridFunction f = random_grid(rng, 4);
    CHECK(sup_distance(semigroup_apply(b, 0.0, f), f) < 1e-14);
    const GridFunction c(4, 2.5);
    CHECK(sup_distance(semigroup_apply(b, 0.7, c), c) < 1e-14);
    GridFunction phi(4);
    for (int j = 0; j < 4; ++j) phi[static_cast<std::size_t>(j)] = std::sqrt(2.0) * std::cos(std::numbers::pi * j / 2);
    const GridFunction decayed = semigroup_apply(b, 0.01, phi);
    for (std::size_t j = 0; j < 4; ++j) CHECK(decayed[j] == doctest::Approx(std::exp(-0.32) * phi[j]).epsilon(1e-13));
}

TEST_CASE("semigroup is a positive contraction commuting with the laplacian") {
    std::mt19937_64 rng(5);
    for (int n : {3, 8, 13}) {
        const SpectralBasis b(n);
        const auto N = static_cast<std::size_t>(n);
        for (double t : {1e-4, 0.01, 0.3}) {
            const GridFunction f = random_grid(rng, n);
            const GridFunction tf = semigroup_apply(b, t, f);
            CHECK(tf.sup_norm() <= f.sup_norm() + 1e-12);
            CHECK(l2_norm(tf) <= l2_norm(f) + 1e-12);
            CHECK(sup_distance(discrete_laplacian(tf), semigroup_apply(b, t, discrete_laplacian(f))) <= 1e-8);
            const auto m = b.matrix(t);
            for (std::size_t i = 0; i < N; ++i)
                for (std::size_t j = 0; j < N; ++j) {
                    CHECK(m[i * N + j] >= -1e-14);
                    CHECK(m[i * N + j] == doctest::Approx(m[j * N + i]).epsilon(1e-12));
                }
        }
    }
}

TEST_CASE("semigroup matches a fine explicit integration") {
    // Independent oracle: forward Euler on df/dt = Δf with a tiny step.
    const int n = 6;
    std::mt19937_64 rng(9);
    GridFunction f = random_grid(rng, n);
    const GridFunction exact = semigroup_apply(SpectralBasis(n), 0.02, f);
    const int steps = 200000;
    const double h = 0.02 / steps;
    for (int s = 0; s < steps; ++s) f += h * discrete_laplacian(f);
    CHECK(sup_distance(f, exact) < 1e-5);
}

TEST_CASE("heat reference") {
    CHECK(heat_reference(0.0, 3) == 1.0);
    CHECK(heat_reference(0.8, 0) == 1.0);
    CHECK(heat_reference(0.1, 1) == doctest::Approx(std::exp(-0.4 * std::numbers::pi * std::numbers::pi)).epsilon(1e-14));
    CHECK(heat_reference(0.1, 1) == doctest::Approx(0.019296).epsilon(1e-4));
}

TEST_CASE("block average") {
    const GridFunction fine(std::vector<double>{1, 3, 5, 7, 2, 2});
    const GridFunction coarse = block_average(fine, 3);
    CHECK(coarse.vec() == std::vector<double>{2, 6, 2});
    CHECK_THROWS(block_average(fine, 4));
}

TEST_CASE("binary round trip") {
    std::mt19937_64 rng(1);
    const GridFunction f = random_grid(rng, 9);
    std::stringstream ss;
    write_binary(ss, f);
    CHECK(read_binary(ss) == f);
}

}
