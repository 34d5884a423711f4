#include <doctest.h>

#include <cmath>
#include <numbers>

#include "helpers.hpp"
#include "model.hpp"
#include "network_io.hpp"
#include "quadrature.hpp"
#include "rng.hpp"

using namespace msrd;
using msrd::test::reaction;

TEST_SUITE("model") {

TEST_CASE("validator flags class constraints") {
    NetworkSpec s = test::empty_network();
    s.reactions = {reaction(ReactionClass::FastMixed, 1, 1, {{1.0, 0, 1}})};
    auto v = validate_network(s);
    REQUIRE(v.size() == 1);
    CHECK(v[0].reaction_index == 0);
    CHECK(v[0].reason == "FastMixed must have gamma_d = 0");

    s.reactions = {reaction(ReactionClass::SlowD, 0, -1, {{1.0, 1, 1}})};
    v = validate_network(s);
    REQUIRE(!v.empty());
    CHECK(v[0].reason == "SlowD rate must depend only on u_D");

    CHECK(validate_network(reference_network()).empty());
}

TEST_CASE("rate evaluation") {
    const PolynomialRate mixed{{{0.5, 1, 1}}};
    CHECK(eval_rate(mixed, 2.0, 3.0) == doctest::Approx(3.0).epsilon(1e-15));
    const PolynomialRate linear{{{0.7, 1, 0}}};
    CHECK(eval_rate(linear, 0.0, 4.0) == 0.0);
    const PolynomialRate constant{{{1.0, 0, 0}}};
    CHECK(eval_rate(constant, 3.3, 9.1) == 1.0);
}

TEST_CASE("theta smoothstep") {
    CHECK(theta(-1.0) == 0.0);
    CHECK(theta(2.0) == 1.0);
    CHECK(theta(0.5) == 0.5);
    CHECK(theta(0.25) == doctest::Approx(0.15625).epsilon(1e-15));
    CHECK(theta(0.0) == 0.0);
    for (double y = 0.0; y < 1.0; y += 0.01) CHECK(theta(y + 0.01) >= theta(y));
}

TEST_CASE("kernel weights") {
    const auto box = kernel_weights(Kernel::constant_box(), 4);
    for (double w : box) CHECK(w == doctest::Approx(0.25).epsilon(1e-14));

    const auto rc = kernel_weights(Kernel::raised_cosine(), 4);
    const double diag = 0.25 + 1.0 / (2.0 * std::numbers::pi);
    for (int j = 0; j < 4; ++j) CHECK(rc[static_cast<std::size_t>(j * 4 + j)] == doctest::Approx(diag).epsilon(1e-13));
}

TEST_CASE("kernel weights agree with quadrature and are circulant") {
    const Kernel kernels[] = {Kernel::constant_box(), Kernel::raised_cosine(), Kernel::table({2.0, 0.5, 0.5, 2.0})};
    for (const Kernel& k : kernels) {
        for (int n : {1, 3, 5, 8}) {
            const auto w = kernel_weights(k, n);
            const auto N = static_cast<std::size_t>(n);
            // Independent oracle: a(x - j/N) integrated over cell i by dense Gauss-Legendre.
            const GaussRule g = gauss_legendre(24);
            for (std::size_t i = 0; i < N; ++i) {
                double row = 0.0;
                for (std::size_t j = 0; j < N; ++j) {
                    double q = 0.0;
                    const int sub = 64;
                    const double h = 1.0 / (n * sub);
                    for (int s = 0; s < sub; ++s) {
                        const double a = static_cast<double>(i) / n + s * h;
                        for (std::size_t r = 0; r < g.nodes.size(); ++r) {
                            const double x = a + 0.5 * h * (g.nodes[r] + 1.0);
                            double y = x - static_cast<double>(j + 1) / n;
                            y -= std::floor(y);
                            q += 0.5 * h * g.weights[r] * k.value(y);
                        }
                    }
                    // The table kernel is piecewise constant; sub-cells straddle its jumps.
                    const double tol = k.type() == KernelType::TableLookup ? 2e-3 : 1e-10;
                    CHECK(w[i * N + j] == doctest::Approx(q).epsilon(tol));
                    row += w[i * N + j];
                }
                CHECK(row == doctest::Approx(k.integral()).epsilon(1e-12));
            }
            for (std::size_t i = 0; i < N; ++i)
                for (std::size_t j = 0; j < N; ++j)
                    CHECK(w[((i + 1) % N) * N + (j + 1) % N] == doctest::Approx(w[i * N + j]).epsilon(1e-12));
        }
    }
}

TEST_CASE("assumption check on simple networks") {
    NetworkSpec s = test::empty_network();
    s.reactions = {reaction(ReactionClass::FastC, 1, 0, {{2.0, 0, 0}})};
    const AssumptionReport a = assumption_check(s, Box{});
    CHECK(a.c1 == CheckStatus::VerifiedOnBox);
    CHECK(a.c1_min_f_at_zero == doctest::Approx(2.0));

    const AssumptionReport r = assumption_check(reference_network(), Box{});
    CHECK(r.c2 == CheckStatus::Unverified);
    CHECK(r.d2_m1 > 0.0);
    CHECK(std::isfinite(r.d2_m1));
}

TEST_CASE("network round trip") {
    const NetworkSpec ref = reference_network();
    const std::string text = serialize_network(ref);
    const NetworkSpec back = parse_network(text);
    CHECK(back == ref);
    CHECK(serialize_network(back) == text);

    NetworkSpec s = test::empty_network(Kernel::table({1.9, 0.1, 0.1, 1.9}));
    s.constants = {{"k", 0.3}};
    s.initial_c = "k + sin(2*pi*x)";
    s.reactions = {reaction(ReactionClass::SlowMixed, -1, 1, {{0.125, 2, 1}, {3.0, 0, 0}})};
    CHECK(parse_network(serialize_network(s)) == s);
}

TEST_CASE("minimal document and parse errors") {
    const char* doc = R"({"reactions": [{"class": "FastC", "gamma_c": 1, "gamma_d": 0,
                          "rate": [{"coef": 1, "e_c": 0, "e_d": 0}]}], "kernel": {"type": "ConstantBox"}})";
    const NetworkSpec s = parse_network(doc);
    CHECK(s.reactions.size() == 1);

    try {
        parse_network("{\n  \"reactions\": [\n    {\"class\": }\n  ]\n}");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line == 3);
    }
    CHECK_THROWS_AS(parse_network(R"({"reactions": [], "kernel": {"type": "Gaussian"}})"), ParseError);
    CHECK_THROWS_AS(parse_network(R"({"reactions": [], "bogus": 1})"), ParseError);
}

TEST_CASE("philox known-answer vectors") {
    CHECK(philox4x32_10({0, 0, 0, 0}, {0, 0}) == PhiloxCounter{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
    CHECK(philox4x32_10({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu}) ==
          PhiloxCounter{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
    CHECK(philox4x32_10({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u}) ==
          PhiloxCounter{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("random streams are independent per trajectory and reproducible") {
    RandomStream a(7, 0), b(7, 0), c(7, 1);
    int same = 0;
    for (int i = 0; i < 100; ++i) {
        const auto x = a.next_u64();
        CHECK(x == b.next_u64());
        same += x == c.next_u64();
    }
    CHECK(same == 0);
    RandomStream u(1, 2);
    double mean = 0.0;
    for (int i = 0; i < 100000; ++i) {
        const double x = u.uniform();
        CHECK((x >= 0.0 && x < 1.0));
        mean += x;
    }
    CHECK(mean / 100000 == doctest::Approx(0.5).epsilon(0.01));
}

}
