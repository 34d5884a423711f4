#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

namespace msrd {

enum class ReactionClass { FastC, FastMixed, SlowMixed, SlowD };

const char* to_string(ReactionClass c);
bool parse_reaction_class(const std::string& s, ReactionClass& out);
inline bool is_fast(ReactionClass c) { return c == ReactionClass::FastC || c == ReactionClass::FastMixed; }
inline bool is_slow(ReactionClass c) { return !is_fast(c); }

struct Monomial {
    double coef = 0.0;
    int exp_c = 0;
    int exp_d = 0;
    bool operator==(const Monomial&) const = default;
};

struct PolynomialRate {
    std::vector<Monomial> terms;

    // No domain check; callers on hot paths pass non-negative states.
    double operator()(double uc, double ud) const {
        double s = 0.0;
        for (const auto& m : terms) {
            double v = m.coef;
            for (int i = 0; i < m.exp_c; ++i) v *= uc;
            for (int i = 0; i < m.exp_d; ++i) v *= ud;
            s += v;
        }
        return s;
    }
    bool depends_on_c() const;
    bool depends_on_d() const;
    int degree_d() const;
    bool operator==(const PolynomialRate&) const = default;
};

// Throws std::domain_error for negative or non-finite arguments.
double eval_rate(const PolynomialRate& rate, double u_c, double u_d);

struct Reaction {
    std::string label;
    ReactionClass cls = ReactionClass::FastC;
    int gamma_c = 0;
    int gamma_d = 0;
    PolynomialRate rate;
    bool operator==(const Reaction&) const = default;
};

enum class KernelType { ConstantBox, RaisedCosine, TableLookup };

const char* to_string(KernelType k);
bool parse_kernel_type(const std::string& s, KernelType& out);

// 1-periodic correlation kernel. A table holds equal-width values on [0,1).
class Kernel {
public:
    Kernel() = default;
    static Kernel constant_box();
    static Kernel raised_cosine();
    // Throws std::invalid_argument unless the table is even and peaks at 0.
    static Kernel table(std::vector<double> values);

    KernelType type() const { return type_; }
    const std::vector<double>& table_values() const { return table_; }

    double value(double x) const;
    double peak() const;
    double integral() const;
    double l2_norm_sq() const;
    // A(x) = ∫_0^x a, extended to all reals.
    double antiderivative(double x) const;
    // B(x) = ∫_0^x A.
    double second_antiderivative(double x) const;
    // Points in [0,1) where a may fail to be smooth.
    std::vector<double> breakpoints() const;

    bool operator==(const Kernel&) const = default;

private:
    KernelType type_ = KernelType::ConstantBox;
    std::vector<double> table_;
    std::vector<double> table_cumulative_;   // A at the table nodes
    std::vector<double> table_cumulative2_;  // B at the table nodes
};

// Cubic smoothstep: 0 below 0, 1 above 1.
inline double theta(double y) {
    if (y <= 0.0) return 0.0;
    if (y >= 1.0) return 1.0;
    return y * y * (3.0 - 2.0 * y);
}

struct NetworkSpec {
    std::string name = "network";
    std::string species_c = "C";
    std::string species_d = "D";
    std::map<std::string, double> constants;
    std::vector<Reaction> reactions;
    Kernel kernel;
    std::string theta = "smoothstep";
    std::string initial_c = "0";
    std::string initial_d = "0";
    bool operator==(const NetworkSpec&) const = default;
};

struct ScalingParams {
    int n_sites = 8;
    double mu = 32.0;
};

// Empty string when valid.
std::string check_scaling(const ScalingParams& s);

struct Violation {
    std::ptrdiff_t reaction_index = -1;  // -1 for network-level issues
    std::string reason;
};

std::vector<Violation> validate_network(const NetworkSpec& spec);

// Row-major N×N, entry [i*N + j] = γ_ij = ∫_{I_i} a(x − j/N) dx (sites 1-based in the
// formula, 0-based in storage).
std::vector<double> kernel_weights(const Kernel& kernel, int n_sites);

// Cell-averaged convolution weights: (P_N (a * P_N g))_i = Σ_k W[i*N + k] g_k.
std::vector<double> convolution_weights(const Kernel& kernel, int n_sites);

struct Box {
    double c_max = 5.0;
    double d_max = 5.0;
    int samples = 101;
};

enum class CheckStatus { VerifiedOnBox, Unverified, Violated };
const char* to_string(CheckStatus s);

struct AssumptionReport {
    Box box;
    double c1_min_f_at_zero = 0.0;
    CheckStatus c1 = CheckStatus::Unverified;
    double c2_radius = 0.0;
    CheckStatus c2 = CheckStatus::Unverified;
    std::string c2_note;
    double d2_m1 = 0.0;
    CheckStatus d2 = CheckStatus::Unverified;
    std::string d2_note;
};

// F(y) = Σ_fast γ^C λ(y); g(y) = Σ_slow γ^D λ(y).
double fast_debit(const NetworkSpec& spec, double uc, double ud);
double slow_debit(const NetworkSpec& spec, double uc, double ud);

AssumptionReport assumption_check(const NetworkSpec& spec, const Box& box);

// The bundled reference network.
NetworkSpec reference_network();

}  // namespace msrd
