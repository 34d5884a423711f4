#include "model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace msrd {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}  // namespace

const char* to_string(ReactionClass c) {
    switch (c) {
        case ReactionClass::FastC: return "FastC";
        case ReactionClass::FastMixed: return "FastMixed";
        case ReactionClass::SlowMixed: return "SlowMixed";
        case ReactionClass::SlowD: return "SlowD";
    }
    return "?";
}

bool parse_reaction_class(const std::string& s, ReactionClass& out) {
    for (auto c : {ReactionClass::FastC, ReactionClass::FastMixed, ReactionClass::SlowMixed,
                   ReactionClass::SlowD}) {
        if (s == to_string(c)) {
            out = c;
            return true;
        }
    }
    return false;
}

bool PolynomialRate::depends_on_c() const {
    return std::any_of(terms.begin(), terms.end(),
                       [](const Monomial& m) { return m.exp_c > 0 && m.coef != 0.0; });
}

bool PolynomialRate::depends_on_d() const {
    return std::any_of(terms.begin(), terms.end(),
                       [](const Monomial& m) { return m.exp_d > 0 && m.coef != 0.0; });
}

int PolynomialRate::degree_d() const {
    int d = 0;
    for (const auto& m : terms)
        if (m.coef != 0.0) d = std::max(d, m.exp_d);
    return d;
}

double eval_rate(const PolynomialRate& rate, double u_c, double u_d) {
    if (!(u_c >= 0.0) || !(u_d >= 0.0) || !std::isfinite(u_c) || !std::isfinite(u_d))
        throw std::domain_error("eval_rate: state must be finite and non-negative");
    return rate(u_c, u_d);
}

// ---------------------------------------------------------------------------

const char* to_string(KernelType k) {
    switch (k) {
        case KernelType::ConstantBox: return "ConstantBox";
        case KernelType::RaisedCosine: return "RaisedCosine";
        case KernelType::TableLookup: return "TableLookup";
    }
    return "?";
}

bool parse_kernel_type(const std::string& s, KernelType& out) {
    for (auto k : {KernelType::ConstantBox, KernelType::RaisedCosine, KernelType::TableLookup}) {
        if (s == to_string(k)) {
            out = k;
            return true;
        }
    }
    return false;
}

Kernel Kernel::constant_box() { return Kernel{}; }

Kernel Kernel::raised_cosine() {
    Kernel k;
    k.type_ = KernelType::RaisedCosine;
    return k;
}

Kernel Kernel::table(std::vector<double> values) {
    if (values.empty()) throw std::invalid_argument("kernel table must be non-empty");
    const std::size_t n = values.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(values[i]) || values[i] < 0.0)
            throw std::invalid_argument("kernel table values must be finite and non-negative");
        if (values[i] != values[n - 1 - i])
            throw std::invalid_argument("kernel table must be even: value[k] == value[K-1-k]");
        if (values[i] > values[0])
            throw std::invalid_argument("kernel table must attain its maximum at 0");
    }
    Kernel k;
    k.type_ = KernelType::TableLookup;
    k.table_ = std::move(values);
    const double w = 1.0 / static_cast<double>(n);
    k.table_cumulative_.assign(n + 1, 0.0);
    k.table_cumulative2_.assign(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        k.table_cumulative_[i + 1] = k.table_cumulative_[i] + k.table_[i] * w;
        k.table_cumulative2_[i + 1] =
            k.table_cumulative2_[i] + k.table_cumulative_[i] * w + 0.5 * k.table_[i] * w * w;
    }
    return k;
}

double Kernel::value(double x) const {
    switch (type_) {
        case KernelType::ConstantBox: return 1.0;
        case KernelType::RaisedCosine: return 1.0 + std::cos(kTwoPi * x);
        case KernelType::TableLookup: {
            const double f = x - std::floor(x);
            auto idx = static_cast<std::size_t>(f * static_cast<double>(table_.size()));
            return table_[std::min(idx, table_.size() - 1)];
        }
    }
    return 0.0;
}

double Kernel::peak() const {
    switch (type_) {
        case KernelType::ConstantBox: return 1.0;
        case KernelType::RaisedCosine: return 2.0;
        case KernelType::TableLookup: return table_.front();
    }
    return 0.0;
}

double Kernel::integral() const {
    if (type_ == KernelType::TableLookup) return table_cumulative_.back();
    return 1.0;
}

double Kernel::l2_norm_sq() const {
    switch (type_) {
        case KernelType::ConstantBox: return 1.0;
        case KernelType::RaisedCosine: return 1.5;
        case KernelType::TableLookup: {
            double s = 0.0;
            for (double v : table_) s += v * v;
            return s / static_cast<double>(table_.size());
        }
    }
    return 0.0;
}

double Kernel::antiderivative(double x) const {
    switch (type_) {
        case KernelType::ConstantBox: return x;
        case KernelType::RaisedCosine: return x + std::sin(kTwoPi * x) / kTwoPi;
        case KernelType::TableLookup: {
            const double n = std::floor(x);
            const double f = x - n;
            const std::size_t k = table_.size();
            auto idx = std::min(static_cast<std::size_t>(f * static_cast<double>(k)), k - 1);
            const double x0 = static_cast<double>(idx) / static_cast<double>(k);
            return n * integral() + table_cumulative_[idx] + table_[idx] * (f - x0);
        }
    }
    return 0.0;
}

double Kernel::second_antiderivative(double x) const {
    switch (type_) {
        case KernelType::ConstantBox: return 0.5 * x * x;
        case KernelType::RaisedCosine:
            return 0.5 * x * x + (1.0 - std::cos(kTwoPi * x)) / (kTwoPi * kTwoPi);
        case KernelType::TableLookup: {
            const double n = std::floor(x);
            const double f = x - n;
            const std::size_t k = table_.size();
            auto idx = std::min(static_cast<std::size_t>(f * static_cast<double>(k)), k - 1);
            const double x0 = static_cast<double>(idx) / static_cast<double>(k);
            const double d = f - x0;
            const double b0 = table_cumulative2_[idx] + table_cumulative_[idx] * d +
                              0.5 * table_[idx] * d * d;
            const double I = integral();
            const double J = table_cumulative2_.back();
            return I * n * (n - 1.0) / 2.0 + n * J + n * I * f + b0;
        }
    }
    return 0.0;
}

std::vector<double> Kernel::breakpoints() const {
    std::vector<double> out{0.0};
    if (type_ == KernelType::TableLookup) {
        for (std::size_t i = 1; i < table_.size(); ++i)
            out.push_back(static_cast<double>(i) / static_cast<double>(table_.size()));
    }
    return out;
}

// ---------------------------------------------------------------------------

std::string check_scaling(const ScalingParams& s) {
    if (s.n_sites < 1) return "n_sites must be >= 1";
    if (!(s.mu >= 1.0) || !std::isfinite(s.mu)) return "mu must be finite and >= 1";
    return {};
}

std::vector<Violation> validate_network(const NetworkSpec& spec) {
    std::vector<Violation> out;
    if (spec.reactions.empty()) out.push_back({-1, "network must contain at least one reaction"});
    if (spec.theta != "smoothstep") out.push_back({-1, "theta must be \"smoothstep\""});
    for (std::size_t i = 0; i < spec.reactions.size(); ++i) {
        const Reaction& r = spec.reactions[i];
        const auto idx = static_cast<std::ptrdiff_t>(i);
        if (r.cls == ReactionClass::FastMixed && r.gamma_d != 0)
            out.push_back({idx, "FastMixed must have gamma_d = 0"});
        if (r.cls == ReactionClass::FastC && r.gamma_d != 0)
            out.push_back({idx, "FastC must have gamma_d = 0"});
        if (r.cls == ReactionClass::SlowD && r.gamma_c != 0)
            out.push_back({idx, "SlowD must have gamma_c = 0"});
        if (r.cls == ReactionClass::FastC && r.rate.depends_on_d())
            out.push_back({idx, "FastC rate must depend only on u_C"});
        if (r.cls == ReactionClass::SlowD && r.rate.depends_on_c())
            out.push_back({idx, "SlowD rate must depend only on u_D"});
        if (r.rate.terms.empty()) out.push_back({idx, "rate must have at least one term"});
        bool bad_coef = false;
        for (const auto& m : r.rate.terms) {
            if (!std::isfinite(m.coef)) bad_coef = true;
            if (m.exp_c < 0 || m.exp_d < 0)
                out.push_back({idx, "rate exponents must be non-negative integers"});
            if ((m.exp_c > 0 || m.exp_d > 0) && m.coef < 0.0)
                out.push_back({idx, "non-constant rate coefficients must be >= 0"});
        }
        if (bad_coef) {
            out.push_back({idx, "rate coefficients must be finite"});
            continue;
        }
        // Sample [0,10]^2 for non-negativity.
        bool negative = false;
        for (int a = 0; a <= 20 && !negative; ++a)
            for (int b = 0; b <= 20 && !negative; ++b)
                if (r.rate(0.5 * a, 0.5 * b) < 0.0) negative = true;
        if (negative) out.push_back({idx, "rate must be non-negative on the quadrant"});
    }
    return out;
}

std::vector<double> kernel_weights(const Kernel& kernel, int n_sites) {
    const int n = n_sites;
    const double h = 1.0 / n;
    // Circulant in d = i - j (mod N).
    std::vector<double> row(static_cast<std::size_t>(n));
    for (int d = 0; d < n; ++d)
        row[static_cast<std::size_t>(d)] = kernel.antiderivative(d * h) - kernel.antiderivative((d - 1) * h);
    std::vector<double> g(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) g[static_cast<std::size_t>(i) * n + j] = row[static_cast<std::size_t>(((i - j) % n + n) % n)];
    return g;
}

std::vector<double> convolution_weights(const Kernel& kernel, int n_sites) {
    const int n = n_sites;
    const double h = 1.0 / n;
    std::vector<double> row(static_cast<std::size_t>(n));
    for (int d = 0; d < n; ++d) {
        // Second difference of B centered at d; d is reduced to keep arguments small.
        const int dd = d <= n / 2 ? d : d - n;
        const double v = kernel.second_antiderivative((dd + 1) * h) -
                         2.0 * kernel.second_antiderivative(dd * h) +
                         kernel.second_antiderivative((dd - 1) * h);
        row[static_cast<std::size_t>(d)] = n * v;
    }
    std::vector<double> w(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) w[static_cast<std::size_t>(i) * n + k] = row[static_cast<std::size_t>(((i - k) % n + n) % n)];
    return w;
}

// ---------------------------------------------------------------------------

const char* to_string(CheckStatus s) {
    switch (s) {
        case CheckStatus::VerifiedOnBox: return "VERIFIED-ON-BOX";
        case CheckStatus::Unverified: return "UNVERIFIED";
        case CheckStatus::Violated: return "VIOLATED";
    }
    return "?";
}

double fast_debit(const NetworkSpec& spec, double uc, double ud) {
    double s = 0.0;
    for (const auto& r : spec.reactions)
        if (is_fast(r.cls)) s += r.gamma_c * r.rate(uc, ud);
    return s;
}

double slow_debit(const NetworkSpec& spec, double uc, double ud) {
    double s = 0.0;
    for (const auto& r : spec.reactions)
        if (is_slow(r.cls)) s += r.gamma_d * r.rate(uc, ud);
    return s;
}

AssumptionReport assumption_check(const NetworkSpec& spec, const Box& box) {
    if (!(box.c_max > 0.0) || !(box.d_max > 0.0) || box.samples < 3)
        throw std::invalid_argument("assumption_check: box must have positive extent");
    AssumptionReport rep;
    rep.box = box;
    const int m = box.samples;
    auto yc = [&](int a) { return box.c_max * a / (m - 1); };
    auto yd = [&](int b) { return box.d_max * b / (m - 1); };

    // C1: F(0, y2) >= 0.
    double fmin = INFINITY;
    for (int b = 0; b < m; ++b) fmin = std::min(fmin, fast_debit(spec, 0.0, yd(b)));
    rep.c1_min_f_at_zero = fmin;
    rep.c1 = fmin >= 0.0 ? CheckStatus::VerifiedOnBox : CheckStatus::Violated;

    // C2: per y2 column, the smallest y1 beyond which every sample has F < 0.
    std::vector<double> radius(static_cast<std::size_t>(m), INFINITY);
    for (int b = 0; b < m; ++b) {
        double r = INFINITY;
        for (int a = m - 1; a >= 0; --a) {
            if (fast_debit(spec, yc(a), yd(b)) < 0.0) r = a == 0 ? 0.0 : yc(a - 1);
            else break;
        }
        radius[static_cast<std::size_t>(b)] = r;
    }
    const double r_max = *std::max_element(radius.begin(), radius.end());
    rep.c2_radius = r_max;
    if (!std::isfinite(r_max)) {
        rep.c2 = CheckStatus::Unverified;
        rep.c2_note = "F is not eventually negative in u_C within the box";
    } else if (radius.back() > radius.front()) {
        rep.c2 = CheckStatus::Unverified;
        rep.c2_note = "negativity radius grows with u_D; no uniform ball on the box";
    } else {
        rep.c2 = CheckStatus::VerifiedOnBox;
        rep.c2_note = "F < 0 for u_C beyond the reported radius on every sampled u_D";
    }

    // D2: |g(y1, y2)| <= M1 (|y2| + 1) for |y1| <= c_max.
    double m1 = 0.0;
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b)
            m1 = std::max(m1, std::fabs(slow_debit(spec, yc(a), yd(b))) / (yd(b) + 1.0));
    rep.d2_m1 = m1;
    int deg = 0;
    for (const auto& r : spec.reactions)
        if (is_slow(r.cls) && r.gamma_d != 0) deg = std::max(deg, r.rate.degree_d());
    if (deg <= 1) {
        rep.d2 = CheckStatus::VerifiedOnBox;
        rep.d2_note = "slow rates are at most linear in u_D";
    } else {
        rep.d2 = CheckStatus::Unverified;
        rep.d2_note = "slow rates are superlinear in u_D; sampled constant is box-dependent";
    }
    return rep;
}

NetworkSpec reference_network() {
    NetworkSpec s;
    s.name = "reference";
    s.kernel = Kernel::raised_cosine();
    s.reactions = {
        {"birth_c", ReactionClass::FastC, +1, 0, {{{1.0, 0, 0}}}},
        {"death_c", ReactionClass::FastC, -1, 0, {{{1.0, 1, 0}}}},
        {"activation", ReactionClass::FastMixed, +1, 0, {{{0.5, 0, 1}}}},
        {"repression", ReactionClass::SlowMixed, 0, -1, {{{0.25, 1, 1}}}},
        {"birth_d", ReactionClass::SlowD, 0, +1, {{{1.0, 0, 0}}}},
        {"death_d", ReactionClass::SlowD, 0, -1, {{{0.2, 0, 1}}}},
    };
    s.initial_c = "1 + 0.5*cos(2*pi*x)";
    s.initial_d = "2";
    return s;
}

}  // namespace msrd
