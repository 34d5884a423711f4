#include "grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <istream>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include "quadrature.hpp"

namespace msrd {

double GridFunction::sup_norm() const {
    double m = 0.0;
    for (double x : v_) m = std::max(m, std::fabs(x));
    return m;
}

double GridFunction::min() const {
    double m = INFINITY;
    for (double x : v_) m = std::min(m, x);
    return m;
}

double GridFunction::sum() const {
    double s = 0.0;
    for (double x : v_) s += x;
    return s;
}

GridFunction& GridFunction::operator+=(const GridFunction& o) {
    for (std::size_t i = 0; i < v_.size(); ++i) v_[i] += o.v_[i];
    return *this;
}

GridFunction& GridFunction::operator-=(const GridFunction& o) {
    for (std::size_t i = 0; i < v_.size(); ++i) v_[i] -= o.v_[i];
    return *this;
}

GridFunction& GridFunction::operator*=(double s) {
    for (double& x : v_) x *= s;
    return *this;
}

GridFunction operator+(GridFunction a, const GridFunction& b) { return a += b; }
GridFunction operator-(GridFunction a, const GridFunction& b) { return a -= b; }
GridFunction operator*(double s, GridFunction a) { return a *= s; }

double inner(const GridFunction& f, const GridFunction& g) {
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) s += f[i] * g[i];
    return s / static_cast<double>(f.size());
}

double l2_norm(const GridFunction& f) { return std::sqrt(inner(f, f)); }

double sup_distance(const GridFunction& f, const GridFunction& g) {
    double m = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) m = std::max(m, std::fabs(f[i] - g[i]));
    return m;
}

PairField::PairField(GridFunction c_, GridFunction d_) : c(std::move(c_)), d(std::move(d_)) {
    if (c.size() != d.size()) throw std::invalid_argument("PairField components differ in size");
}

double sup_norm(const PairField& u) { return u.c.sup_norm() + u.d.sup_norm(); }

double sup_distance(const PairField& u, const PairField& v) {
    return sup_distance(u.c, v.c) + sup_distance(u.d, v.d);
}

// ---------------------------------------------------------------------------

GridFunction project_pn(const std::function<double(double)>& f, int n) {
    static const GaussRule rule = gauss_legendre(8);
    GridFunction out(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        const double a = static_cast<double>(k) / n;
        const double b = static_cast<double>(k + 1) / n;
        const double v = composite_gauss(
            [&](double x) {
                const double y = f(x);
                if (!std::isfinite(y)) throw std::domain_error("project_pn: non-finite sample");
                return y;
            },
            a, b, 64, rule);
        out[static_cast<std::size_t>(k)] = n * v;
    }
    return out;
}

GridFunction project_pn(const TrigPolynomial& f, int n) {
    GridFunction out(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k)
        out[static_cast<std::size_t>(k)] =
            n * f.integral(static_cast<double>(k) / n, static_cast<double>(k + 1) / n);
    return out;
}

GridFunction project_pn(const ClosedForm& f, int n) {
    if (auto t = f.as_trig()) return project_pn(*t, n);
    return project_pn([&](double x) { return f.eval(x); }, n);
}

GridFunction discrete_laplacian(const GridFunction& f) {
    const long n = f.n();
    const double n2 = static_cast<double>(n) * static_cast<double>(n);
    GridFunction out(f.size());
    for (long k = 0; k < n; ++k)
        out[static_cast<std::size_t>(k)] = n2 * (f.at(k - 1) - 2.0 * f.at(k) + f.at(k + 1));
    return out;
}

Gradients discrete_gradients(const GridFunction& f) {
    const long n = f.n();
    Gradients g{GridFunction(f.size()), GridFunction(f.size())};
    for (long k = 0; k < n; ++k) {
        g.forward[static_cast<std::size_t>(k)] = static_cast<double>(n) * (f.at(k + 1) - f.at(k));
        g.backward[static_cast<std::size_t>(k)] = static_cast<double>(n) * (f.at(k) - f.at(k - 1));
    }
    return g;
}

// ---------------------------------------------------------------------------

SpectralBasis::SpectralBasis(int n) : n_(n) {
    if (n < 1) throw std::invalid_argument("spectral basis needs N >= 1");
    const double pi = std::numbers::pi;
    const double n2 = static_cast<double>(n) * n;
    const double r2 = std::sqrt(2.0);
    auto beta_of = [&](int m) { return 2.0 * n2 * (1.0 - std::cos(pi * m / n)); };
    modes_.push_back({0, false, 0.0, GridFunction(static_cast<std::size_t>(n), 1.0)});
    for (int m = 2; m < n; m += 2) {
        SpectralMode c{m, false, beta_of(m), GridFunction(static_cast<std::size_t>(n))};
        SpectralMode s{m, true, beta_of(m), GridFunction(static_cast<std::size_t>(n))};
        for (int k = 0; k < n; ++k) {
            const double arg = pi * m * (k + 1) / n;
            c.vec[static_cast<std::size_t>(k)] = r2 * std::cos(arg);
            s.vec[static_cast<std::size_t>(k)] = r2 * std::sin(arg);
        }
        modes_.push_back(std::move(c));
        modes_.push_back(std::move(s));
    }
    if (n % 2 == 0 && n >= 2) {
        SpectralMode e{n, false, 4.0 * n2, GridFunction(static_cast<std::size_t>(n))};
        for (int k = 0; k < n; ++k) e.vec[static_cast<std::size_t>(k)] = (k + 1) % 2 == 0 ? 1.0 : -1.0;
        modes_.push_back(std::move(e));
    }
    for (const auto& md : modes_)
        if (betas_.empty() || betas_.back() != md.beta) betas_.push_back(md.beta);
    const auto nn = static_cast<std::size_t>(n);
    projectors_.assign(betas_.size(), std::vector<double>(nn * nn, 0.0));
    for (const auto& md : modes_) {
        const auto g = static_cast<std::size_t>(
            std::find(betas_.begin(), betas_.end(), md.beta) - betas_.begin());
        for (std::size_t j = 0; j < nn; ++j)
            for (std::size_t k = 0; k < nn; ++k)
                projectors_[g][j * nn + k] += md.vec[j] * md.vec[k] / n;
    }
}

GridFunction SpectralBasis::apply(double t, const GridFunction& f) const {
    GridFunction out(f.size());
    for (const auto& md : modes_) {
        const double c = inner(f, md.vec) * std::exp(-md.beta * t);
        for (std::size_t k = 0; k < f.size(); ++k) out[k] += c * md.vec[k];
    }
    return out;
}

std::vector<double> SpectralBasis::matrix(double t) const {
    const auto nn = static_cast<std::size_t>(n_);
    std::vector<double> m(nn * nn, 0.0);
    for (std::size_t g = 0; g < betas_.size(); ++g) {
        const double e = std::exp(-betas_[g] * t);
        for (std::size_t i = 0; i < nn * nn; ++i) m[i] += e * projectors_[g][i];
    }
    return m;
}

GridFunction semigroup_apply(const SpectralBasis& basis, double t, const GridFunction& f) {
    if (!(t >= 0.0)) throw std::domain_error("semigroup_apply: t must be >= 0");
    return basis.apply(t, f);
}

double heat_reference(double t, int m) {
    const double w = 2.0 * std::numbers::pi * m;
    return std::exp(-w * w * t);
}

double h_bound(const SpectralBasis& basis, double t) {
    double s = 1.0;
    for (double b : basis.distinct_betas())
        if (b > 0.0) s += 4.0 * std::exp(-2.0 * b * t) * (b + 1.0);
    return s;
}

double h_bound_integral(const SpectralBasis& basis, double t) {
    double s = t;
    for (double b : basis.distinct_betas())
        if (b > 0.0) s += 4.0 * (b + 1.0) * (1.0 - std::exp(-2.0 * b * t)) / (2.0 * b);
    return s;
}

GridFunction block_average(const GridFunction& fine, int n) {
    const auto nf = fine.size();
    if (n <= 0 || nf % static_cast<std::size_t>(n) != 0)
        throw std::invalid_argument("block_average: coarse grid must divide the fine grid");
    const std::size_t r = nf / static_cast<std::size_t>(n);
    GridFunction out(static_cast<std::size_t>(n));
    for (std::size_t k = 0; k < static_cast<std::size_t>(n); ++k) {
        double s = 0.0;
        for (std::size_t i = 0; i < r; ++i) s += fine[k * r + i];
        out[k] = s / static_cast<double>(r);
    }
    return out;
}

PairField block_average(const PairField& fine, int n) {
    return PairField(block_average(fine.c, n), block_average(fine.d, n));
}

void write_csv(std::ostream& os, const GridFunction& f) {
    char buf[64];
    os << "site,value\n";
    for (std::size_t k = 0; k < f.size(); ++k) {
        std::snprintf(buf, sizeof buf, "%zu,%.17g\n", k + 1, f[k]);
        os << buf;
    }
}

namespace {
void put_le64(std::ostream& os, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    os.write(reinterpret_cast<const char*>(b), 8);
}
std::uint64_t get_le64(std::istream& is) {
    unsigned char b[8];
    if (!is.read(reinterpret_cast<char*>(b), 8)) throw std::runtime_error("truncated binary snapshot");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}
}  // namespace

void write_binary(std::ostream& os, const GridFunction& f) {
    put_le64(os, f.size());
    for (double x : f.values()) {
        std::uint64_t bits;
        std::memcpy(&bits, &x, 8);
        put_le64(os, bits);
    }
}

GridFunction read_binary(std::istream& is) {
    const std::uint64_t n = get_le64(is);
    if (n > (1u << 28)) throw std::runtime_error("binary snapshot size implausible");
    GridFunction f(static_cast<std::size_t>(n));
    for (std::size_t k = 0; k < n; ++k) {
        const std::uint64_t bits = get_le64(is);
        std::memcpy(&f[k], &bits, 8);
    }
    return f;
}

}  // namespace msrd
