#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "expr.hpp"

namespace msrd {

// Step function on N periodic sites; index k holds the value on ((k)/N, (k+1)/N].
class GridFunction {
public:
    GridFunction() = default;
    explicit GridFunction(std::size_t n, double fill = 0.0) : v_(n, fill) {}
    explicit GridFunction(std::vector<double> values) : v_(std::move(values)) {}

    std::size_t size() const { return v_.size(); }
    int n() const { return static_cast<int>(v_.size()); }
    double& operator[](std::size_t k) { return v_[k]; }
    double operator[](std::size_t k) const { return v_[k]; }
    // Periodic access for any integer offset.
    double at(long k) const {
        const long n = static_cast<long>(v_.size());
        return v_[static_cast<std::size_t>(((k % n) + n) % n)];
    }
    std::span<double> values() { return v_; }
    std::span<const double> values() const { return v_; }
    const std::vector<double>& vec() const { return v_; }
    double* data() { return v_.data(); }
    const double* data() const { return v_.data(); }

    double sup_norm() const;
    double min() const;
    double sum() const;

    GridFunction& operator+=(const GridFunction& o);
    GridFunction& operator-=(const GridFunction& o);
    GridFunction& operator*=(double s);
    bool operator==(const GridFunction&) const = default;

private:
    std::vector<double> v_;
};

GridFunction operator+(GridFunction a, const GridFunction& b);
GridFunction operator-(GridFunction a, const GridFunction& b);
GridFunction operator*(double s, GridFunction a);

// ⟨f,g⟩₂ = N⁻¹ Σ f_j g_j.
double inner(const GridFunction& f, const GridFunction& g);
double l2_norm(const GridFunction& f);
double sup_distance(const GridFunction& f, const GridFunction& g);

struct PairField {
    GridFunction c;
    GridFunction d;
    PairField() = default;
    PairField(GridFunction c_, GridFunction d_);
    explicit PairField(std::size_t n) : c(n), d(n) {}
    int n() const { return c.n(); }
    bool operator==(const PairField&) const = default;
};

// ‖f₁‖_∞ + ‖f₂‖_∞.
double sup_norm(const PairField& u);
double sup_distance(const PairField& u, const PairField& v);

// Quadrature route: composite Gauss-Legendre, 64 panels per site. Throws
// std::domain_error on non-finite samples.
GridFunction project_pn(const std::function<double(double)>& f, int n);
GridFunction project_pn(const TrigPolynomial& f, int n);
// Exact when the expression reduces to a trigonometric polynomial.
GridFunction project_pn(const ClosedForm& f, int n);

GridFunction discrete_laplacian(const GridFunction& f);
struct Gradients {
    GridFunction forward;
    GridFunction backward;
};
Gradients discrete_gradients(const GridFunction& f);

// Eigenbasis of Δ_N: φ_0 ≡ 1, √2 cos(πmj/N) and √2 sin(πmj/N) for even 0 < m < N,
// and cos(πj) when N is even.
struct SpectralMode {
    int m = 0;
    bool sine = false;
    double beta = 0.0;
    GridFunction vec;
};

class SpectralBasis {
public:
    explicit SpectralBasis(int n);
    int n() const { return n_; }
    const std::vector<SpectralMode>& modes() const { return modes_; }
    std::size_t size() const { return modes_.size(); }
    // Distinct eigenvalues in increasing order.
    const std::vector<double>& distinct_betas() const { return betas_; }

    GridFunction apply(double t, const GridFunction& f) const;
    // Dense T_N(t), row-major.
    std::vector<double> matrix(double t) const;
    // P_β for each distinct eigenvalue, row-major N×N.
    const std::vector<std::vector<double>>& projectors() const { return projectors_; }

private:
    int n_;
    std::vector<SpectralMode> modes_;
    std::vector<double> betas_;
    std::vector<std::vector<double>> projectors_;
};

// Throws std::domain_error for negative t.
GridFunction semigroup_apply(const SpectralBasis& basis, double t, const GridFunction& f);

// Decay factor of cos(2πmx) under the continuous heat semigroup.
double heat_reference(double t, int m);

// h_N(t) = 1 + 4 Σ_{m>0} e^{−2β_m t}(β_m + 1) over distinct nonzero eigenvalues.
double h_bound(const SpectralBasis& basis, double t);
double h_bound_integral(const SpectralBasis& basis, double t);

// P_N of a fine grid function whose size is a multiple of n.
GridFunction block_average(const GridFunction& fine, int n);
PairField block_average(const PairField& fine, int n);

void write_csv(std::ostream& os, const GridFunction& f);
void write_binary(std::ostream& os, const GridFunction& f);
GridFunction read_binary(std::istream& is);

}  // namespace msrd
