#pragma once

#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

namespace msrd {

// Finite trigonometric sum a_k cos(2πkx) + b_k sin(2πkx), k ≥ 0.
class TrigPolynomial {
public:
    TrigPolynomial() = default;
    static TrigPolynomial constant(double c);
    static TrigPolynomial cos_mode(int k, double amplitude = 1.0);
    static TrigPolynomial sin_mode(int k, double amplitude = 1.0);

    double eval(double x) const;
    // Exact ∫_a^b of the sum.
    double integral(double a, double b) const;

    TrigPolynomial operator+(const TrigPolynomial& o) const;
    TrigPolynomial operator-(const TrigPolynomial& o) const;
    TrigPolynomial operator*(const TrigPolynomial& o) const;
    TrigPolynomial scaled(double s) const;

    const std::map<int, std::pair<double, double>>& terms() const { return terms_; }
    int degree() const;

private:
    void add_term(int k, double a, double b);
    std::map<int, std::pair<double, double>> terms_;
};

class ExprError : public std::runtime_error {
public:
    ExprError(const std::string& what, std::size_t pos)
        : std::runtime_error(what), position(pos) {}
    std::size_t position;
};

struct ExprNode;

// Closed-form expression in x built from + - * / ^, sin, cos, exp, sqrt, abs,
// numbers, pi and named constants.
class ClosedForm {
public:
    ClosedForm() = default;
    static ClosedForm parse(const std::string& text,
                            const std::map<std::string, double>& constants = {});

    double eval(double x) const;
    // Exact trigonometric form when the expression reduces to one.
    std::optional<TrigPolynomial> as_trig() const;
    const std::string& source() const { return source_; }
    bool empty() const { return !root_; }

private:
    std::string source_;
    std::shared_ptr<const ExprNode> root_;
};

}  // namespace msrd
