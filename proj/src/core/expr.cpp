#include "expr.hpp"

#include <cctype>
#include <cmath>
#include <numbers>
#include <vector>

namespace msrd {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

TrigPolynomial TrigPolynomial::constant(double c) {
    TrigPolynomial p;
    p.add_term(0, c, 0.0);
    return p;
}

TrigPolynomial TrigPolynomial::cos_mode(int k, double amplitude) {
    TrigPolynomial p;
    if (k < 0) k = -k;
    p.add_term(k, amplitude, 0.0);
    return p;
}

TrigPolynomial TrigPolynomial::sin_mode(int k, double amplitude) {
    TrigPolynomial p;
    if (k < 0) {
        k = -k;
        amplitude = -amplitude;
    }
    if (k != 0) p.add_term(k, 0.0, amplitude);
    return p;
}

void TrigPolynomial::add_term(int k, double a, double b) {
    if (k == 0) b = 0.0;
    auto& t = terms_[k];
    t.first += a;
    t.second += b;
}

double TrigPolynomial::eval(double x) const {
    double s = 0.0;
    for (const auto& [k, ab] : terms_) {
        if (k == 0) {
            s += ab.first;
        } else {
            const double w = kTwoPi * k * x;
            s += ab.first * std::cos(w) + ab.second * std::sin(w);
        }
    }
    return s;
}

double TrigPolynomial::integral(double a, double b) const {
    double s = 0.0;
    for (const auto& [k, ab] : terms_) {
        if (k == 0) {
            s += ab.first * (b - a);
        } else {
            const double w = kTwoPi * k;
            s += ab.first * (std::sin(w * b) - std::sin(w * a)) / w;
            s -= ab.second * (std::cos(w * b) - std::cos(w * a)) / w;
        }
    }
    return s;
}

TrigPolynomial TrigPolynomial::operator+(const TrigPolynomial& o) const {
    TrigPolynomial r = *this;
    for (const auto& [k, ab] : o.terms_) r.add_term(k, ab.first, ab.second);
    return r;
}

TrigPolynomial TrigPolynomial::operator-(const TrigPolynomial& o) const {
    return *this + o.scaled(-1.0);
}

TrigPolynomial TrigPolynomial::scaled(double s) const {
    TrigPolynomial r;
    for (const auto& [k, ab] : terms_) r.add_term(k, s * ab.first, s * ab.second);
    return r;
}

// Product-to-sum on each pair of modes.
TrigPolynomial TrigPolynomial::operator*(const TrigPolynomial& o) const {
    TrigPolynomial r;
    for (const auto& [k, ab] : terms_) {
        for (const auto& [l, cd] : o.terms_) {
            const double a = ab.first, b = ab.second, c = cd.first, d = cd.second;
            const int sum = k + l;
            const int diff = k - l;
            // cos·cos = [cos(k+l) + cos(k−l)]/2
            r.add_term(sum, 0.5 * a * c, 0.0);
            // sin·sin = [cos(k−l) − cos(k+l)]/2
            r.add_term(sum, -0.5 * b * d, 0.0);
            // cos(k)·sin(l) = [sin(k+l) − sin(k−l)]/2
            r.add_term(sum, 0.0, 0.5 * (a * d + b * c));
            const int ad = diff < 0 ? -diff : diff;
            const double sgn = diff < 0 ? -1.0 : 1.0;
            r.add_term(ad, 0.5 * a * c + 0.5 * b * d, 0.0);
            // sin(k)cos(l) − cos(k)sin(l) contributes sin(k−l)/2 terms
            r.add_term(ad, 0.0, sgn * 0.5 * (b * c - a * d));
        }
    }
    return r;
}

int TrigPolynomial::degree() const {
    return terms_.empty() ? 0 : terms_.rbegin()->first;
}

// ---------------------------------------------------------------------------

enum class NodeKind { Number, X, Add, Sub, Mul, Div, Pow, Neg, Call };
enum class Func { Sin, Cos, Exp, Sqrt, Abs, Log, Tan };

struct ExprNode {
    NodeKind kind = NodeKind::Number;
    double value = 0.0;
    Func func = Func::Sin;
    std::shared_ptr<const ExprNode> lhs, rhs;
};

namespace {

using NodePtr = std::shared_ptr<const ExprNode>;

NodePtr make_number(double v) {
    auto n = std::make_shared<ExprNode>();
    n->kind = NodeKind::Number;
    n->value = v;
    return n;
}

NodePtr make_binary(NodeKind k, NodePtr a, NodePtr b) {
    auto n = std::make_shared<ExprNode>();
    n->kind = k;
    n->lhs = std::move(a);
    n->rhs = std::move(b);
    return n;
}

class Parser {
public:
    Parser(const std::string& s, const std::map<std::string, double>& c) : src_(s), consts_(c) {}

    NodePtr parse() {
        NodePtr n = expr();
        skip_ws();
        if (pos_ != src_.size()) fail("unexpected trailing input");
        return n;
    }

private:
    [[noreturn]] void fail(const std::string& msg) const {
        throw ExprError(msg + " at position " + std::to_string(pos_), pos_);
    }

    void skip_ws() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip_ws();
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    NodePtr expr() {
        NodePtr n = term();
        for (;;) {
            if (accept('+')) n = make_binary(NodeKind::Add, n, term());
            else if (accept('-')) n = make_binary(NodeKind::Sub, n, term());
            else return n;
        }
    }

    NodePtr term() {
        NodePtr n = unary();
        for (;;) {
            if (accept('*')) n = make_binary(NodeKind::Mul, n, unary());
            else if (accept('/')) n = make_binary(NodeKind::Div, n, unary());
            else return n;
        }
    }

    NodePtr unary() {
        if (accept('-')) {
            auto n = std::make_shared<ExprNode>();
            n->kind = NodeKind::Neg;
            n->lhs = unary();
            return n;
        }
        if (accept('+')) return unary();
        return power();
    }

    // Right-associative; the exponent may carry its own sign.
    NodePtr power() {
        NodePtr base = primary();
        if (accept('^')) return make_binary(NodeKind::Pow, base, unary());
        return base;
    }

    NodePtr primary() {
        skip_ws();
        if (pos_ >= src_.size()) fail("unexpected end of expression");
        const char c = src_[pos_];
        if (c == '(') {
            ++pos_;
            NodePtr n = expr();
            if (!accept(')')) fail("expected ')'");
            return n;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
        fail(std::string("unexpected character '") + c + "'");
    }

    NodePtr number() {
        const char* begin = src_.c_str() + pos_;
        char* end = nullptr;
        const double v = std::strtod(begin, &end);
        if (end == begin) fail("malformed number");
        pos_ += static_cast<std::size_t>(end - begin);
        return make_number(v);
    }

    NodePtr identifier() {
        const std::size_t start = pos_;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
            ++pos_;
        const std::string name = src_.substr(start, pos_ - start);
        skip_ws();
        if (pos_ < src_.size() && src_[pos_] == '(') {
            static const std::map<std::string, Func> funcs = {
                {"sin", Func::Sin},   {"cos", Func::Cos}, {"exp", Func::Exp}, {"sqrt", Func::Sqrt},
                {"abs", Func::Abs},   {"log", Func::Log}, {"tan", Func::Tan}};
            auto it = funcs.find(name);
            if (it == funcs.end()) {
                pos_ = start;
                fail("unknown function '" + name + "'");
            }
            ++pos_;
            auto n = std::make_shared<ExprNode>();
            n->kind = NodeKind::Call;
            n->func = it->second;
            n->lhs = expr();
            if (!accept(')')) fail("expected ')' after function argument");
            return n;
        }
        if (name == "x") {
            auto n = std::make_shared<ExprNode>();
            n->kind = NodeKind::X;
            return n;
        }
        if (name == "pi") return make_number(std::numbers::pi);
        auto it = consts_.find(name);
        if (it == consts_.end()) {
            pos_ = start;
            fail("unknown identifier '" + name + "'");
        }
        return make_number(it->second);
    }

    const std::string& src_;
    const std::map<std::string, double>& consts_;
    std::size_t pos_ = 0;
};

double eval_node(const ExprNode& n, double x) {
    switch (n.kind) {
        case NodeKind::Number: return n.value;
        case NodeKind::X: return x;
        case NodeKind::Add: return eval_node(*n.lhs, x) + eval_node(*n.rhs, x);
        case NodeKind::Sub: return eval_node(*n.lhs, x) - eval_node(*n.rhs, x);
        case NodeKind::Mul: return eval_node(*n.lhs, x) * eval_node(*n.rhs, x);
        case NodeKind::Div: return eval_node(*n.lhs, x) / eval_node(*n.rhs, x);
        case NodeKind::Pow: return std::pow(eval_node(*n.lhs, x), eval_node(*n.rhs, x));
        case NodeKind::Neg: return -eval_node(*n.lhs, x);
        case NodeKind::Call: {
            const double a = eval_node(*n.lhs, x);
            switch (n.func) {
                case Func::Sin: return std::sin(a);
                case Func::Cos: return std::cos(a);
                case Func::Exp: return std::exp(a);
                case Func::Sqrt: return std::sqrt(a);
                case Func::Abs: return std::fabs(a);
                case Func::Log: return std::log(a);
                case Func::Tan: return std::tan(a);
            }
        }
    }
    return 0.0;
}

// slope·x + intercept
struct Affine {
    double slope = 0.0;
    double intercept = 0.0;
};

std::optional<Affine> as_affine(const ExprNode& n) {
    switch (n.kind) {
        case NodeKind::Number: return Affine{0.0, n.value};
        case NodeKind::X: return Affine{1.0, 0.0};
        case NodeKind::Neg: {
            auto a = as_affine(*n.lhs);
            if (!a) return std::nullopt;
            return Affine{-a->slope, -a->intercept};
        }
        case NodeKind::Add:
        case NodeKind::Sub: {
            auto a = as_affine(*n.lhs);
            auto b = as_affine(*n.rhs);
            if (!a || !b) return std::nullopt;
            const double s = n.kind == NodeKind::Add ? 1.0 : -1.0;
            return Affine{a->slope + s * b->slope, a->intercept + s * b->intercept};
        }
        case NodeKind::Mul: {
            auto a = as_affine(*n.lhs);
            auto b = as_affine(*n.rhs);
            if (!a || !b) return std::nullopt;
            if (a->slope != 0.0 && b->slope != 0.0) return std::nullopt;
            return Affine{a->slope * b->intercept + b->slope * a->intercept,
                          a->intercept * b->intercept};
        }
        case NodeKind::Div: {
            auto a = as_affine(*n.lhs);
            auto b = as_affine(*n.rhs);
            if (!a || !b || b->slope != 0.0 || b->intercept == 0.0) return std::nullopt;
            return Affine{a->slope / b->intercept, a->intercept / b->intercept};
        }
        default: break;
    }
    if (n.kind == NodeKind::Pow || n.kind == NodeKind::Call) {
        auto t = as_affine(*n.lhs);
        // Only constant subtrees are accepted here.
        if (t && t->slope == 0.0 && (n.kind == NodeKind::Call || (as_affine(*n.rhs) &&
                                                                 as_affine(*n.rhs)->slope == 0.0)))
            return Affine{0.0, eval_node(n, 0.0)};
    }
    return std::nullopt;
}

// Integer k with slope = 2πk, if any.
std::optional<int> integer_mode(double slope) {
    const double k = slope / kTwoPi;
    const double r = std::round(k);
    if (std::fabs(k - r) > 1e-9 * std::max(1.0, std::fabs(k))) return std::nullopt;
    if (std::fabs(r) > 1e6) return std::nullopt;
    return static_cast<int>(r);
}

std::optional<TrigPolynomial> to_trig(const ExprNode& n) {
    if (auto a = as_affine(n); a && a->slope == 0.0) return TrigPolynomial::constant(a->intercept);
    switch (n.kind) {
        case NodeKind::Add:
        case NodeKind::Sub: {
            auto a = to_trig(*n.lhs);
            auto b = to_trig(*n.rhs);
            if (!a || !b) return std::nullopt;
            return n.kind == NodeKind::Add ? *a + *b : *a - *b;
        }
        case NodeKind::Neg: {
            auto a = to_trig(*n.lhs);
            if (!a) return std::nullopt;
            return a->scaled(-1.0);
        }
        case NodeKind::Mul: {
            auto a = to_trig(*n.lhs);
            auto b = to_trig(*n.rhs);
            if (!a || !b) return std::nullopt;
            return *a * *b;
        }
        case NodeKind::Div: {
            auto a = to_trig(*n.lhs);
            auto b = as_affine(*n.rhs);
            if (!a || !b || b->slope != 0.0 || b->intercept == 0.0) return std::nullopt;
            return a->scaled(1.0 / b->intercept);
        }
        case NodeKind::Pow: {
            auto e = as_affine(*n.rhs);
            if (!e || e->slope != 0.0) return std::nullopt;
            const double p = e->intercept;
            if (p < 0.0 || p > 64.0 || p != std::floor(p)) return std::nullopt;
            auto base = to_trig(*n.lhs);
            if (!base) return std::nullopt;
            TrigPolynomial r = TrigPolynomial::constant(1.0);
            for (int i = 0; i < static_cast<int>(p); ++i) r = r * *base;
            return r;
        }
        case NodeKind::Call: {
            if (n.func != Func::Sin && n.func != Func::Cos) return std::nullopt;
            auto arg = as_affine(*n.lhs);
            if (!arg) return std::nullopt;
            auto k = integer_mode(arg->slope);
            if (!k) return std::nullopt;
            const double c = std::cos(arg->intercept), s = std::sin(arg->intercept);
            // cos(w + φ) = cos φ cos w − sin φ sin w; sin(w + φ) = sin φ cos w + cos φ sin w
            if (n.func == Func::Cos)
                return TrigPolynomial::cos_mode(*k, c) + TrigPolynomial::sin_mode(*k, -s);
            return TrigPolynomial::cos_mode(*k, s) + TrigPolynomial::sin_mode(*k, c);
        }
        default: return std::nullopt;
    }
}

}  // namespace

ClosedForm ClosedForm::parse(const std::string& text, const std::map<std::string, double>& constants) {
    ClosedForm f;
    f.source_ = text;
    f.root_ = Parser(text, constants).parse();
    return f;
}

double ClosedForm::eval(double x) const {
    if (!root_) throw std::logic_error("empty closed form");
    return eval_node(*root_, x);
}

std::optional<TrigPolynomial> ClosedForm::as_trig() const {
    if (!root_) return std::nullopt;
    return to_trig(*root_);
}

}  // namespace msrd
