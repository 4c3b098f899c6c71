#pragma once

// Arithmetic expressions over (x, y, z) and named real parameters.
//
//   expr   := term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := '-' factor | power
//   power  := atom ('^' factor)?
//   atom   := number | ident | func '(' expr ')' | '(' expr ')'
//   func   := sin | cos | exp | log | sqrt | tanh
//
// '^' is right associative and binds tighter than unary minus, so -x^2 is
// -(x^2). Parameters are resolved when parsing; their values are baked into
// the compiled program.

#include <array>
#include <cmath>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ssc/errors.hpp"

namespace ssc {

using ParamMap = std::map<std::string, double, std::less<>>;

/// Forward-mode dual number: value plus one directional derivative.
struct Dual {
    double v = 0.0;
    double d = 0.0;
};

inline Dual operator+(Dual a, Dual b) { return {a.v + b.v, a.d + b.d}; }
inline Dual operator-(Dual a, Dual b) { return {a.v - b.v, a.d - b.d}; }
inline Dual operator-(Dual a) { return {-a.v, -a.d}; }
inline Dual operator*(Dual a, Dual b) { return {a.v * b.v, a.d * b.v + a.v * b.d}; }
inline Dual operator/(Dual a, Dual b) { return {a.v / b.v, (a.d * b.v - a.v * b.d) / (b.v * b.v)}; }

inline Dual sin(Dual a) { return {std::sin(a.v), std::cos(a.v) * a.d}; }
inline Dual cos(Dual a) { return {std::cos(a.v), -std::sin(a.v) * a.d}; }
inline Dual exp(Dual a) {
    const double e = std::exp(a.v);
    return {e, e * a.d};
}
inline Dual log(Dual a) { return {std::log(a.v), a.d / a.v}; }
inline Dual sqrt(Dual a) {
    const double s = std::sqrt(a.v);
    return {s, a.d / (2.0 * s)};
}
inline Dual tanh(Dual a) {
    const double t = std::tanh(a.v);
    return {t, (1.0 - t * t) * a.d};
}
inline Dual pow(Dual a, Dual b) {
    const double p = std::pow(a.v, b.v);
    double d = 0.0;
    if (a.d != 0.0) d += b.v * std::pow(a.v, b.v - 1.0) * a.d;
    if (b.d != 0.0) d += p * std::log(a.v) * b.d;
    return {p, d};
}

enum class Func { Sin, Cos, Exp, Log, Sqrt, Tanh };

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node {
    enum class Kind { Number, Var, Neg, Add, Sub, Mul, Div, Pow, Call };

    Kind kind = Kind::Number;
    double value = 0.0;  // Number; also the resolved value of a parameter
    int var = 0;         // Var: 0,1,2 for x,y,z
    Func func = Func::Sin;
    std::string name;    // parameter name when a Number came from an identifier
    NodePtr lhs;
    NodePtr rhs;
};

/// Compiled scalar expression. Cheap to copy (shared immutable tree).
class Expr {
public:
    Expr();  // the constant 0
    explicit Expr(NodePtr root);

    static Expr constant(double c);
    static Expr variable(int index);

    template <class T>
    [[nodiscard]] T eval(std::span<const T, 3> u) const;

    [[nodiscard]] double operator()(const std::array<double, 3>& u) const {
        return eval<double>(std::span<const double, 3>(u));
    }

    /// Value and directional derivative along `dir` at `u`.
    [[nodiscard]] Dual directional(const std::array<double, 3>& u, const std::array<double, 3>& dir) const;

    /// Gradient by three dual passes.
    [[nodiscard]] std::array<double, 3> gradient(const std::array<double, 3>& u) const;

    /// Symbolic partial derivative with respect to x (0), y (1) or z (2).
    [[nodiscard]] Expr derivative(int index) const;

    [[nodiscard]] const NodePtr& root() const { return root_; }
    [[nodiscard]] std::string to_string() const;

    friend Expr operator+(const Expr& a, const Expr& b);
    friend Expr operator-(const Expr& a, const Expr& b);
    friend Expr operator*(const Expr& a, const Expr& b);
    friend Expr operator/(const Expr& a, const Expr& b);

private:
    enum class Op : unsigned char { Const, Var, Neg, Add, Sub, Mul, Div, Pow, Sin, Cos, Exp, Log, Sqrt, Tanh };
    struct Instr {
        Op op;
        int var;
        double value;
    };

    void compile();
    void emit(const Node& n);

    NodePtr root_;
    std::vector<Instr> code_;
    std::size_t max_stack_ = 0;
};

/// Parse `text`; identifiers other than x, y, z and the keys of `params`
/// raise UnknownIdentifier.
[[nodiscard]] Expr parse_expr(std::string_view text, const ParamMap& params = {});

}  // namespace ssc
