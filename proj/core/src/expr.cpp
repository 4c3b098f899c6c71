#include "ssc/expr.hpp"

#include <cctype>
#include <charconv>
#include <cstdlib>
#include <sstream>

namespace ssc {

namespace {

NodePtr make_number(double v) {
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::Number;
    n->value = v;
    return n;
}

NodePtr make_var(int i) {
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::Var;
    n->var = i;
    return n;
}

NodePtr make_binary(Node::Kind k, NodePtr a, NodePtr b) {
    auto n = std::make_shared<Node>();
    n->kind = k;
    n->lhs = std::move(a);
    n->rhs = std::move(b);
    return n;
}

NodePtr make_neg(NodePtr a) {
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::Neg;
    n->lhs = std::move(a);
    return n;
}

NodePtr make_call(Func f, NodePtr a) {
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::Call;
    n->func = f;
    n->lhs = std::move(a);
    return n;
}

bool is_const(const NodePtr& n, double v) { return n->kind == Node::Kind::Number && n->value == v; }
bool is_number(const NodePtr& n) { return n->kind == Node::Kind::Number; }

// Zero/one folding keeps derivative trees from growing with dead terms.
NodePtr add(NodePtr a, NodePtr b) {
    if (is_const(a, 0.0)) return b;
    if (is_const(b, 0.0)) return a;
    if (is_number(a) && is_number(b)) return make_number(a->value + b->value);
    return make_binary(Node::Kind::Add, std::move(a), std::move(b));
}
NodePtr sub(NodePtr a, NodePtr b) {
    if (is_const(b, 0.0)) return a;
    if (is_const(a, 0.0)) return make_neg(std::move(b));
    if (is_number(a) && is_number(b)) return make_number(a->value - b->value);
    return make_binary(Node::Kind::Sub, std::move(a), std::move(b));
}
NodePtr mul(NodePtr a, NodePtr b) {
    if (is_const(a, 0.0) || is_const(b, 0.0)) return make_number(0.0);
    if (is_const(a, 1.0)) return b;
    if (is_const(b, 1.0)) return a;
    if (is_number(a) && is_number(b)) return make_number(a->value * b->value);
    return make_binary(Node::Kind::Mul, std::move(a), std::move(b));
}
NodePtr div(NodePtr a, NodePtr b) {
    if (is_const(a, 0.0)) return make_number(0.0);
    if (is_const(b, 1.0)) return a;
    return make_binary(Node::Kind::Div, std::move(a), std::move(b));
}
NodePtr neg(NodePtr a) {
    if (is_number(a)) return make_number(-a->value);
    return make_neg(std::move(a));
}

NodePtr diff(const NodePtr& n, int var) {
    using K = Node::Kind;
    switch (n->kind) {
        case K::Number: return make_number(0.0);
        case K::Var: return make_number(n->var == var ? 1.0 : 0.0);
        case K::Neg: return neg(diff(n->lhs, var));
        case K::Add: return add(diff(n->lhs, var), diff(n->rhs, var));
        case K::Sub: return sub(diff(n->lhs, var), diff(n->rhs, var));
        case K::Mul:
            return add(mul(diff(n->lhs, var), n->rhs), mul(n->lhs, diff(n->rhs, var)));
        case K::Div: {
            // (a'b - ab') / b^2
            auto num = sub(mul(diff(n->lhs, var), n->rhs), mul(n->lhs, diff(n->rhs, var)));
            return div(num, mul(n->rhs, n->rhs));
        }
        case K::Pow: {
            auto da = diff(n->lhs, var);
            if (is_number(n->rhs)) {
                const double b = n->rhs->value;
                auto p = make_binary(K::Pow, n->lhs, make_number(b - 1.0));
                return mul(mul(make_number(b), p), da);
            }
            auto db = diff(n->rhs, var);
            // a^b (b' log a + b a'/a)
            auto t1 = mul(db, make_call(Func::Log, n->lhs));
            auto t2 = div(mul(n->rhs, da), n->lhs);
            return mul(n, add(t1, t2));
        }
        case K::Call: {
            auto da = diff(n->lhs, var);
            if (is_const(da, 0.0)) return da;
            const auto& a = n->lhs;
            switch (n->func) {
                case Func::Sin: return mul(make_call(Func::Cos, a), da);
                case Func::Cos: return mul(neg(make_call(Func::Sin, a)), da);
                case Func::Exp: return mul(n, da);
                case Func::Log: return div(da, a);
                case Func::Sqrt: return div(da, mul(make_number(2.0), n));
                case Func::Tanh: return mul(sub(make_number(1.0), mul(n, n)), da);
            }
        }
    }
    return make_number(0.0);
}

const char* func_name(Func f) {
    switch (f) {
        case Func::Sin: return "sin";
        case Func::Cos: return "cos";
        case Func::Exp: return "exp";
        case Func::Log: return "log";
        case Func::Sqrt: return "sqrt";
        case Func::Tanh: return "tanh";
    }
    return "?";
}

void print(std::ostream& os, const Node& n) {
    using K = Node::Kind;
    switch (n.kind) {
        case K::Number:
            if (!n.name.empty()) {
                os << n.name;
            } else {
                os << n.value;
            }
            return;
        case K::Var: os << "xyz"[n.var]; return;
        case K::Neg: os << "(-"; print(os, *n.lhs); os << ')'; return;
        case K::Call: os << func_name(n.func) << '('; print(os, *n.lhs); os << ')'; return;
        default: break;
    }
    const char* op = n.kind == K::Add ? "+" : n.kind == K::Sub ? "-" : n.kind == K::Mul ? "*" : n.kind == K::Div ? "/" : "^";
    os << '(';
    print(os, *n.lhs);
    os << op;
    print(os, *n.rhs);
    os << ')';
}

class Parser {
public:
    Parser(std::string_view text, const ParamMap& params) : s_(text), params_(params) {}

    NodePtr parse() {
        auto e = expr();
        skip_ws();
        if (pos_ != s_.size()) throw SyntaxError(pos_, std::string("unexpected '") + s_[pos_] + "'");
        return e;
    }

private:
    void skip_ws() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip_ws();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    NodePtr expr() {
        auto lhs = term();
        for (;;) {
            if (accept('+')) {
                lhs = make_binary(Node::Kind::Add, lhs, term());
            } else if (accept('-')) {
                lhs = make_binary(Node::Kind::Sub, lhs, term());
            } else {
                return lhs;
            }
        }
    }

    NodePtr term() {
        auto lhs = factor();
        for (;;) {
            if (accept('*')) {
                lhs = make_binary(Node::Kind::Mul, lhs, factor());
            } else if (accept('/')) {
                lhs = make_binary(Node::Kind::Div, lhs, factor());
            } else {
                return lhs;
            }
        }
    }

    NodePtr factor() {
        if (accept('-')) return make_neg(factor());
        auto base = atom();
        if (accept('^')) return make_binary(Node::Kind::Pow, base, factor());
        return base;
    }

    NodePtr atom() {
        skip_ws();
        if (pos_ >= s_.size()) throw SyntaxError(pos_, "unexpected end of input");
        const char c = s_[pos_];
        if (c == '(') {
            ++pos_;
            auto e = expr();
            skip_ws();
            if (!accept(')')) throw SyntaxError(pos_, "expected ')'");
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
        throw SyntaxError(pos_, std::string("unexpected '") + c + "'");
    }

    NodePtr number() {
        const std::size_t start = pos_;
        while (pos_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.')) ++pos_;
        if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
            std::size_t p = pos_ + 1;
            if (p < s_.size() && (s_[p] == '+' || s_[p] == '-')) ++p;
            if (p < s_.size() && std::isdigit(static_cast<unsigned char>(s_[p]))) {
                pos_ = p;
                while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
            }
        }
        double v = 0.0;
        const auto res = std::from_chars(s_.data() + start, s_.data() + pos_, v);
        if (res.ec != std::errc() || res.ptr != s_.data() + pos_) throw SyntaxError(start, "malformed number");
        return make_number(v);
    }

    NodePtr identifier() {
        const std::size_t start = pos_;
        while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
        const std::string_view id = s_.substr(start, pos_ - start);
        if (id == "x") return make_var(0);
        if (id == "y") return make_var(1);
        if (id == "z") return make_var(2);

        static constexpr std::array<std::pair<std::string_view, Func>, 6> funcs{{
            {"sin", Func::Sin}, {"cos", Func::Cos}, {"exp", Func::Exp},
            {"log", Func::Log}, {"sqrt", Func::Sqrt}, {"tanh", Func::Tanh},
        }};
        for (const auto& [name, f] : funcs) {
            if (id == name) {
                if (!accept('(')) throw SyntaxError(pos_, "expected '(' after " + std::string(name));
                auto arg = expr();
                if (!accept(')')) throw SyntaxError(pos_, "expected ')'");
                return make_call(f, arg);
            }
        }
        if (auto it = params_.find(id); it != params_.end()) {
            auto n = std::make_shared<Node>();
            n->kind = Node::Kind::Number;
            n->value = it->second;
            n->name = std::string(id);
            return n;
        }
        throw Error(ErrorCode::UnknownIdentifier, "'" + std::string(id) + "' at offset " + std::to_string(start));
    }

    std::string_view s_;
    const ParamMap& params_;
    std::size_t pos_ = 0;
};

template <class T>
T apply_func(Func f, T a) {
    using std::cos, std::exp, std::log, std::sin, std::sqrt, std::tanh;
    switch (f) {
        case Func::Sin: return sin(a);
        case Func::Cos: return cos(a);
        case Func::Exp: return exp(a);
        case Func::Log: return log(a);
        case Func::Sqrt: return sqrt(a);
        case Func::Tanh: return tanh(a);
    }
    return a;
}

double powd(double a, double b) { return std::pow(a, b); }
long double powd(long double a, long double b) { return std::pow(a, b); }
Dual powd(Dual a, Dual b) { return pow(a, b); }

}  // namespace

Expr::Expr() : Expr(make_number(0.0)) {}

Expr::Expr(NodePtr root) : root_(std::move(root)) { compile(); }

Expr Expr::constant(double c) { return Expr(make_number(c)); }
Expr Expr::variable(int index) { return Expr(make_var(index)); }

void Expr::compile() {
    code_.clear();
    max_stack_ = 0;
    emit(*root_);
    // stack depth bound
    std::size_t depth = 0;
    for (const auto& ins : code_) {
        switch (ins.op) {
            case Op::Const:
            case Op::Var: ++depth; break;
            case Op::Add:
            case Op::Sub:
            case Op::Mul:
            case Op::Div:
            case Op::Pow: --depth; break;
            default: break;
        }
        max_stack_ = std::max(max_stack_, depth);
    }
}

void Expr::emit(const Node& n) {
    using K = Node::Kind;
    switch (n.kind) {
        case K::Number: code_.push_back({Op::Const, 0, n.value}); return;
        case K::Var: code_.push_back({Op::Var, n.var, 0.0}); return;
        case K::Neg: emit(*n.lhs); code_.push_back({Op::Neg, 0, 0.0}); return;
        case K::Call: {
            emit(*n.lhs);
            static constexpr Op ops[] = {Op::Sin, Op::Cos, Op::Exp, Op::Log, Op::Sqrt, Op::Tanh};
            code_.push_back({ops[static_cast<int>(n.func)], 0, 0.0});
            return;
        }
        default: break;
    }
    emit(*n.lhs);
    emit(*n.rhs);
    Op op = Op::Add;
    switch (n.kind) {
        case K::Sub: op = Op::Sub; break;
        case K::Mul: op = Op::Mul; break;
        case K::Div: op = Op::Div; break;
        case K::Pow: op = Op::Pow; break;
        default: break;
    }
    code_.push_back({op, 0, 0.0});
}

template <class T>
T Expr::eval(std::span<const T, 3> u) const {
    constexpr std::size_t kInline = 64;
    std::array<T, kInline> inline_stack;
    inline_stack[0] = T{};
    std::vector<T> heap_stack;
    T* st = inline_stack.data();
    if (max_stack_ > kInline) {
        heap_stack.resize(max_stack_);
        st = heap_stack.data();
    }
    std::size_t sp = 0;
    for (const auto& ins : code_) {
        switch (ins.op) {
            case Op::Const: st[sp++] = T(ins.value); break;
            case Op::Var: st[sp++] = u[ins.var]; break;
            case Op::Neg: st[sp - 1] = -st[sp - 1]; break;
            case Op::Add: --sp; st[sp - 1] = st[sp - 1] + st[sp]; break;
            case Op::Sub: --sp; st[sp - 1] = st[sp - 1] - st[sp]; break;
            case Op::Mul: --sp; st[sp - 1] = st[sp - 1] * st[sp]; break;
            case Op::Div: --sp; st[sp - 1] = st[sp - 1] / st[sp]; break;
            case Op::Pow: --sp; st[sp - 1] = powd(st[sp - 1], st[sp]); break;
            case Op::Sin: st[sp - 1] = apply_func(Func::Sin, st[sp - 1]); break;
            case Op::Cos: st[sp - 1] = apply_func(Func::Cos, st[sp - 1]); break;
            case Op::Exp: st[sp - 1] = apply_func(Func::Exp, st[sp - 1]); break;
            case Op::Log: st[sp - 1] = apply_func(Func::Log, st[sp - 1]); break;
            case Op::Sqrt: st[sp - 1] = apply_func(Func::Sqrt, st[sp - 1]); break;
            case Op::Tanh: st[sp - 1] = apply_func(Func::Tanh, st[sp - 1]); break;
        }
    }
    return st[0];
}

template double Expr::eval<double>(std::span<const double, 3>) const;
template long double Expr::eval<long double>(std::span<const long double, 3>) const;
template Dual Expr::eval<Dual>(std::span<const Dual, 3>) const;

Dual Expr::directional(const std::array<double, 3>& u, const std::array<double, 3>& dir) const {
    const std::array<Dual, 3> d{Dual{u[0], dir[0]}, Dual{u[1], dir[1]}, Dual{u[2], dir[2]}};
    return eval<Dual>(std::span<const Dual, 3>(d));
}

std::array<double, 3> Expr::gradient(const std::array<double, 3>& u) const {
    std::array<double, 3> g{};
    for (int i = 0; i < 3; ++i) {
        std::array<double, 3> e{0.0, 0.0, 0.0};
        e[i] = 1.0;
        g[i] = directional(u, e).d;
    }
    return g;
}

Expr Expr::derivative(int index) const { return Expr(diff(root_, index)); }

std::string Expr::to_string() const {
    std::ostringstream os;
    os.precision(17);
    print(os, *root_);
    return os.str();
}

Expr operator+(const Expr& a, const Expr& b) { return Expr(add(a.root_, b.root_)); }
Expr operator-(const Expr& a, const Expr& b) { return Expr(sub(a.root_, b.root_)); }
Expr operator*(const Expr& a, const Expr& b) { return Expr(mul(a.root_, b.root_)); }
Expr operator/(const Expr& a, const Expr& b) { return Expr(div(a.root_, b.root_)); }

Expr parse_expr(std::string_view text, const ParamMap& params) {
    Parser p(text, params);
    return Expr(p.parse());
}

}  // namespace ssc
