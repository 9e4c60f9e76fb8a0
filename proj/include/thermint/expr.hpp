#pragma once

#include <cctype>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>

namespace thermint::expr {

// Small arithmetic grammar for piecewise map definitions:
//   expr   := term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := unary ('^' factor)?
//   unary  := '-' unary | primary
//   primary:= NUMBER | 'x' | IDENT '(' expr ')' | '(' expr ')'
// with IDENT in {sin, cos, exp, log, sqrt, abs}.

enum class Op {
    constant,
    var,
    add,
    sub,
    mul,
    div,
    pow,
    neg,
    sin,
    cos,
    exp,
    log,
    sqrt,
    abs,
};

struct Node;
using Expr = std::shared_ptr<const Node>;

struct Node {
    Op op;
    double value = 0.0;
    Expr a;
    Expr b;
};

inline Expr make(Op op, Expr a = nullptr, Expr b = nullptr) {
    auto n = std::make_shared<Node>();
    n->op = op;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
}

inline Expr constant(double v) {
    auto n = std::make_shared<Node>();
    n->op = Op::constant;
    n->value = v;
    return n;
}

inline Expr variable() { return make(Op::var); }

inline bool is_const(const Expr& e, double v) {
    return e->op == Op::constant && e->value == v;
}

namespace detail {

class Parser {
public:
    explicit Parser(std::string_view s) : src_(s) {}

    Expr run() {
        Expr e = expression();
        skip_ws();
        if (pos_ != src_.size()) fail("trailing input");
        return e;
    }

private:
    std::string_view src_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& what) const {
        throw std::invalid_argument("expression parse error at position " +
                                    std::to_string(pos_) + ": " + what);
    }
    void skip_ws() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }
    bool eat(char c) {
        skip_ws();
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }
    char peek() {
        skip_ws();
        return pos_ < src_.size() ? src_[pos_] : '\0';
    }

    Expr expression() {
        Expr e = term();
        for (;;) {
            if (eat('+'))
                e = make(Op::add, e, term());
            else if (eat('-'))
                e = make(Op::sub, e, term());
            else
                return e;
        }
    }
    Expr term() {
        Expr e = factor();
        for (;;) {
            if (eat('*'))
                e = make(Op::mul, e, factor());
            else if (eat('/'))
                e = make(Op::div, e, factor());
            else
                return e;
        }
    }
    Expr factor() {
        Expr base = unary();
        if (eat('^')) return make(Op::pow, base, factor());
        return base;
    }
    Expr unary() {
        if (eat('-')) return make(Op::neg, unary());
        return primary();
    }
    Expr primary() {
        skip_ws();
        if (pos_ >= src_.size()) fail("unexpected end of input");
        char c = src_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c))) return ident();
        if (eat('(')) {
            Expr e = expression();
            if (!eat(')')) fail("expected ')'");
            return e;
        }
        fail(std::string("unexpected character '") + c + "'");
    }
    Expr number() {
        std::size_t start = pos_;
        while (pos_ < src_.size() &&
               (std::isdigit(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '.' ||
                src_[pos_] == 'e' || src_[pos_] == 'E' ||
                ((src_[pos_] == '+' || src_[pos_] == '-') && pos_ > start &&
                 (src_[pos_ - 1] == 'e' || src_[pos_ - 1] == 'E'))))
            ++pos_;
        try {
            return constant(std::stod(std::string(src_.substr(start, pos_ - start))));
        } catch (const std::exception&) {
            fail("bad number literal");
        }
    }
    Expr ident() {
        std::size_t start = pos_;
        while (pos_ < src_.size() && std::isalpha(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        std::string name(src_.substr(start, pos_ - start));
        if (name == "x") return variable();
        Op op;
        if (name == "sin")
            op = Op::sin;
        else if (name == "cos")
            op = Op::cos;
        else if (name == "exp")
            op = Op::exp;
        else if (name == "log")
            op = Op::log;
        else if (name == "sqrt")
            op = Op::sqrt;
        else if (name == "abs")
            op = Op::abs;
        else
            fail("unknown identifier '" + name + "'");
        if (!eat('(')) fail("expected '(' after function name");
        Expr arg = expression();
        if (!eat(')')) fail("expected ')'");
        return make(op, arg);
    }
};

}  // namespace detail

inline Expr parse(std::string_view s) { return detail::Parser(s).run(); }

inline double eval(const Expr& e, double x) {
    switch (e->op) {
        case Op::constant: return e->value;
        case Op::var: return x;
        case Op::add: return eval(e->a, x) + eval(e->b, x);
        case Op::sub: return eval(e->a, x) - eval(e->b, x);
        case Op::mul: return eval(e->a, x) * eval(e->b, x);
        case Op::div: return eval(e->a, x) / eval(e->b, x);
        case Op::pow: return std::pow(eval(e->a, x), eval(e->b, x));
        case Op::neg: return -eval(e->a, x);
        case Op::sin: return std::sin(eval(e->a, x));
        case Op::cos: return std::cos(eval(e->a, x));
        case Op::exp: return std::exp(eval(e->a, x));
        case Op::log: return std::log(eval(e->a, x));
        case Op::sqrt: return std::sqrt(eval(e->a, x));
        case Op::abs: return std::abs(eval(e->a, x));
    }
    return 0.0;
}

namespace detail {

inline Expr simplify2(Op op, Expr a, Expr b) {
    if (a->op == Op::constant && b && b->op == Op::constant) {
        Expr tmp = make(op, a, b);
        return constant(eval(tmp, 0.0));
    }
    switch (op) {
        case Op::add:
            if (is_const(a, 0)) return b;
            if (is_const(b, 0)) return a;
            break;
        case Op::sub:
            if (is_const(b, 0)) return a;
            break;
        case Op::mul:
            if (is_const(a, 0) || is_const(b, 0)) return constant(0);
            if (is_const(a, 1)) return b;
            if (is_const(b, 1)) return a;
            break;
        case Op::div:
            if (is_const(a, 0)) return constant(0);
            if (is_const(b, 1)) return a;
            break;
        case Op::pow:
            if (is_const(b, 1)) return a;
            if (is_const(b, 0)) return constant(1);
            break;
        default: break;
    }
    return make(op, std::move(a), std::move(b));
}

inline Expr simplify1(Op op, Expr a) {
    if (a->op == Op::constant) return constant(eval(make(op, a), 0.0));
    return make(op, std::move(a));
}

}  // namespace detail

/// Symbolic derivative within the grammar.  pow with a non-constant exponent
/// uses the a^b (b' log a + b a'/a) form.
inline Expr derivative(const Expr& e) {
    using detail::simplify1;
    using detail::simplify2;
    switch (e->op) {
        case Op::constant: return constant(0);
        case Op::var: return constant(1);
        case Op::add: return simplify2(Op::add, derivative(e->a), derivative(e->b));
        case Op::sub: return simplify2(Op::sub, derivative(e->a), derivative(e->b));
        case Op::mul:
            return simplify2(Op::add, simplify2(Op::mul, derivative(e->a), e->b),
                             simplify2(Op::mul, e->a, derivative(e->b)));
        case Op::div:
            return simplify2(
                Op::div,
                simplify2(Op::sub, simplify2(Op::mul, derivative(e->a), e->b),
                          simplify2(Op::mul, e->a, derivative(e->b))),
                simplify2(Op::mul, e->b, e->b));
        case Op::pow: {
            if (e->b->op == Op::constant) {
                double k = e->b->value;
                return simplify2(
                    Op::mul, constant(k),
                    simplify2(Op::mul, simplify2(Op::pow, e->a, constant(k - 1)),
                              derivative(e->a)));
            }
            Expr da = derivative(e->a), db = derivative(e->b);
            Expr lg = simplify1(Op::log, e->a);
            Expr inner = simplify2(Op::add, simplify2(Op::mul, db, lg),
                                   simplify2(Op::div, simplify2(Op::mul, e->b, da), e->a));
            return simplify2(Op::mul, make(Op::pow, e->a, e->b), inner);
        }
        case Op::neg: return simplify1(Op::neg, derivative(e->a));
        case Op::sin: return simplify2(Op::mul, simplify1(Op::cos, e->a), derivative(e->a));
        case Op::cos:
            return simplify1(Op::neg,
                             simplify2(Op::mul, simplify1(Op::sin, e->a), derivative(e->a)));
        case Op::exp: return simplify2(Op::mul, simplify1(Op::exp, e->a), derivative(e->a));
        case Op::log: return simplify2(Op::div, derivative(e->a), e->a);
        case Op::sqrt:
            return simplify2(Op::div, derivative(e->a),
                             simplify2(Op::mul, constant(2), simplify1(Op::sqrt, e->a)));
        case Op::abs:
            // d|u| = u/|u| * u', valid away from zeros of u.
            return simplify2(Op::mul,
                             simplify2(Op::div, e->a, simplify1(Op::abs, e->a)),
                             derivative(e->a));
    }
    return constant(0);
}

}  // namespace thermint::expr
