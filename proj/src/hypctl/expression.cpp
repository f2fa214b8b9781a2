#include "hypctl/expression.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace hypctl::expr {

namespace {

NodePtr node(Op op, NodePtr lhs = nullptr, NodePtr rhs = nullptr) {
    auto n = std::make_shared<Node>();
    n->op = op;
    n->lhs = std::move(lhs);
    n->rhs = std::move(rhs);
    return n;
}

NodePtr constant(double v) {
    auto n = std::make_shared<Node>();
    n->op = Op::Constant;
    n->value = v;
    return n;
}

bool is_const(const NodePtr& n, double v) {
    return n->op == Op::Constant && n->value == v;
}

class Parser {
public:
    explicit Parser(const std::string& src) : src_(src) {}

    NodePtr run() {
        NodePtr e = expression();
        skip_ws();
        if (pos_ != src_.size())
            throw ParseError("unexpected trailing input", pos_);
        return e;
    }

private:
    const std::string& src_;
    size_t pos_ = 0;

    void skip_ws() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_])))
            ++pos_;
    }

    bool consume(char c) {
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

    NodePtr expression() {
        NodePtr lhs = term();
        for (;;) {
            if (consume('+'))
                lhs = node(Op::Add, lhs, term());
            else if (consume('-'))
                lhs = node(Op::Sub, lhs, term());
            else
                return lhs;
        }
    }

    NodePtr term() {
        NodePtr lhs = unary();
        for (;;) {
            if (consume('*'))
                lhs = node(Op::Mul, lhs, unary());
            else if (consume('/'))
                lhs = node(Op::Div, lhs, unary());
            else
                return lhs;
        }
    }

    NodePtr unary() {
        if (consume('-')) {
            NodePtr inner = unary();
            if (inner->op == Op::Constant)
                return constant(-inner->value);
            return node(Op::Neg, inner);
        }
        if (consume('+'))
            return unary();
        return power();
    }

    NodePtr power() {
        NodePtr base = atom();
        if (consume('^'))
            return node(Op::Pow, base, unary()); // right associative, binds unary minus in exponent
        return base;
    }

    NodePtr atom() {
        skip_ws();
        if (pos_ >= src_.size())
            throw ParseError("unexpected end of expression", pos_);
        char c = src_[pos_];
        if (c == '(') {
            ++pos_;
            NodePtr e = expression();
            if (!consume(')'))
                throw ParseError("expected ')'", pos_);
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.')
            return number();
        if (std::isalpha(static_cast<unsigned char>(c)))
            return identifier();
        throw ParseError(std::string("unexpected character '") + c + "'", pos_);
    }

    NodePtr number() {
        const char* begin = src_.c_str() + pos_;
        char* end = nullptr;
        double v = std::strtod(begin, &end);
        if (end == begin)
            throw ParseError("malformed number", pos_);
        pos_ += static_cast<size_t>(end - begin);
        return constant(v);
    }

    NodePtr identifier() {
        size_t start = pos_;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
            ++pos_;
        std::string name = src_.substr(start, pos_ - start);
        if (name == "z")
            return node(Op::Variable);
        if (name == "pi")
            return constant(M_PI);
        if (name == "e")
            return constant(M_E);
        if (name == "exp" || name == "sin" || name == "cos") {
            if (!consume('('))
                throw ParseError("expected '(' after function name '" + name + "'", pos_);
            NodePtr arg = expression();
            if (!consume(')'))
                throw ParseError("expected ')'", pos_);
            Op op = name == "exp" ? Op::Exp : (name == "sin" ? Op::Sin : Op::Cos);
            return node(op, arg);
        }
        throw ParseError("unknown identifier '" + name + "'", start);
    }
};

} // namespace

NodePtr parse(const std::string& src) {
    return Parser(src).run();
}

double evaluate(const Node& n, double z) {
    switch (n.op) {
    case Op::Constant: return n.value;
    case Op::Variable: return z;
    case Op::Add: return evaluate(*n.lhs, z) + evaluate(*n.rhs, z);
    case Op::Sub: return evaluate(*n.lhs, z) - evaluate(*n.rhs, z);
    case Op::Mul: return evaluate(*n.lhs, z) * evaluate(*n.rhs, z);
    case Op::Div: return evaluate(*n.lhs, z) / evaluate(*n.rhs, z);
    case Op::Pow: return std::pow(evaluate(*n.lhs, z), evaluate(*n.rhs, z));
    case Op::Neg: return -evaluate(*n.lhs, z);
    case Op::Exp: return std::exp(evaluate(*n.lhs, z));
    case Op::Sin: return std::sin(evaluate(*n.lhs, z));
    case Op::Cos: return std::cos(evaluate(*n.lhs, z));
    }
    return 0.0;
}

namespace {

NodePtr add(NodePtr a, NodePtr b) {
    if (is_const(a, 0.0)) return b;
    if (is_const(b, 0.0)) return a;
    return node(Op::Add, a, b);
}

NodePtr sub(NodePtr a, NodePtr b) {
    if (is_const(b, 0.0)) return a;
    if (is_const(a, 0.0)) return node(Op::Neg, b);
    return node(Op::Sub, a, b);
}

NodePtr mul(NodePtr a, NodePtr b) {
    if (is_const(a, 0.0) || is_const(b, 0.0)) return constant(0.0);
    if (is_const(a, 1.0)) return b;
    if (is_const(b, 1.0)) return a;
    return node(Op::Mul, a, b);
}

} // namespace

NodePtr differentiate(const NodePtr& n) {
    switch (n->op) {
    case Op::Constant: return constant(0.0);
    case Op::Variable: return constant(1.0);
    case Op::Add: return add(differentiate(n->lhs), differentiate(n->rhs));
    case Op::Sub: return sub(differentiate(n->lhs), differentiate(n->rhs));
    case Op::Mul:
        return add(mul(differentiate(n->lhs), n->rhs), mul(n->lhs, differentiate(n->rhs)));
    case Op::Div:
        // (u/v)' = u'/v - u v'/v^2
        return sub(node(Op::Div, differentiate(n->lhs), n->rhs),
                   node(Op::Div, mul(n->lhs, differentiate(n->rhs)),
                        node(Op::Mul, n->rhs, n->rhs)));
    case Op::Pow: {
        // General case via u^v = exp(v log u) is not needed: only constant
        // exponents appear in coefficient expressions. For a variable
        // exponent fall back to exp-form differentiation would require log,
        // which is outside the grammar, so reject it.
        if (n->rhs->op == Op::Constant) {
            double c = n->rhs->value;
            if (c == 0.0) return constant(0.0);
            return mul(mul(constant(c), node(Op::Pow, n->lhs, constant(c - 1.0))),
                       differentiate(n->lhs));
        }
        throw std::runtime_error("differentiate: non-constant exponent in '^'");
    }
    case Op::Neg: return node(Op::Neg, differentiate(n->lhs));
    case Op::Exp: return mul(node(Op::Exp, n->lhs), differentiate(n->lhs));
    case Op::Sin: return mul(node(Op::Cos, n->lhs), differentiate(n->lhs));
    case Op::Cos: return node(Op::Neg, mul(node(Op::Sin, n->lhs), differentiate(n->lhs)));
    }
    return constant(0.0);
}

namespace {

void print(const Node& n, std::string& out) {
    auto paren = [&](const Node& inner) {
        out += '(';
        print(inner, out);
        out += ')';
    };
    switch (n.op) {
    case Op::Constant: {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.17g", n.value);
        out += buf;
        break;
    }
    case Op::Variable: out += 'z'; break;
    case Op::Add: paren(*n.lhs); out += '+'; paren(*n.rhs); break;
    case Op::Sub: paren(*n.lhs); out += '-'; paren(*n.rhs); break;
    case Op::Mul: paren(*n.lhs); out += '*'; paren(*n.rhs); break;
    case Op::Div: paren(*n.lhs); out += '/'; paren(*n.rhs); break;
    case Op::Pow: paren(*n.lhs); out += '^'; paren(*n.rhs); break;
    case Op::Neg: out += '-'; paren(*n.lhs); break;
    case Op::Exp: out += "exp"; paren(*n.lhs); break;
    case Op::Sin: out += "sin"; paren(*n.lhs); break;
    case Op::Cos: out += "cos"; paren(*n.lhs); break;
    }
}

} // namespace

std::string to_string(const Node& n) {
    std::string out;
    print(n, out);
    return out;
}

NodePtr make_constant(double value) {
    return constant(value);
}

NodePtr reflect_argument(const NodePtr& n) {
    if (n->op == Op::Variable)
        return node(Op::Sub, constant(1.0), node(Op::Variable));
    if (n->op == Op::Constant)
        return n;
    if (!n->rhs)
        return node(n->op, reflect_argument(n->lhs));
    return node(n->op, reflect_argument(n->lhs), reflect_argument(n->rhs));
}

} // namespace hypctl::expr
