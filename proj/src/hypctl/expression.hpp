#pragma once

#include <memory>
#include <stdexcept>
#include <string>

namespace hypctl::expr {

// Thrown on malformed input; `position` is a 0-based offset into the source.
struct ParseError : std::runtime_error {
    size_t position;
    ParseError(const std::string& msg, size_t pos)
        : std::runtime_error(msg + " (at position " + std::to_string(pos) + ")"), position(pos) {}
};

struct Node;
using NodePtr = std::shared_ptr<const Node>;

enum class Op { Constant, Variable, Add, Sub, Mul, Div, Pow, Neg, Exp, Sin, Cos };

struct Node {
    Op op;
    double value = 0.0; // Constant only
    NodePtr lhs, rhs;   // rhs empty for unary ops
};

// Parses an arithmetic expression in the single variable `z`.
// Supported: + - * / ^ (right associative), unary +/-, exp, sin, cos,
// numeric literals, parentheses.
NodePtr parse(const std::string& src);

double evaluate(const Node& node, double z);

// Symbolic derivative d/dz; the result is lightly simplified.
NodePtr differentiate(const NodePtr& node);

// Canonical textual form (fully parenthesized where needed); reparsing it
// yields an expression that evaluates identically.
std::string to_string(const Node& node);

NodePtr make_constant(double value);

// Substitutes z -> 1 - z throughout.
NodePtr reflect_argument(const NodePtr& node);

} // namespace hypctl::expr
