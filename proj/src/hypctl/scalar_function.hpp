#pragma once

#include "hypctl/expression.hpp"
#include "hypctl/types.hpp"

#include <string>
#include <vector>

namespace hypctl {

// A scalar coefficient function of z in [0,1], backed either by an
// expression AST or by samples on a uniform grid (linear interpolation).
// Evaluation outside [0,1] is a domain error; a tolerance of 1e-9 absorbs
// floating-point endpoint noise.
class ScalarFunction {
public:
    ScalarFunction() : node_(expr::make_constant(0.0)) {}

    static ScalarFunction constant(double value);
    static ScalarFunction from_expression(const std::string& src);
    static ScalarFunction from_node(expr::NodePtr node);
    // Samples on the uniform grid with values.size()-1 cells.
    static ScalarFunction from_samples(std::vector<double> values);

    double operator()(double z) const;

    // d/dz. Exact (symbolic) for expression-backed functions, piecewise
    // slope for table-backed ones.
    ScalarFunction derivative() const;

    // f(1 - z); exact for both backings.
    ScalarFunction reflected() const;

    bool is_expression() const { return node_ != nullptr; }
    // Textual form; for table-backed functions this throws.
    std::string expression_text() const;
    const std::vector<double>& samples() const;

    std::vector<double> sample(const Grid& grid) const;

private:
    expr::NodePtr node_;          // set when expression-backed
    std::vector<double> values_;  // set when table-backed
};

// Flat sampled view used by the numerical kernels: one allocation, branch-free
// linear interpolation. Built once per solve from a ScalarFunction.
class SampledFunction {
public:
    SampledFunction() = default;
    SampledFunction(const ScalarFunction& f, int cells);
    explicit SampledFunction(std::vector<double> values);

    double operator()(double z) const {
        double s = z * cells_;
        if (s <= 0.0)
            return values_.front();
        if (s >= cells_)
            return values_.back();
        int k = static_cast<int>(s);
        double t = s - k;
        return values_[k] + t * (values_[k + 1] - values_[k]);
    }

    double at_node(int k) const { return values_[k]; }
    int cells() const { return cells_; }

private:
    int cells_ = 0;
    std::vector<double> values_{0.0};
};

} // namespace hypctl
