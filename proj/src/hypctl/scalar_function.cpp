#include "hypctl/scalar_function.hpp"

#include <cmath>
#include <stdexcept>

namespace hypctl {

namespace {
constexpr double kDomainSlack = 1e-9;
}

ScalarFunction ScalarFunction::constant(double value) {
    return from_node(expr::make_constant(value));
}

ScalarFunction ScalarFunction::from_expression(const std::string& src) {
    return from_node(expr::parse(src));
}

ScalarFunction ScalarFunction::from_node(expr::NodePtr node) {
    ScalarFunction f;
    f.node_ = std::move(node);
    f.values_.clear();
    return f;
}

ScalarFunction ScalarFunction::from_samples(std::vector<double> values) {
    if (values.size() < 2)
        throw std::invalid_argument("ScalarFunction: need at least two samples");
    ScalarFunction f;
    f.node_ = nullptr;
    f.values_ = std::move(values);
    return f;
}

double ScalarFunction::operator()(double z) const {
    if (z < -kDomainSlack || z > 1.0 + kDomainSlack)
        throw std::domain_error("ScalarFunction: argument " + std::to_string(z) +
                                " outside [0,1]");
    z = std::min(1.0, std::max(0.0, z));
    if (node_)
        return expr::evaluate(*node_, z);
    double s = z * (values_.size() - 1);
    size_t k = std::min(values_.size() - 2, static_cast<size_t>(s));
    double t = s - k;
    return values_[k] + t * (values_[k + 1] - values_[k]);
}

ScalarFunction ScalarFunction::derivative() const {
    if (node_)
        return from_node(expr::differentiate(node_));
    // Piecewise slope sampled at nodes (one-sided at the ends, averaged inside).
    size_t m = values_.size() - 1;
    double h = 1.0 / m;
    std::vector<double> d(m + 1);
    d[0] = (values_[1] - values_[0]) / h;
    d[m] = (values_[m] - values_[m - 1]) / h;
    for (size_t k = 1; k < m; ++k)
        d[k] = (values_[k + 1] - values_[k - 1]) / (2 * h);
    return from_samples(std::move(d));
}

ScalarFunction ScalarFunction::reflected() const {
    if (node_)
        return from_node(expr::reflect_argument(node_));
    std::vector<double> rev(values_.rbegin(), values_.rend());
    return from_samples(std::move(rev));
}

std::string ScalarFunction::expression_text() const {
    if (!node_)
        throw std::logic_error("ScalarFunction: table-backed, no expression text");
    return expr::to_string(*node_);
}

const std::vector<double>& ScalarFunction::samples() const {
    if (node_)
        throw std::logic_error("ScalarFunction: expression-backed, no sample table");
    return values_;
}

std::vector<double> ScalarFunction::sample(const Grid& grid) const {
    std::vector<double> out(grid.nodes());
    for (int k = 0; k <= grid.N; ++k)
        out[k] = (*this)(grid.z(k));
    return out;
}

SampledFunction::SampledFunction(const ScalarFunction& f, int cells) : cells_(cells) {
    values_.resize(cells + 1);
    for (int k = 0; k <= cells; ++k)
        values_[k] = f(static_cast<double>(k) / cells);
}

SampledFunction::SampledFunction(std::vector<double> values)
    : cells_(static_cast<int>(values.size()) - 1), values_(std::move(values)) {
    if (cells_ < 1)
        throw std::invalid_argument("SampledFunction: need at least two samples");
}

} // namespace hypctl
