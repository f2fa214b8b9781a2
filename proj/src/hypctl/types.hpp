#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <vector>

namespace hypctl {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;
using ComplexVector = Eigen::VectorXcd;
using Complex = std::complex<double>;

// Uniform grid on [0,1] with N cells and nodes z_k = k/N.
struct Grid {
    int N = 200;

    explicit Grid(int cells = 200) : N(cells) {
        if (N < 1)
            throw std::invalid_argument("Grid: cell count must be positive");
    }

    double h() const { return 1.0 / N; }
    int nodes() const { return N + 1; }
    double z(int k) const { return static_cast<double>(k) / N; }

    std::vector<double> node_values() const {
        std::vector<double> zs(N + 1);
        for (int k = 0; k <= N; ++k)
            zs[k] = z(k);
        return zs;
    }
};

// Trapezoid weight for node k of a rule over nodes [0, m] (m >= 1).
inline double trapezoid_weight(int k, int m) {
    return (k == 0 || k == m) ? 0.5 : 1.0;
}

} // namespace hypctl
