#include "hypctl/volterra.hpp"

#include <Eigen/LU>
#include <cmath>
#include <stdexcept>
#include <string>

namespace hypctl {

std::vector<double> solve_volterra2(const VolterraProblem& prob) {
    const int N = prob.grid.N;
    const double h = prob.grid.h();
    std::vector<double> f(N + 1);
    f[0] = prob.rhs(0.0);
    for (int j = 1; j <= N; ++j) {
        const double zj = prob.grid.z(j);
        double acc = prob.rhs(zj);
        acc -= 0.5 * h * prob.kernel(zj, 0.0) * f[0];
        for (int l = 1; l < j; ++l)
            acc -= h * prob.kernel(zj, prob.grid.z(l)) * f[l];
        double pivot = 1.0 + 0.5 * h * prob.kernel(zj, zj);
        if (std::abs(pivot) < 1e-10)
            throw std::runtime_error("solve_volterra2: singular discretization at node " +
                                     std::to_string(j));
        f[j] = acc / pivot;
    }
    return f;
}

std::vector<double> picard_iterate(const VolterraProblem& prob, int max_iters, double tol) {
    const int N = prob.grid.N;
    const double h = prob.grid.h();

    std::vector<double> g(N + 1);
    for (int j = 0; j <= N; ++j)
        g[j] = prob.rhs(prob.grid.z(j));

    std::vector<double> f = g, next(N + 1);
    for (int it = 0; it < max_iters; ++it) {
        double delta = 0.0;
        next[0] = g[0];
        for (int j = 1; j <= N; ++j) {
            const double zj = prob.grid.z(j);
            double integral = 0.0;
            for (int l = 0; l <= j; ++l)
                integral += h * trapezoid_weight(l, j) * prob.kernel(zj, prob.grid.z(l)) * f[l];
            next[j] = g[j] - integral;
        }
        for (int j = 0; j <= N; ++j)
            delta = std::max(delta, std::abs(next[j] - f[j]));
        f.swap(next);
        if (delta < tol)
            return f;
    }
    throw std::runtime_error("picard_iterate: no convergence after " +
                             std::to_string(max_iters) + " iterations");
}

namespace {

Matrix solve_node(const Matrix& lhs_kernel, const Matrix& rhs, double h, KernelSide side,
                  int node) {
    const auto dim = lhs_kernel.rows();
    Matrix M = Matrix::Identity(dim, dim) + 0.5 * h * lhs_kernel;
    Eigen::PartialPivLU<Matrix> lu(side == KernelSide::Left ? M : Matrix(M.transpose()));
    double pivot_min = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
    if (pivot_min < 1e-10)
        throw std::runtime_error("solve_volterra2_matrix: singular discretization at node " +
                                 std::to_string(node));
    if (side == KernelSide::Left)
        return lu.solve(rhs);
    return lu.solve(rhs.transpose()).transpose();
}

} // namespace

std::vector<Matrix> solve_volterra2_matrix(const std::function<Matrix(int, int)>& kernel_at,
                                           const std::function<Matrix(int)>& rhs_at, int m,
                                           double h, KernelSide side) {
    std::vector<Matrix> f(m + 1);
    f[0] = rhs_at(0);
    for (int j = 1; j <= m; ++j) {
        Matrix acc = rhs_at(j);
        for (int l = 0; l < j; ++l) {
            const double w = h * trapezoid_weight(l, j);
            if (side == KernelSide::Left)
                acc -= w * (kernel_at(j, l) * f[l]);
            else
                acc -= w * (f[l] * kernel_at(j, l));
        }
        f[j] = solve_node(kernel_at(j, j), acc, h, side, j);
    }
    return f;
}

std::vector<Matrix> picard_iterate_matrix(const std::function<Matrix(int, int)>& kernel_at,
                                          const std::function<Matrix(int)>& rhs_at, int m,
                                          double h, KernelSide side, int max_iters, double tol) {
    std::vector<Matrix> g(m + 1);
    for (int j = 0; j <= m; ++j)
        g[j] = rhs_at(j);

    std::vector<Matrix> f = g, next = g;
    for (int it = 0; it < max_iters; ++it) {
        double delta = 0.0;
        for (int j = 0; j <= m; ++j) {
            Matrix acc = g[j];
            for (int l = 0; l <= j; ++l) {
                const double w = h * trapezoid_weight(l, j) * (j == 0 ? 0.0 : 1.0);
                if (w == 0.0)
                    continue;
                if (side == KernelSide::Left)
                    acc -= w * (kernel_at(j, l) * f[l]);
                else
                    acc -= w * (f[l] * kernel_at(j, l));
            }
            next[j] = acc;
        }
        for (int j = 0; j <= m; ++j)
            delta = std::max(delta, (next[j] - f[j]).cwiseAbs().maxCoeff());
        f.swap(next);
        if (delta < tol)
            return f;
    }
    throw std::runtime_error("picard_iterate_matrix: no convergence after " +
                             std::to_string(max_iters) + " iterations");
}

} // namespace hypctl
