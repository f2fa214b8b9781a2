#include "hypctl/ctrl_kernel.hpp"

#include <algorithm>
#include <cmath>

namespace hypctl {

Matrix controller_bottom_matrix(const PlantSpec& spec) {
    Matrix D = Matrix::Zero(spec.n, spec.p);
    for (int k = 0; k < spec.n; ++k) {
        double lk = spec.lambda[k](0.0);
        if (k < spec.p)
            D(k, k) = lk;
        else
            for (int j = 0; j < spec.p; ++j)
                D(k, j) = lk * spec.Q0(k - spec.p, j);
    }
    return D;
}

KernelProblem controller_kernel_problem(const PlantSpec& spec, const ArtificialBC& bc) {
    KernelProblem prob;
    prob.n = spec.n;
    prob.p = spec.p;
    prob.speed = spec.lambda;
    prob.coupling.resize(spec.n * spec.n);
    for (int i = 0; i < spec.n; ++i)
        for (int j = 0; j < spec.n; ++j)
            prob.coupling[i * spec.n + j] = spec.A(i, j);
    prob.bottom_matrix = controller_bottom_matrix(spec);
    prob.zeroth_order_on_z = false;
    prob.art_l.resize(spec.p * spec.p);
    prob.art_m.resize(spec.m * spec.m);
    prob.art_n.resize(spec.m * spec.m);
    for (int i = 0; i < spec.p; ++i)
        for (int j = 0; j < spec.p; ++j)
            prob.art_l[i * spec.p + j] = bc.l(i, j);
    for (int i = 0; i < spec.m; ++i)
        for (int j = 0; j < spec.m; ++j) {
            prob.art_m[i * spec.m + j] = bc.m(i, j);
            prob.art_n[i * spec.m + j] = bc.n(i, j);
        }
    return prob;
}

ControllerKernel solve_controller_kernel(const PlantSpec& spec, const DesignParams& params,
                                         const Grid& grid) {
    KernelProblem prob = controller_kernel_problem(spec, params.controller_bc);
    KernelSolveOptions opts{grid.N, params.kernel_tol, params.kernel_max_iters};
    ControllerKernel out;
    out.K = solve_kernel_bvp(prob, opts, &out.stats);
    out.A0 = extract_A0(out.K, spec, grid);
    out.G = compute_G(out.K, spec, grid);
    return out;
}

SpatialMatrixFunction extract_A0(const KernelField& K, const PlantSpec& spec, const Grid& grid) {
    const Matrix D = controller_bottom_matrix(spec);
    SpatialMatrixFunction A0(grid, spec.n, spec.p);
    for (int a = 0; a <= grid.N; ++a) {
        Matrix& M = A0.at_node(a);
        for (int i = 0; i < spec.n; ++i)
            for (int j = 0; j < spec.p; ++j) {
                if (i < spec.p && i <= j)
                    continue; // strictly lower triangular block by construction
                double acc = 0.0;
                for (int k = 0; k < spec.n; ++k)
                    acc += K.at(i, k, a, 0) * D(k, j);
                M(i, j) = acc;
            }
    }
    return A0;
}

SpatialMatrixFunction compute_G(const KernelField& K, const PlantSpec& spec, const Grid& grid) {
    SpatialMatrixFunction G(grid, spec.n, spec.n_xi);
    const double h = grid.h();
    const Matrix Lam0E2C2 = spec.Lambda(0.0) * spec.E2() * spec.C2;

    std::vector<Matrix> C1_nodes(grid.nodes());
    for (int b = 0; b <= grid.N; ++b)
        C1_nodes[b] = spec.C1.eval(grid.z(b));

    for (int a = 0; a <= grid.N; ++a) {
        Matrix M = K.eval_matrix(grid.z(a), 0.0) * Lam0E2C2 + C1_nodes[a];
        if (a > 0) {
            Matrix integral = Matrix::Zero(spec.n, spec.n_xi);
            for (int b = 0; b <= a; ++b)
                integral +=
                    h * trapezoid_weight(b, a) * K.eval_matrix(grid.z(a), grid.z(b)) * C1_nodes[b];
            M -= integral;
        }
        G.at_node(a) = M;
    }
    return G;
}

double controller_bc_residual(const KernelField& K, const PlantSpec& spec, const Grid& grid) {
    const Matrix D = controller_bottom_matrix(spec);
    double worst = 0.0;
    for (int a = 1; a <= grid.N; ++a)
        for (int i = 0; i < spec.p; ++i)
            for (int j = i; j < spec.p; ++j) {
                double acc = 0.0;
                for (int k = 0; k < spec.n; ++k)
                    acc += K.at(i, k, a, 0) * D(k, j);
                worst = std::max(worst, std::abs(acc));
            }
    return worst;
}

double artificial_bc_residual(const KernelField& K, const PlantSpec& spec,
                              const ArtificialBC& bc, const Grid& grid) {
    double worst = 0.0;
    const int N = grid.N;
    for (int i = 0; i < spec.p; ++i)
        for (int j = 0; j < i; ++j)
            for (int b = 0; b < N; ++b)
                worst = std::max(worst,
                                 std::abs(K.at(i, j, N, b) - bc.l(i, j)(grid.z(b))));
    for (int i = 0; i < spec.m; ++i)
        for (int j = 0; j < spec.m; ++j) {
            int gi = spec.p + i, gj = spec.p + j;
            if (i >= j)
                for (int a = (i == j ? 0 : 1); a <= N; ++a)
                    worst = std::max(worst,
                                     std::abs(K.at(gi, gj, a, 0) - bc.m(i, j)(grid.z(a))));
            else
                for (int b = 0; b < N; ++b)
                    worst = std::max(worst,
                                     std::abs(K.at(gi, gj, N, b) - bc.n(i, j)(grid.z(b))));
        }
    return worst;
}

double diagonal_condition_residual(const KernelField& K, const PlantSpec& spec,
                                   const Grid& grid) {
    double worst = 0.0;
    for (int a = 0; a <= grid.N; ++a) {
        double z = grid.z(a);
        for (int i = 0; i < spec.n; ++i)
            for (int j = 0; j < spec.n; ++j) {
                if (i == j)
                    continue;
                double gap = spec.lambda[j](z) - spec.lambda[i](z);
                if (std::abs(gap) < 1e-12)
                    continue;
                worst = std::max(worst, std::abs(K.at(i, j, a, a) * gap - spec.A(i, j)(z)));
            }
    }
    return worst;
}

ResidualStats finalize_residual_stats(std::vector<double>& values) {
    ResidualStats stats;
    stats.count = static_cast<long>(values.size());
    if (values.empty())
        return stats;
    double sum = 0.0;
    for (double v : values) {
        sum += v;
        stats.max_abs = std::max(stats.max_abs, v);
    }
    stats.mean_abs = sum / stats.count;
    auto mid = values.begin() + values.size() / 2;
    std::nth_element(values.begin(), mid, values.end());
    stats.median_abs = *mid;
    return stats;
}

ResidualStats controller_pde_residual(const KernelField& K, const PlantSpec& spec,
                                      const Grid& grid) {
    const int N = grid.N;
    const double h = grid.h();
    std::vector<ScalarFunction> dlambda;
    dlambda.reserve(spec.n);
    for (int i = 0; i < spec.n; ++i)
        dlambda.push_back(spec.lambda[i].derivative());

    std::vector<double> values;
    values.reserve(static_cast<size_t>(N) * N / 2 * spec.n * spec.n);
    for (int a = 2; a < N; ++a) {
        double z = grid.z(a);
        for (int b = 1; b < a; ++b) {
            double zeta = grid.z(b);
            Matrix Azeta = spec.A.eval(zeta);
            for (int i = 0; i < spec.n; ++i)
                for (int j = 0; j < spec.n; ++j) {
                    double dzK = (K.at(i, j, a, b) - K.at(i, j, a - 1, b)) / h;
                    double dcK = (K.at(i, j, a, b) - K.at(i, j, a, b - 1)) / h;
                    double coup = 0.0;
                    for (int k = 0; k < spec.n; ++k)
                        coup += K.at(i, k, a, b) * Azeta(k, j);
                    double r = spec.lambda[i](z) * dzK + spec.lambda[j](zeta) * dcK +
                               dlambda[j](zeta) * K.at(i, j, a, b) - coup;
                    values.push_back(std::abs(r));
                }
        }
    }
    return finalize_residual_stats(values);
}

} // namespace hypctl
