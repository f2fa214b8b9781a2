#include "hypctl/analysis.hpp"

#include "hypctl/matrix_exp.hpp"
#include "hypctl/volterra.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>

#include <cmath>

namespace hypctl {

namespace {

Matrix node_matrix(const KernelField& K, int a, int b) {
    Matrix M(K.rows(), K.cols());
    for (int i = 0; i < K.rows(); ++i)
        for (int j = 0; j < K.cols(); ++j)
            M(i, j) = K.at(i, j, a, b);
    return M;
}

} // namespace

Matrix compute_Q1_tilde(const PlantSpec& spec, const Grid& grid, const Matrix& K_xi,
                        const SpatialMatrixFunction& K_x,
                        const SpatialMatrixFunction& ToInvGamma) {
    const int N = grid.N;
    Matrix acc = spec.Q1 * ToInvGamma.at_node(N).bottomRows(spec.m) + K_xi;
    for (int k = 0; k <= N; ++k)
        acc += grid.h() * trapezoid_weight(k, N) * K_x.at_node(k) * ToInvGamma.at_node(k);
    return acc;
}

ClosedLoopModel solve_Sigma(const PlantSpec& spec, const Grid& grid,
                            const Characteristics& chars, const SpatialMatrixFunction& H0,
                            const Matrix& K, const Matrix& L_xi, const Matrix& Gamma0_top,
                            const Matrix& Q1_tilde) {
    const int N = grid.N;
    const double h = grid.h();
    const int nxi = spec.n_xi;
    const Matrix Ft = spec.F - L_xi * Gamma0_top;

    std::vector<std::vector<Matrix>> V(spec.n), Wh(spec.n);
    for (int i = 0; i < spec.n; ++i) {
        V[i].resize(N + 1);
        Wh[i].resize(2 * N + 1);
        for (int a = 0; a <= N; ++a)
            V[i][a] = matrix_exponential(Ft * chars.phi(i, grid.z(a)));
        for (int k = 0; k <= 2 * N; ++k)
            Wh[i][k] = matrix_exponential(Ft * (-chars.phi(i, 0.5 * k * h)));
    }

    // nu_i(z) = nu_i(0) Psi_i(z,0) + sum_{j<i} nu_j(0) J_ij(z) with
    // J_ij(z) = -int_0^z (1/lambda_i) H1_ij(zeta) Psi_i(z,zeta) dzeta,
    // accumulated with per-cell Simpson like the other explicit rows.
    std::vector<std::vector<std::vector<Matrix>>> J(spec.p);
    for (int i = 0; i < spec.p; ++i) {
        J[i].resize(i);
        for (int j = 0; j < i; ++j) {
            auto& Jij = J[i][j];
            Jij.resize(N + 1);
            Matrix cum = Matrix::Zero(nxi, nxi);
            auto q = [&](double z, int k) -> Matrix {
                double hij = H0(z)(i, j);
                return Matrix(-hij / spec.lambda[i](z) * Wh[i][k]);
            };
            Jij[0] = Matrix::Zero(nxi, nxi);
            Matrix q0 = q(0.0, 0);
            for (int a = 1; a <= N; ++a) {
                Matrix qm = q((a - 0.5) * h, 2 * a - 1);
                Matrix q1 = q(a * h, 2 * a);
                cum += h / 6.0 * (q0 + 4.0 * qm + q1);
                q0 = q1;
                Jij[a] = cum * V[i][a];
            }
        }
    }

    // Joint system for the initial rows: Psi_i(1,0)^T nu_i(0)
    // + sum_{j<i} J_ij(1)^T nu_j(0) = Q1_tilde row i.
    Matrix big = Matrix::Zero(spec.p * nxi, spec.p * nxi);
    Vector rhs(spec.p * nxi);
    for (int i = 0; i < spec.p; ++i) {
        big.block(i * nxi, i * nxi, nxi, nxi) = V[i][N].transpose();
        for (int j = 0; j < i; ++j)
            big.block(i * nxi, j * nxi, nxi, nxi) = J[i][j][N].transpose();
        rhs.segment(i * nxi, nxi) = Q1_tilde.row(i).transpose();
    }
    Eigen::JacobiSVD<Matrix> svd(big);
    double cond = svd.singularValues()(0) / svd.singularValues().tail(1)(0);
    Vector nu0 = big.partialPivLu().solve(rhs);

    Matrix Sigma0_top(spec.p, nxi);
    for (int i = 0; i < spec.p; ++i)
        Sigma0_top.row(i) = nu0.segment(i * nxi, nxi).transpose();

    ClosedLoopModel model;
    model.M_condition = cond;
    model.Q1_tilde = Q1_tilde;
    model.Sigma = SpatialMatrixFunction(grid, spec.n, nxi);

    for (int a = 0; a <= N; ++a) {
        Matrix& S = model.Sigma.at_node(a);
        for (int i = 0; i < spec.p; ++i) {
            RowVector row = Sigma0_top.row(i) * V[i][a];
            for (int j = 0; j < i; ++j)
                row += Sigma0_top.row(j) * J[i][j][a];
            S.row(i) = row;
        }
    }

    // mu_i(z) = (Q0 Sigma0_top)_i Psi_{p+i}(z,0)
    //           - int_0^z (1/lambda_{p+i}) (H2 Sigma0_top)_i Psi_{p+i}(z,zeta) dzeta.
    const Matrix Q0S0 = spec.Q0 * Sigma0_top;
    for (int r = 0; r < spec.m; ++r) {
        const int si = spec.p + r;
        RowVector cum = RowVector::Zero(nxi);
        auto q = [&](double z, int k) -> RowVector {
            RowVector h2row = H0(z).row(si) * Sigma0_top;
            return RowVector(-h2row / spec.lambda[si](z) * Wh[si][k]);
        };
        model.Sigma.at_node(0).row(si) = Q0S0.row(r) * V[si][0];
        RowVector q0 = q(0.0, 0);
        for (int a = 1; a <= N; ++a) {
            RowVector qm = q((a - 0.5) * h, 2 * a - 1);
            RowVector q1 = q(a * h, 2 * a);
            cum += h / 6.0 * (q0 + 4.0 * qm + q1);
            q0 = q1;
            model.Sigma.at_node(a).row(si) = (Q0S0.row(r) + cum) * V[si][a];
        }
    }

    model.fsys = closed_loop_matrix(spec, K, L_xi, Gamma0_top, model.Sigma);
    return model;
}

Matrix closed_loop_matrix(const PlantSpec& spec, const Matrix& K, const Matrix& L_xi,
                          const Matrix& Gamma0_top, const SpatialMatrixFunction& Sigma) {
    const int nxi = spec.n_xi;
    Matrix M = Matrix::Zero(2 * nxi, 2 * nxi);
    M.topLeftCorner(nxi, nxi) = spec.F - spec.B * K;
    M.topRightCorner(nxi, nxi) = spec.B * Sigma.at_node(0).topRows(spec.p);
    M.bottomRightCorner(nxi, nxi) = spec.F - L_xi * Gamma0_top;
    return M;
}

double sigma_bc0_residual(const SpatialMatrixFunction& Sigma, const PlantSpec& spec) {
    const Matrix& S0 = Sigma.at_node(0);
    Matrix lhs = S0.bottomRows(spec.m) - spec.Q0 * S0.topRows(spec.p);
    return lhs.cwiseAbs().maxCoeff();
}

double sigma_bc1_residual(const SpatialMatrixFunction& Sigma, const Matrix& Q1_tilde,
                          const PlantSpec& spec) {
    return (Sigma.at_node(Sigma.grid_cells()).topRows(spec.p) - Q1_tilde).cwiseAbs().maxCoeff();
}

double sigma_ode_residual(const SpatialMatrixFunction& Sigma, const SpatialMatrixFunction& H0,
                          const PlantSpec& spec, const Grid& grid, const Matrix& F_tilde) {
    const Matrix S0_top = Sigma.at_node(0).topRows(spec.p);
    double worst = 0.0;
    for (int a = 1; a <= grid.N; ++a) {
        double z = grid.z(a);
        Matrix dS = (Sigma.at_node(a) - Sigma.at_node(a - 1)) / grid.h();
        Matrix lhs = spec.Lambda(z) * dS;
        Matrix rhs = Sigma.at_node(a) * F_tilde - H0.at_node(a) * S0_top;
        worst = std::max(worst, (lhs - rhs).cwiseAbs().maxCoeff());
    }
    return worst;
}

KernelField compute_full_P(const KernelField& P_I, const Grid& grid) {
    const int N = grid.N;
    const int n = P_I.rows();
    KernelField P(TriGrid(N), n, n);
    for (int a = 0; a <= N; ++a) {
        auto kernel_at = [&](int jt, int lt) { return node_matrix(P_I, a - lt, a - jt); };
        auto rhs_at = [&](int jt) { return node_matrix(P_I, a, a - jt); };
        std::vector<Matrix> rho =
            solve_volterra2_matrix(kernel_at, rhs_at, a, grid.h(), KernelSide::Right);
        for (int b = 0; b <= a; ++b)
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    P.at(i, j, a, b) = rho[a - b](i, j);
    }
    return P;
}

Matrix reconstruct_cascade_state(const Matrix& X, const Vector& xi, const PlantSpec& spec,
                                 const Grid& grid, const KernelField& K_kernel,
                                 const SpatialMatrixFunction& N_I, const KernelField& P_full) {
    const int N = grid.N;
    const double h = grid.h();
    Matrix W(spec.n, N + 1);
    for (int a = 0; a <= N; ++a) {
        Vector v = X.col(a);
        for (int b = 0; b <= a && a > 0; ++b)
            v -= h * trapezoid_weight(b, a) * node_matrix(K_kernel, a, b) * X.col(b);
        W.col(a) = v - N_I.at_node(a) * xi;
    }
    Matrix E(spec.n, N + 1);
    for (int a = 0; a <= N; ++a) {
        Vector e = W.col(a);
        for (int b = 0; b <= a && a > 0; ++b)
            e -= h * trapezoid_weight(b, a) * node_matrix(P_full, a, b) * W.col(b);
        E.col(a) = e;
    }
    return E;
}

PostSettlingReport predict_post_settling(const SimTrace& trace, const PlantSpec& spec,
                                         const Grid& grid, const KernelField& K_kernel,
                                         const SpatialMatrixFunction& N_I,
                                         const KernelField& P_full,
                                         const SpatialMatrixFunction& Sigma, double t_settle) {
    PostSettlingReport report;
    double max_speed = 0.0;
    for (int i = 0; i < spec.n; ++i)
        for (int k = 0; k <= grid.N; ++k)
            max_speed = std::max(max_speed, std::abs(spec.lambda[i](grid.z(k))));
    report.guard = 2.0 * grid.h() * max_speed;
    report.window_start = t_settle + report.guard;
    const int N = grid.N;

    for (size_t s = 0; s < trace.snapshot_t.size(); ++s) {
        if (trace.snapshot_t[s] <= report.window_start)
            continue;
        if (trace.blew_up && trace.snapshot_t[s] >= trace.blowup_time)
            break;
        ++report.snapshots_checked;

        const Matrix& X = trace.x_snaps[s];
        const Vector& xi = trace.xi[trace.snapshot_step[s]];
        const Vector& xih = trace.xihat[trace.snapshot_step[s]];
        Vector eps_xi = xi - xih;

        Matrix E = reconstruct_cascade_state(X, xi, spec, grid, K_kernel, N_I, P_full);
        for (int a = 0; a <= N; ++a) {
            Vector predicted = Sigma.at_node(a) * eps_xi;
            report.max_deviation =
                std::max(report.max_deviation, (E.col(a) - predicted).cwiseAbs().maxCoeff());
            report.scale = std::max({report.scale, E.col(a).cwiseAbs().maxCoeff(),
                                     predicted.cwiseAbs().maxCoeff()});
        }
    }
    report.relative_deviation =
        report.scale > 0.0 ? report.max_deviation / report.scale : report.max_deviation;
    return report;
}

} // namespace hypctl
