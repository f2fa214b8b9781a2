#include "hypctl/observer.hpp"

#include "hypctl/matrix_exp.hpp"
#include "hypctl/pole_placement.hpp"
#include "hypctl/volterra.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>

#include <cmath>
#include <sstream>

namespace hypctl {

namespace {

Matrix node_matrix(const KernelField& K, int a, int b) {
    Matrix M(K.rows(), K.cols());
    for (int i = 0; i < K.rows(); ++i)
        for (int j = 0; j < K.cols(); ++j)
            M(i, j) = K.at(i, j, a, b);
    return M;
}

Matrix observer_bottom_matrix(const PlantSpec& spec) {
    Matrix D = Matrix::Zero(spec.n, spec.p);
    D.topRows(spec.p) = Matrix::Identity(spec.p, spec.p);
    D.bottomRows(spec.m) = -spec.Q1.transpose();
    return D;
}

} // namespace

ObserverKernel solve_observer_kernel(const PlantSpec& spec, const DesignParams& params,
                                     const Grid& grid) {
    KernelProblem prob;
    prob.n = spec.n;
    prob.p = spec.p;
    prob.speed.reserve(spec.n);
    for (int i = 0; i < spec.n; ++i)
        prob.speed.push_back(spec.lambda[i].reflected());
    prob.coupling.resize(spec.n * spec.n);
    for (int i = 0; i < spec.n; ++i)
        for (int j = 0; j < spec.n; ++j)
            prob.coupling[i * spec.n + j] = spec.A(j, i).reflected();
    prob.bottom_matrix = observer_bottom_matrix(spec);
    prob.zeroth_order_on_z = true;
    prob.art_l.resize(spec.p * spec.p);
    prob.art_m.resize(spec.m * spec.m);
    prob.art_n.resize(spec.m * spec.m);
    for (int i = 0; i < spec.p; ++i)
        for (int j = 0; j < spec.p; ++j)
            prob.art_l[i * spec.p + j] = params.observer_bc.l(i, j);
    for (int i = 0; i < spec.m; ++i)
        for (int j = 0; j < spec.m; ++j) {
            prob.art_m[i * spec.m + j] = params.observer_bc.m(i, j);
            prob.art_n[i * spec.m + j] = params.observer_bc.n(i, j);
        }

    KernelSolveOptions opts{grid.N, params.kernel_tol, params.kernel_max_iters};
    ObserverKernel out;
    KernelField W = solve_kernel_bvp(prob, opts, &out.stats);

    const int N = grid.N;
    out.R_I = KernelField(TriGrid(N), spec.n, spec.n);
    for (int a = 0; a <= N; ++a)
        for (int b = 0; b <= a; ++b)
            for (int i = 0; i < spec.n; ++i)
                for (int j = 0; j < spec.n; ++j)
                    out.R_I.at(i, j, a, b) = W.at(j, i, N - b, N - a);

    // S(zeta) = -(E1^T - Q1 E2^T) R_I(1, zeta); the solver imposes zeros on
    // and below the diagonal of the S1 block, which are written structurally.
    out.S = SpatialMatrixFunction(grid, spec.p, spec.n);
    for (int b = 0; b <= N; ++b) {
        Matrix R1 = node_matrix(out.R_I, N, b);
        Matrix S = -(R1.topRows(spec.p) - spec.Q1 * R1.bottomRows(spec.m));
        for (int i = 0; i < spec.p; ++i)
            for (int j = 0; j <= i && j < spec.p; ++j)
                S(i, j) = 0.0;
        out.S.at_node(b) = S;
    }
    return out;
}

KernelField compute_R(const KernelField& R_I, const Grid& grid) {
    const int N = grid.N;
    const int n = R_I.rows();
    KernelField R(TriGrid(N), n, n);
    for (int a = 0; a <= N; ++a) {
        // Unknown along the line z = z_a after t = z - zeta; the minus sign of
        // the reciprocity integral moves into the kernel.
        auto kernel_at = [&](int jt, int lt) { return Matrix(-node_matrix(R_I, a - lt, a - jt)); };
        auto rhs_at = [&](int jt) { return node_matrix(R_I, a, a - jt); };
        std::vector<Matrix> rho =
            solve_volterra2_matrix(kernel_at, rhs_at, a, grid.h(), KernelSide::Right);
        for (int b = 0; b <= a; ++b)
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    R.at(i, j, a, b) = rho[a - b](i, j);
    }
    return R;
}

SpatialMatrixFunction compute_Go(const KernelField& R, const PlantSpec& spec, const Grid& grid) {
    SpatialMatrixFunction Go(grid, spec.n, spec.n_xi);
    const double h = grid.h();
    const Matrix tail = spec.Lambda(0.0) * spec.E2() * spec.C2;

    std::vector<Matrix> C1_nodes(grid.nodes());
    for (int b = 0; b <= grid.N; ++b)
        C1_nodes[b] = spec.C1.eval(grid.z(b));

    for (int a = 0; a <= grid.N; ++a) {
        Matrix M = C1_nodes[a] - node_matrix(R, a, 0) * tail;
        if (a > 0) {
            Matrix integral = Matrix::Zero(spec.n, spec.n_xi);
            for (int b = 0; b <= a; ++b)
                integral += h * trapezoid_weight(b, a) * node_matrix(R, a, b) * C1_nodes[b];
            M += integral;
        }
        Go.at_node(a) = M;
    }
    return Go;
}

GammaSolution solve_Gamma(const PlantSpec& spec, const Grid& grid, const Characteristics& chars,
                          const SpatialMatrixFunction& G_o, const SpatialMatrixFunction& S) {
    const int N = grid.N;
    const double h = grid.h();
    const int nxi = spec.n_xi;
    const Matrix& F = spec.F;

    // State-transition factors exp(F phi_i(z)) at the nodes and their
    // inverses on the half grid (the row integrals use per-cell Simpson).
    std::vector<std::vector<Matrix>> V(spec.n), Wh(spec.n), Winv(spec.n);
    for (int i = 0; i < spec.n; ++i) {
        V[i].resize(N + 1);
        Winv[i].resize(N + 1);
        Wh[i].resize(2 * N + 1);
        for (int a = 0; a <= N; ++a) {
            double phi = chars.phi(i, grid.z(a));
            V[i][a] = matrix_exponential(F * phi);
            Winv[i][a] = matrix_exponential(F * (-phi));
        }
        for (int k = 0; k <= 2 * N; ++k)
            Wh[i][k] = matrix_exponential(F * (-chars.phi(i, 0.5 * k * h)));
    }

    // Explicit row solutions: (ic + cumulative integral of q W) V with
    // q(z) = -row of G_o / lambda.
    auto integrate_row = [&](int si, const RowVector& ic, auto&& source,
                             std::vector<RowVector>& out_row, bool include_ic_in_value) {
        out_row.resize(N + 1);
        RowVector cum = RowVector::Zero(nxi);
        out_row[0] = include_ic_in_value ? RowVector(ic * V[si][0]) : RowVector::Zero(nxi);
        RowVector q0 = source(0.0) * Wh[si][0];
        for (int a = 1; a <= N; ++a) {
            RowVector qm = source((a - 0.5) * h) * Wh[si][2 * a - 1];
            RowVector q1 = source(a * h) * Wh[si][2 * a];
            cum += h / 6.0 * (q0 + 4.0 * qm + q1);
            q0 = q1;
            out_row[a] = include_ic_in_value ? RowVector((ic + cum) * V[si][a])
                                             : RowVector(cum * V[si][a]);
        }
    };

    // mu rows: E2^T Gamma with imposed initial value C2.
    std::vector<std::vector<RowVector>> mu(spec.m);
    for (int r = 0; r < spec.m; ++r) {
        const int si = spec.p + r;
        auto source = [&](double z) -> RowVector {
            return RowVector(-G_o(z).row(spec.p + r) / spec.lambda[si](z));
        };
        integrate_row(si, spec.C2.row(r), source, mu[r], true);
    }

    // Particular parts H_i(z) of the nu rows (zero initial value).
    std::vector<std::vector<RowVector>> H(spec.p);
    for (int r = 0; r < spec.p; ++r) {
        auto source = [&](double z) -> RowVector {
            return RowVector(-G_o(z).row(r) / spec.lambda[r](z));
        };
        integrate_row(r, RowVector::Zero(nxi), source, H[r], false);
    }

    // Right-hand sides r_i of the initial-value system.
    Matrix E2Gamma1(spec.m, nxi);
    for (int r = 0; r < spec.m; ++r)
        E2Gamma1.row(r) = mu[r][N];

    std::vector<RowVector> rvec(spec.p);
    for (int i = 0; i < spec.p; ++i) {
        RowVector q = spec.Q1.row(i) * E2Gamma1;
        RowVector integral = RowVector::Zero(nxi);
        for (int a = 0; a <= N; ++a) {
            const Matrix& Sa = S.at_node(a);
            RowVector term = RowVector::Zero(nxi);
            for (int j = i + 1; j < spec.p; ++j)
                term += Sa(i, j) * H[j][a];
            for (int b = 0; b < spec.m; ++b)
                term += Sa(i, spec.p + b) * mu[b][a];
            integral += h * trapezoid_weight(a, N) * term;
        }
        // The particular part of nu_i(1) moves to the right-hand side:
        // r_i = q_i - int (S1 H + S2 E2'Gamma) - H_i(1). Using the row's own
        // H value keeps the z = 1 boundary identity exact at the discrete
        // level.
        rvec[i] = q - integral - H[i][N];
    }

    // Block system: Psi_i(1,0)^T nu_i(0) + sum_{j>i} M_ij^T nu_j(0) = r_i with
    // M_ij = int_0^1 Psi_j(zeta,0) s_ij(zeta) dzeta.
    Matrix big = Matrix::Zero(spec.p * nxi, spec.p * nxi);
    Vector rhs(spec.p * nxi);
    for (int i = 0; i < spec.p; ++i) {
        big.block(i * nxi, i * nxi, nxi, nxi) = V[i][N].transpose();
        for (int j = i + 1; j < spec.p; ++j) {
            Matrix Mij = Matrix::Zero(nxi, nxi);
            for (int a = 0; a <= N; ++a)
                Mij += h * trapezoid_weight(a, N) * V[j][a] * S.at_node(a)(i, j);
            big.block(i * nxi, j * nxi, nxi, nxi) = Mij.transpose();
        }
        rhs.segment(i * nxi, nxi) = rvec[i].transpose();
    }

    Eigen::JacobiSVD<Matrix> svd(big);
    double cond = svd.singularValues()(0) / svd.singularValues().tail(1)(0);
    Vector nu0 = big.partialPivLu().solve(rhs);

    GammaSolution out;
    out.M_condition = cond;
    out.Gamma = SpatialMatrixFunction(grid, spec.n, nxi);
    for (int a = 0; a <= N; ++a) {
        Matrix& G = out.Gamma.at_node(a);
        for (int i = 0; i < spec.p; ++i)
            G.row(i) = nu0.segment(i * nxi, nxi).transpose() * V[i][a] + H[i][a];
        for (int r = 0; r < spec.m; ++r)
            G.row(spec.p + r) = mu[r][a];
    }
    return out;
}

std::string ObservabilityReport::summary() const {
    std::ostringstream os;
    os << (observable ? "observable" : "NOT observable");
    if (rank_fallback)
        os << " (rank test, defective F)";
    os << "; threshold " << threshold << "; products:";
    for (size_t i = 0; i < products.size(); ++i)
        os << " |C v_" << i + 1 << "| = " << products[i];
    return os.str();
}

ObservabilityReport check_observability(const Matrix& Gamma0_top, const Matrix& F) {
    ObservabilityReport report;
    const int n = static_cast<int>(F.rows());
    Eigen::EigenSolver<Matrix> es(F);
    Eigen::MatrixXcd Vec = es.eigenvectors();
    for (int i = 0; i < n; ++i)
        report.eigenvalues.push_back(es.eigenvalues()(i));

    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(Vec);
    bool defective = svd.singularValues().tail(1)(0) < 1e-8 * svd.singularValues()(0);

    const double cnorm = Gamma0_top.norm();
    report.threshold = 1e-8 * cnorm;

    if (!defective) {
        report.observable = true;
        for (int i = 0; i < n; ++i) {
            Eigen::VectorXcd v = Vec.col(i);
            double prod = (Gamma0_top.cast<Complex>() * v).norm();
            report.products.push_back(prod);
            if (prod <= report.threshold * v.norm())
                report.observable = false;
        }
        return report;
    }

    // Defective F: PBH rank test per distinct eigenvalue.
    report.rank_fallback = true;
    report.observable = true;
    std::vector<Complex> distinct;
    for (int i = 0; i < n; ++i) {
        bool seen = false;
        for (const Complex& mu : distinct)
            if (std::abs(mu - es.eigenvalues()(i)) < 1e-8 * (1.0 + std::abs(mu)))
                seen = true;
        if (!seen)
            distinct.push_back(es.eigenvalues()(i));
    }
    for (const Complex& mu : distinct) {
        Eigen::MatrixXcd M(n + Gamma0_top.rows(), n);
        M.topRows(n) = mu * Eigen::MatrixXcd::Identity(n, n) - F.cast<Complex>();
        M.bottomRows(Gamma0_top.rows()) = Gamma0_top.cast<Complex>();
        Eigen::JacobiSVD<Eigen::MatrixXcd> s(M);
        double smax = s.singularValues()(0);
        int rank = 0;
        for (int k = 0; k < s.singularValues().size(); ++k)
            if (s.singularValues()(k) > 1e-10 * smax)
                ++rank;
        report.products.push_back(s.singularValues().tail(1)(0));
        if (rank < n)
            report.observable = false;
    }
    return report;
}

ObserverGains compute_observer_gains(const SpatialMatrixFunction& Gamma, const KernelField& R_I,
                                     const PlantSpec& spec, const Grid& grid,
                                     const std::vector<Complex>& observer_poles, uint64_t seed) {
    const int N = grid.N;
    const double h = grid.h();
    Matrix C = Gamma.at_node(0).topRows(spec.p); // E1^T Gamma(0)

    Matrix Kdual = place_poles(spec.F.transpose(), C.transpose(), observer_poles, seed);
    ObserverGains out;
    out.L_xi = Kdual.transpose();

    out.ToInvGamma = SpatialMatrixFunction(grid, spec.n, spec.n_xi);
    out.L = SpatialMatrixFunction(grid, spec.n, spec.p);
    const Matrix Lam0E1 = spec.Lambda(0.0) * spec.E1();
    for (int a = 0; a <= N; ++a) {
        Matrix T = Gamma.at_node(a);
        for (int b = 0; b <= a && a > 0; ++b)
            T -= h * trapezoid_weight(b, a) * node_matrix(R_I, a, b) * Gamma.at_node(b);
        out.ToInvGamma.at_node(a) = T;
        out.L.at_node(a) = T * out.L_xi - node_matrix(R_I, a, 0) * Lam0E1;
    }
    return out;
}

double observer_bc_residual(const KernelField& R_I, const SpatialMatrixFunction& S,
                            const PlantSpec& spec, const Grid& grid) {
    double worst = 0.0;
    for (int b = 0; b < grid.N; ++b) {
        Matrix R1 = node_matrix(R_I, grid.N, b);
        Matrix lhs = R1.topRows(spec.p) - spec.Q1 * R1.bottomRows(spec.m) + S.at_node(b);
        for (int i = 0; i < spec.p; ++i)
            for (int j = 0; j <= i && j < spec.p; ++j)
                worst = std::max(worst, std::abs(lhs(i, j)));
    }
    return worst;
}

double observer_diag_residual(const KernelField& R_I, const PlantSpec& spec, const Grid& grid) {
    double worst = 0.0;
    for (int a = 0; a <= grid.N; ++a) {
        double z = grid.z(a);
        for (int i = 0; i < spec.n; ++i)
            for (int j = 0; j < spec.n; ++j) {
                if (i == j)
                    continue;
                double gap = spec.lambda[i](z) - spec.lambda[j](z);
                if (std::abs(gap) < 1e-12)
                    continue;
                worst = std::max(worst, std::abs(R_I.at(i, j, a, a) * gap - spec.A(i, j)(z)));
            }
    }
    return worst;
}

ResidualStats observer_pde_residual(const KernelField& R_I, const PlantSpec& spec,
                                    const Grid& grid) {
    const int N = grid.N;
    const double h = grid.h();
    std::vector<ScalarFunction> dlambda;
    for (int i = 0; i < spec.n; ++i)
        dlambda.push_back(spec.lambda[i].derivative());

    std::vector<double> values;
    values.reserve(static_cast<size_t>(N) * N / 2 * spec.n * spec.n);
    for (int a = 2; a < N; ++a) {
        double z = grid.z(a);
        Matrix Az = spec.A.eval(z);
        for (int b = 1; b < a; ++b) {
            double zeta = grid.z(b);
            for (int i = 0; i < spec.n; ++i)
                for (int j = 0; j < spec.n; ++j) {
                    double dzR = (R_I.at(i, j, a, b) - R_I.at(i, j, a - 1, b)) / h;
                    double dcR = (R_I.at(i, j, a, b) - R_I.at(i, j, a, b - 1)) / h;
                    double coup = 0.0;
                    for (int k = 0; k < spec.n; ++k)
                        coup += Az(i, k) * R_I.at(k, j, a, b);
                    double r = spec.lambda[i](z) * dzR + spec.lambda[j](zeta) * dcR +
                               dlambda[j](zeta) * R_I.at(i, j, a, b) + coup;
                    values.push_back(std::abs(r));
                }
        }
    }
    return finalize_residual_stats(values);
}

double reciprocity_residual(const KernelField& R, const KernelField& R_I, const Grid& grid) {
    const int N = grid.N;
    const double h = grid.h();
    double worst = 0.0;
    for (int a = 0; a <= N; ++a)
        for (int b = 0; b <= a; ++b) {
            Matrix acc = node_matrix(R, a, b);
            if (b < a) {
                Matrix integral = Matrix::Zero(R.rows(), R.cols());
                for (int c = b; c <= a; ++c) {
                    double w = (c == b || c == a) ? 0.5 : 1.0;
                    integral += w * h * node_matrix(R, a, c) * node_matrix(R_I, c, b);
                }
                acc -= integral;
            }
            worst = std::max(worst, (acc - node_matrix(R_I, a, b)).cwiseAbs().maxCoeff());
        }
    return worst;
}

double kernel_transform_identity_residual(const KernelField& R, const KernelField& R_I,
                                          const Grid& grid) {
    const int N = grid.N;
    const double h = grid.h();
    double worst = 0.0;
    for (int a = 0; a <= N; ++a) {
        Matrix acc = node_matrix(R_I, a, 0);
        for (int c = 0; c <= a && a > 0; ++c)
            acc += h * trapezoid_weight(c, a) * node_matrix(R, a, c) * node_matrix(R_I, c, 0);
        worst = std::max(worst, (acc - node_matrix(R, a, 0)).cwiseAbs().maxCoeff());
    }
    return worst;
}

double gamma_bc0_residual(const SpatialMatrixFunction& Gamma, const PlantSpec& spec) {
    return (Gamma.at_node(0).bottomRows(spec.m) - spec.C2).cwiseAbs().maxCoeff();
}

double gamma_bc1_residual(const SpatialMatrixFunction& Gamma, const SpatialMatrixFunction& S,
                          const PlantSpec& spec, const Grid& grid) {
    const int N = grid.N;
    Matrix G1 = Gamma.at_node(N);
    Matrix lhs = G1.topRows(spec.p) - spec.Q1 * G1.bottomRows(spec.m);
    Matrix integral = Matrix::Zero(spec.p, spec.n_xi);
    for (int a = 0; a <= N; ++a)
        integral += grid.h() * trapezoid_weight(a, N) * S.at_node(a) * Gamma.at_node(a);
    return (lhs + integral).cwiseAbs().maxCoeff();
}

} // namespace hypctl
