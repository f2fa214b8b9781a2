#include "hypctl/decoupling.hpp"

#include "hypctl/matrix_exp.hpp"
#include "hypctl/volterra.hpp"

#include <cmath>
#include <stdexcept>

namespace hypctl {

namespace {

double table_lerp(const std::vector<double>& tab, double s) {
    const int cells = static_cast<int>(tab.size()) - 1;
    double x = std::clamp(s, 0.0, 1.0) * cells;
    int k = std::min(cells - 1, static_cast<int>(x));
    double t = x - k;
    return tab[k] + t * (tab[k + 1] - tab[k]);
}

// Trapezoid over nodes b = 0..m with spacing h; zero for m == 0.
template <typename F>
double trapz_nodes(int m, double h, F&& f) {
    if (m <= 0)
        return 0.0;
    double acc = 0.5 * (f(0) + f(m));
    for (int b = 1; b < m; ++b)
        acc += f(b);
    return acc * h;
}

Matrix node_matrix(const KernelField& K, int a, int b) {
    Matrix M(K.rows(), K.cols());
    for (int i = 0; i < K.rows(); ++i)
        for (int j = 0; j < K.cols(); ++j)
            M(i, j) = K.at(i, j, a, b);
    return M;
}

} // namespace

NIResult solve_NI(const PlantSpec& spec, const Grid& grid, const Characteristics& chars,
                  const Matrix& K, const SpatialMatrixFunction& A0,
                  const SpatialMatrixFunction& G) {
    const int N = grid.N;
    const double h = grid.h();
    const Matrix M = spec.F - spec.B * K;

    NIResult out;
    out.M1 = SpatialMatrixFunction(grid, spec.p, spec.n_xi);
    out.M2 = SpatialMatrixFunction(grid, spec.m, spec.n_xi);
    out.N_I = SpatialMatrixFunction(grid, spec.n, spec.n_xi);

    // Row r of M1 uses speed index r, row r of M2 speed index p + r. The
    // fundamental matrices commute with each other along one characteristic,
    // so Psi_i(z,zeta) = exp(-M phi_i(zeta)) exp(M phi_i(z)) and the integral
    // becomes a single cumulative quadrature (per-cell Simpson, so that the
    // quadrature error stays far below the O(h) kernel data error and an
    // independent RK4 integration reproduces the rows to ~1e-6).
    auto solve_rows = [&](int rows, int speed_offset, auto&& initial_row, auto&& source_row,
                          SpatialMatrixFunction& target) {
        for (int r = 0; r < rows; ++r) {
            const int si = speed_offset + r;
            std::vector<Matrix> V(N + 1), Wh(2 * N + 1);
            for (int a = 0; a <= N; ++a)
                V[a] = matrix_exponential(M * chars.phi(si, grid.z(a)));
            for (int k = 0; k <= 2 * N; ++k)
                Wh[k] = matrix_exponential(M * (-chars.phi(si, 0.5 * k * h)));
            RowVector ic = initial_row(r);
            RowVector cum = RowVector::Zero(spec.n_xi);
            target.at_node(0).row(r) = ic * V[0];
            RowVector q0 = source_row(r, grid.z(0)) * Wh[0];
            for (int a = 1; a <= N; ++a) {
                RowVector qm = source_row(r, (a - 0.5) * h) * Wh[2 * a - 1];
                RowVector q1 = source_row(r, grid.z(a)) * Wh[2 * a];
                cum += h / 6.0 * (q0 + 4.0 * qm + q1);
                q0 = q1;
                target.at_node(a).row(r) = (ic + cum) * V[a];
            }
        }
    };

    solve_rows(
        spec.p, 0,
        [&](int r) -> RowVector { return -K.row(r); },
        [&](int r, double z) -> RowVector {
            Matrix A0z = A0(z);
            Matrix Gz = G(z);
            RowVector row = A0z.row(r).head(spec.p) * K - Gz.row(r);
            return row / spec.lambda[r](z);
        },
        out.M1);

    const Matrix ic2 = spec.C2 - spec.Q0 * K;
    solve_rows(
        spec.m, spec.p,
        [&](int r) -> RowVector { return ic2.row(r); },
        [&](int r, double z) -> RowVector {
            Matrix A0z = A0(z);
            Matrix Gz = G(z);
            RowVector row = A0z.row(spec.p + r).head(spec.p) * K - Gz.row(spec.p + r);
            return row / spec.lambda[spec.p + r](z);
        },
        out.M2);

    for (int a = 0; a <= N; ++a) {
        out.N_I.at_node(a).topRows(spec.p) = out.M1.at_node(a);
        out.N_I.at_node(a).bottomRows(spec.m) = out.M2.at_node(a);
    }
    return out;
}

double PISolution::eval_PI(int i, int j, double z, double zeta, const Characteristics& chars,
                           const PlantSpec& spec) const {
    const int p = spec.p;
    if (i > j || j >= p)
        return 0.0;
    if (i == j)
        return table_lerp(f[i * p + j], chars.sigma(i, j, z, zeta)) / spec.lambda[j](zeta);
    double gap = chars.phi(i, z) - chars.phi(j, zeta);
    if (gap < 0.0)
        return 0.0;
    return table_lerp(f[i * p + j], chars.phi_inverse(i, gap)) / spec.lambda[j](zeta);
}

namespace {

// Shared by the general recursion and the p = 2 transliteration so that both
// perform identical arithmetic.
struct PIWork {
    const PlantSpec& spec;
    const Grid& grid;
    const Characteristics& chars;
    const SpatialMatrixFunction& A0;
    std::vector<Matrix> MB; // M1(z_a) B at every node
    PISolution sol;

    PIWork(const PlantSpec& s, const Grid& g, const Characteristics& c,
           const SpatialMatrixFunction& M1, const SpatialMatrixFunction& A0_,
           const SpatialMatrixFunction& M2)
        : spec(s), grid(g), chars(c), A0(A0_) {
        MB.resize(g.nodes());
        for (int a = 0; a <= g.N; ++a)
            MB[a] = M1.at_node(a) * s.B;
        sol.f.assign(s.p * s.p, {});
        sol.h.assign(s.p * s.p, {});
        sol.h_rhs.assign(s.p * s.p, {});
        sol.H0 = SpatialMatrixFunction(g, s.n, s.p);
        for (int a = 0; a <= g.N; ++a)
            sol.H0.at_node(a).bottomRows(s.m) = -M2.at_node(a) * s.B + A0.at_node(a).bottomRows(s.m);
    }

    double eval_entry(int i, int j, double z, double zeta) const {
        return sol.eval_PI(i, j, z, zeta, chars, spec);
    }

    void last_column(int l) {
        auto& tab = sol.f[l * spec.p + (spec.p - 1)];
        tab.resize(grid.nodes());
        for (int a = 0; a <= grid.N; ++a)
            tab[a] = MB[a](l, spec.p - 1);
    }

    // Boundary trace for an inner column: [M1 B]_{lj} plus the integrals of
    // known h-entries against already-determined kernel entries of line l.
    void inner_column(int l, int j) {
        auto& tab = sol.f[l * spec.p + j];
        tab.resize(grid.nodes());
        for (int a = 0; a <= grid.N; ++a) {
            double z = grid.z(a);
            double acc = MB[a](l, j);
            for (int k = j + 1; k < spec.p; ++k) {
                const auto& hk = sol.h[k * spec.p + j];
                acc += trapz_nodes(a, grid.h(), [&](int b) {
                    return eval_entry(l, k, z, grid.z(b)) * hk[b];
                });
            }
            tab[a] = acc;
        }
    }

    void solve_h(int l, int j) {
        std::vector<double> rhs(grid.nodes());
        for (int a = 0; a <= grid.N; ++a) {
            double z = grid.z(a);
            double acc = -MB[a](l, j) + A0.at_node(a)(l, j);
            for (int k = l + 1; k < spec.p; ++k) {
                const auto& hk = sol.h[k * spec.p + j];
                acc -= trapz_nodes(a, grid.h(), [&](int b) {
                    return eval_entry(l, k, z, grid.z(b)) * hk[b];
                });
            }
            rhs[a] = acc;
        }
        VolterraProblem prob;
        prob.grid = grid;
        prob.kernel = [this, l](double z, double zeta) { return eval_entry(l, l, z, zeta); };
        prob.rhs = [&rhs, this](double z) { return table_lerp(rhs, z); };
        sol.h[l * spec.p + j] = solve_volterra2(prob);
        sol.h_rhs[l * spec.p + j] = std::move(rhs);
    }

    void finalize() {
        const int p = spec.p;
        TriGrid tg(grid.N);
        sol.P_I = KernelField(tg, spec.n, spec.n);
        for (int i = 0; i < p; ++i)
            for (int j = i; j < p; ++j)
                for (int a = 0; a <= grid.N; ++a)
                    for (int b = 0; b <= a; ++b)
                        sol.P_I.at(i, j, a, b) = eval_entry(i, j, grid.z(a), grid.z(b));
        for (int a = 0; a <= grid.N; ++a)
            for (int i = 0; i < p; ++i)
                for (int j = 0; j < i; ++j)
                    sol.H0.at_node(a)(i, j) = sol.h[i * p + j][a];
    }
};

} // namespace

PISolution solve_PI(const PlantSpec& spec, const Grid& grid, const Characteristics& chars,
                    const SpatialMatrixFunction& M1, const SpatialMatrixFunction& A0,
                    const SpatialMatrixFunction& M2) {
    if (spec.p < 1)
        throw std::invalid_argument("solve_PI: p must be at least 1");
    PIWork work(spec, grid, chars, M1, A0, M2);
    for (int l = 0; l < spec.p; ++l)
        work.last_column(l);
    for (int l = spec.p - 1; l >= 0; --l) {
        for (int j = spec.p - 2; j >= l; --j)
            work.inner_column(l, j);
        for (int j = 0; j < l; ++j)
            work.solve_h(l, j);
    }
    work.finalize();
    return work.sol;
}

PISolution solve_PI_p2(const PlantSpec& spec, const Grid& grid, const Characteristics& chars,
                       const SpatialMatrixFunction& M1, const SpatialMatrixFunction& A0,
                       const SpatialMatrixFunction& M2) {
    if (spec.p != 2)
        throw std::invalid_argument("solve_PI_p2: requires p == 2");
    PIWork work(spec, grid, chars, M1, A0, M2);
    // Last-column traces pin p_I,12 and p_I,22 directly from [M1 B].
    work.last_column(0);
    work.last_column(1);
    // One scalar Volterra equation with kernel p_I,22 yields h21.
    work.solve_h(1, 0);
    // Its integral enters the boundary trace of p_I,11.
    work.inner_column(0, 0);
    work.finalize();
    return work.sol;
}

SpatialMatrixFunction compute_P1row(const KernelField& P_I, const PlantSpec& spec,
                                    const Grid& grid) {
    const int N = grid.N;
    const int p = spec.p;

    auto block_at = [&](int a, int b) {
        Matrix M(p, p);
        for (int i = 0; i < p; ++i)
            for (int j = 0; j < p; ++j)
                M(i, j) = P_I.at(i, j, a, b);
        return M;
    };

    // t = 1 - zeta turns the backward reciprocity relation into a forward
    // Volterra equation with the unknown multiplying the kernel on the right.
    auto kernel_at = [&](int jt, int lt) { return block_at(N - lt, N - jt); };
    auto rhs_at = [&](int jt) { return block_at(N, N - jt); };
    std::vector<Matrix> Gt =
        solve_volterra2_matrix(kernel_at, rhs_at, N, grid.h(), KernelSide::Right);

    SpatialMatrixFunction P1(grid, spec.n, spec.n);
    for (int b = 0; b <= N; ++b)
        P1.at_node(b).topLeftCorner(p, p) = Gt[N - b];
    return P1;
}

double p1row_residual(const SpatialMatrixFunction& P1, const KernelField& P_I,
                      const PlantSpec& spec, const Grid& grid) {
    const int N = grid.N;
    const int p = spec.p;
    double worst = 0.0;
    for (int b = 0; b <= N; ++b) {
        Matrix acc = P1.at_node(b).topLeftCorner(p, p);
        if (b < N) {
            Matrix integral = Matrix::Zero(p, p);
            for (int a = b; a <= N; ++a) {
                double w = (a == b || a == N) ? 0.5 : 1.0;
                Matrix PIab(p, p);
                for (int i = 0; i < p; ++i)
                    for (int j = 0; j < p; ++j)
                        PIab(i, j) = P_I.at(i, j, a, b);
                integral += w * grid.h() * P1.at_node(a).topLeftCorner(p, p) * PIab;
            }
            acc += integral;
        }
        Matrix target(p, p);
        for (int i = 0; i < p; ++i)
            for (int j = 0; j < p; ++j)
                target(i, j) = P_I.at(i, j, N, b);
        worst = std::max(worst, (acc - target).cwiseAbs().maxCoeff());
    }
    return worst;
}

double hvolp_residual(const PISolution& pi, const PlantSpec& spec, const Grid& grid,
                      const Characteristics& chars) {
    double worst = 0.0;
    for (int l = 0; l < spec.p; ++l)
        for (int j = 0; j < l; ++j) {
            const auto& h = pi.h[l * spec.p + j];
            const auto& rhs = pi.h_rhs[l * spec.p + j];
            for (int a = 0; a <= grid.N; ++a) {
                double z = grid.z(a);
                double acc = h[a];
                acc += trapz_nodes(a, grid.h(), [&](int b) {
                    return pi.eval_PI(l, l, z, grid.z(b), chars, spec) * h[b];
                });
                worst = std::max(worst, std::abs(acc - rhs[a]));
            }
        }
    return worst;
}

FeedbackGains compute_feedback_gains(const KernelField& K_kernel,
                                     const SpatialMatrixFunction& P1,
                                     const SpatialMatrixFunction& N_I, const PlantSpec& spec,
                                     const Grid& grid) {
    const int N = grid.N;
    const double h = grid.h();

    Matrix integral = Matrix::Zero(spec.n, spec.n_xi);
    for (int a = 0; a <= N; ++a)
        integral += h * trapezoid_weight(a, N) * P1.at_node(a) * N_I.at_node(a);

    FeedbackGains gains;
    gains.K_xi = (integral - N_I.at_node(N)).topRows(spec.p);
    gains.K_x = SpatialMatrixFunction(grid, spec.p, spec.n);
    for (int b = 0; b <= N; ++b) {
        Matrix acc = -node_matrix(K_kernel, N, b) - P1.at_node(b);
        if (b < N) {
            Matrix tail = Matrix::Zero(spec.n, spec.n);
            for (int a = b; a <= N; ++a) {
                double w = (a == b || a == N) ? 0.5 : 1.0;
                tail += w * h * P1.at_node(a) * node_matrix(K_kernel, a, b);
            }
            acc += tail;
        }
        gains.K_x.at_node(b) = acc.topRows(spec.p);
    }
    return gains;
}

} // namespace hypctl
