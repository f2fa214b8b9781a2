#include "hypctl/kernel_solver.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <stdexcept>

namespace hypctl {

namespace {

// Sign structure of one kernel entry: block membership and which boundary
// carries its datum.
enum class EntryClass {
    PPUpper, // i < j < p: bottom relation + diagonal, march with increasing z
    PPDiag,  // i = j < p: bottom relation, increasing
    PPLower, // j < i < p: diagonal + artificial l at z=1, decreasing
    PM,      // i < p <= j: diagonal only, increasing
    MP,      // j < p <= i: diagonal only, increasing
    MMUpper, // p <= i < j: diagonal + artificial n at z=1, decreasing
    MMDiag,  // p <= i = j: artificial m at zeta=0, increasing
    MMLower, // p <= j < i: artificial m + diagonal, increasing
};

EntryClass classify(int i, int j, int p) {
    if (i < p && j < p)
        return i < j ? EntryClass::PPUpper : (i == j ? EntryClass::PPDiag : EntryClass::PPLower);
    if (i < p)
        return EntryClass::PM;
    if (j < p)
        return EntryClass::MP;
    return i < j ? EntryClass::MMUpper : (i == j ? EntryClass::MMDiag : EntryClass::MMLower);
}

bool marches_increasing(EntryClass c) {
    return c != EntryClass::PPLower && c != EntryClass::MMUpper;
}

bool has_diag_datum(EntryClass c) {
    return c != EntryClass::PPDiag && c != EntryClass::MMDiag;
}

bool bottom_is_datum(EntryClass c) {
    return c == EntryClass::PPUpper || c == EntryClass::PPDiag || c == EntryClass::MMDiag ||
           c == EntryClass::MMLower;
}

struct SampledProblem {
    int n, p, N;
    double h;
    std::vector<SampledFunction> speed, dspeed;
    std::vector<SampledFunction> coupling;        // n*n row-major
    Matrix D;                                     // bottom matrix
    bool zeroth_on_z;
    std::vector<SampledFunction> art_l, art_m, art_n;

    double coup(int i, int j, double zeta) const { return coupling[i * n + j](zeta); }

    double zeroth(int i, int j, double z, double zeta) const {
        return zeroth_on_z ? dspeed[i](z) : dspeed[j](zeta);
    }

    double diag_value(int i, int j, double z) const {
        return coup(i, j, z) / (speed[j](z) - speed[i](z));
    }
};

SampledProblem sample_problem(const KernelProblem& prob, int N) {
    SampledProblem sp;
    sp.n = prob.n;
    sp.p = prob.p;
    sp.N = N;
    sp.h = 1.0 / N;
    sp.D = prob.bottom_matrix;
    sp.zeroth_on_z = prob.zeroth_order_on_z;
    const int fine = 4 * N;
    for (int i = 0; i < prob.n; ++i) {
        sp.speed.emplace_back(prob.speed[i], fine);
        sp.dspeed.emplace_back(prob.speed[i].derivative(), fine);
    }
    for (int e = 0; e < prob.n * prob.n; ++e)
        sp.coupling.emplace_back(prob.coupling[e], fine);
    const int m = prob.n - prob.p;
    sp.art_l.resize(prob.p * prob.p);
    sp.art_m.resize(m * m);
    sp.art_n.resize(m * m);
    for (int i = 0; i < prob.p; ++i)
        for (int j = 0; j < prob.p; ++j)
            if (i > j)
                sp.art_l[i * prob.p + j] = SampledFunction(prob.art_l[i * prob.p + j], N);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            if (i >= j)
                sp.art_m[i * m + j] = SampledFunction(prob.art_m[i * m + j], N);
            if (i < j)
                sp.art_n[i * m + j] = SampledFunction(prob.art_n[i * m + j], N);
        }
    return sp;
}

// Solves all entries of one kernel row; no other row is read or written.
class RowSolver {
public:
    RowSolver(const SampledProblem& sp, KernelField& field, int row)
        : sp_(sp), field_(field), i_(row) {
        classes_.resize(sp.n);
        for (int j = 0; j < sp.n; ++j)
            classes_[j] = classify(i_, j, sp_.p);
    }

    KernelSolveStats solve(const KernelSolveOptions& opts) {
        impose_fixed_data();
        KernelSolveStats stats;
        for (int it = 0; it < opts.max_iters; ++it) {
            double delta = sweep();
            stats.iterations = it + 1;
            stats.final_delta = delta;
            if (delta < opts.tol) {
                stats.converged = true;
                break;
            }
        }
        return stats;
    }

private:
    const SampledProblem& sp_;
    KernelField& field_;
    int i_;
    std::vector<EntryClass> classes_;

    double val(int j, int a, int b) const { return field_.at(i_, j, a, b); }
    void set(int j, int a, int b, double v) { field_.at(i_, j, a, b) = v; }

    // [W(z,0) D]_{ij} = 0 solved for W_ij(z,0); the sum needs only columns
    // k >= p because the top block of D is diagonal.
    double bottom_relation(int j, double z) const {
        double acc = 0.0;
        for (int k = sp_.p; k < sp_.n; ++k)
            acc += field_.eval(i_, k, z, 0.0) * sp_.D(k, j);
        return -acc / sp_.D(j, j);
    }

    double bottom_relation_at_node(int j, int a) const {
        double acc = 0.0;
        for (int k = sp_.p; k < sp_.n; ++k)
            acc += val(k, a, 0) * sp_.D(k, j);
        return -acc / sp_.D(j, j);
    }

    double bottom_datum(int j, double z) const {
        if (i_ < sp_.p)
            return bottom_relation(j, z);
        return sp_.art_m[(i_ - sp_.p) * (sp_.n - sp_.p) + (j - sp_.p)](z);
    }

    void impose_fixed_data() {
        const int N = sp_.N;
        const double h = sp_.h;
        const int m = sp_.n - sp_.p;
        for (int j = 0; j < sp_.n; ++j) {
            EntryClass c = classes_[j];
            if (has_diag_datum(c))
                for (int a = 0; a <= N; ++a)
                    set(j, a, a, sp_.diag_value(i_, j, a * h));
            if (c == EntryClass::MMDiag || c == EntryClass::MMLower) {
                // The (0,0) corner of MMLower belongs to the diagonal datum.
                int first = (c == EntryClass::MMLower) ? 1 : 0;
                for (int a = first; a <= N; ++a)
                    set(j, a, 0, sp_.art_m[(i_ - sp_.p) * m + (j - sp_.p)](a * h));
            }
            if (c == EntryClass::PPLower)
                for (int b = 0; b < N; ++b)
                    set(j, N, b, sp_.art_l[i_ * sp_.p + j](b * h));
            if (c == EntryClass::MMUpper)
                for (int b = 0; b < N; ++b)
                    set(j, N, b, sp_.art_n[(i_ - sp_.p) * m + (j - sp_.p)](b * h));
        }
    }

    // One RK4 step of the characteristic ODE dzeta/dz = speed_j(zeta)/speed_i(z)
    // from (z0, zeta0) to z1.
    double trace_step(int j, double z0, double zeta0, double z1) const {
        const double dz = z1 - z0;
        auto slope = [&](double z, double zeta) { return sp_.speed[j](zeta) / sp_.speed[i_](z); };
        double k1 = slope(z0, zeta0);
        double k2 = slope(z0 + 0.5 * dz, zeta0 + 0.5 * dz * k1);
        double k3 = slope(z0 + 0.5 * dz, zeta0 + 0.5 * dz * k2);
        double k4 = slope(z1, zeta0 + dz * k3);
        return zeta0 + dz / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
    }

    double coupling_sum(int j, double z, double zeta, bool on_grid_line, int line_a) const {
        double acc = 0.0;
        for (int k = 0; k < sp_.n; ++k) {
            if (k == j)
                continue; // zero coupling diagonal
            double w = on_grid_line ? field_.eval_on_line(i_, k, line_a, zeta)
                                    : field_.eval(i_, k, z, zeta);
            acc += w * sp_.coup(k, j, zeta);
        }
        return acc;
    }

    double coupling_sum_at_node(int j, int a, int b) const {
        double acc = 0.0;
        const double zeta = b * sp_.h;
        for (int k = 0; k < sp_.n; ++k) {
            if (k == j)
                continue;
            acc += val(k, a, b) * sp_.coup(k, j, zeta);
        }
        return acc;
    }

    // Semi-Lagrangian update of node (a, b) of entry j; `a_from` is the
    // adjacent grid line holding the upstream values.
    double node_update(int j, int a, int b, int a_from) const {
        const double h = sp_.h;
        const double z1 = a * h, zeta1 = b * h;
        const double z0 = a_from * h;
        const EntryClass c = classes_[j];

        double zeta0 = trace_step(j, z1, zeta1, z0);

        // Crossing tests against the boundaries that carry this entry's datum.
        double z_foot = z0, zeta_foot = zeta0;
        double foot_value = 0.0;
        bool found = false;

        if (has_diag_datum(c)) {
            double g1 = zeta1 - z1, g0 = zeta0 - z0;
            if (g0 >= 0.0 && g1 < 0.0) {
                double t = g1 / (g1 - g0); // fraction of the step toward the foot
                double w = z1 + t * (z0 - z1);
                z_foot = zeta_foot = w;
                foot_value = sp_.diag_value(i_, j, w);
                found = true;
            }
        }
        if (!found && bottom_is_datum(c) && zeta0 < 0.0) {
            double t = zeta1 / (zeta1 - zeta0);
            double zc = z1 + t * (z0 - z1);
            z_foot = zc;
            zeta_foot = 0.0;
            foot_value = bottom_datum(j, zc);
            found = true;
        }
        if (!found) {
            zeta0 = std::clamp(zeta0, 0.0, z0); // parallel characteristics graze the data-free edges
            zeta_foot = zeta0;
            foot_value = field_.eval_on_line(i_, j, a_from, zeta0);
        }

        const double dz = z1 - z_foot;
        const double li1 = sp_.speed[i_](z1);
        const double li0 = sp_.speed[i_](z_foot);
        const double c0 = sp_.zeroth(i_, j, z_foot, zeta_foot);
        const double c1 = sp_.zeroth(i_, j, z1, zeta1);

        const bool foot_on_line = !found;
        double S0 = (-c0 * foot_value +
                     coupling_sum(j, z_foot, zeta_foot, foot_on_line, a_from)) /
                    li0;
        double C1 = coupling_sum_at_node(j, a, b);

        double denom = 1.0 + 0.5 * dz * c1 / li1;
        return (foot_value + 0.5 * dz * (S0 + C1 / li1)) / denom;
    }

    double sweep() {
        const int N = sp_.N;
        double delta = 0.0;
        auto apply = [&](int j, int a, int b, double v) {
            delta = std::max(delta, std::abs(v - val(j, a, b)));
            set(j, a, b, v);
        };

        // Entries whose datum sits at the small-z end, swept upward. Columns
        // are visited in descending order so that the bottom relation of the
        // ++ block sees this sweep's values of the +- columns.
        for (int a = 1; a <= N; ++a) {
            for (int j = sp_.n - 1; j >= 0; --j) {
                EntryClass c = classes_[j];
                if (!marches_increasing(c))
                    continue;
                for (int b = 0; b <= a; ++b) {
                    if (b == a && has_diag_datum(c))
                        continue;
                    if (b == 0) {
                        if (c == EntryClass::MMDiag || c == EntryClass::MMLower)
                            continue; // artificial data, fixed
                        if (bottom_is_datum(c)) {
                            apply(j, a, 0, bottom_relation_at_node(j, a));
                            continue;
                        }
                    }
                    apply(j, a, b, node_update(j, a, b, a - 1));
                }
            }
        }

        // Entries anchored at z = 1 or at the diagonal from above, swept downward.
        for (int a = N - 1; a >= 0; --a) {
            for (int j = 0; j < sp_.n; ++j) {
                EntryClass c = classes_[j];
                if (marches_increasing(c))
                    continue;
                for (int b = 0; b <= a; ++b) {
                    if (b == a) // diagonal datum
                        continue;
                    apply(j, a, b, node_update(j, a, b, a + 1));
                }
            }
        }

        // Corner (0,0) of the diagonal ++ entries follows the +- columns;
        // the off-diagonal ++ corners are owned by the diagonal datum.
        for (int j = 0; j < sp_.p; ++j)
            if (classes_[j] == EntryClass::PPDiag)
                apply(j, 0, 0, bottom_relation_at_node(j, 0));

        return delta;
    }
};

} // namespace

KernelField solve_kernel_bvp(const KernelProblem& prob, const KernelSolveOptions& opts,
                             KernelSolveStats* stats) {
    if (prob.n < 2 || prob.p < 1 || prob.p >= prob.n)
        throw std::invalid_argument("solve_kernel_bvp: need 1 <= p < n");
    if (static_cast<int>(prob.speed.size()) != prob.n ||
        static_cast<int>(prob.coupling.size()) != prob.n * prob.n)
        throw std::invalid_argument("solve_kernel_bvp: inconsistent problem arrays");

    TriGrid grid(opts.grid_N);
    KernelField field(grid, prob.n, prob.n);
    SampledProblem sp = sample_problem(prob, opts.grid_N);

    std::vector<std::future<KernelSolveStats>> futures;
    futures.reserve(prob.n);
    for (int i = 0; i < prob.n; ++i)
        futures.push_back(std::async(std::launch::async, [&sp, &field, i, &opts] {
            RowSolver solver(sp, field, i);
            return solver.solve(opts);
        }));

    KernelSolveStats total;
    total.converged = true;
    for (auto& f : futures) {
        KernelSolveStats s = f.get();
        total.iterations = std::max(total.iterations, s.iterations);
        total.final_delta = std::max(total.final_delta, s.final_delta);
        total.converged = total.converged && s.converged;
    }
    if (stats)
        *stats = total;
    if (!total.converged)
        throw std::runtime_error("solve_kernel_bvp: no convergence after " +
                                 std::to_string(opts.max_iters) +
                                 " sweeps, residual change " + std::to_string(total.final_delta));
    return field;
}

} // namespace hypctl
