// Acceptance suite: runs every gate of the toolkit against the bundled
// 4x4 demo plant and prints one PASS/FAIL line per criterion. The process
// exit code is the number of failed criteria.

#include "hypctl/analysis.hpp"
#include "hypctl/design.hpp"
#include "hypctl/pole_placement.hpp"
#include "hypctl/simulator.hpp"
#include "hypctl/volterra.hpp"
#include "support/example_plant.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>

using namespace hypctl;
using testsupport::example_config;
using testsupport::example_plant;

namespace {

int failures = 0;

void report(int id, const char* what, bool ok, const std::string& detail) {
    std::printf("%s  criterion %2d: %s (%s)\n", ok ? "PASS" : "FAIL", id, what,
                detail.c_str());
    std::fflush(stdout);
    if (!ok)
        ++failures;
}

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), pattern, a, b, c);
    return buf;
}

struct Timer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
};

} // namespace

int main() {
    const ProblemConfig cfg = example_config(200, 6.0);
    const PlantSpec& plant = cfg.plant;

    // ---- criterion 1: pole placement on both sides --------------------
    {
        Timer timer;
        DesignResult quick = run_design(cfg, 64); // placement accuracy is grid-insensitive
        double ctrl_err = eigenvalue_match_distance(
            sorted_eigenvalues(plant.F - plant.B * quick.K), cfg.design.controller_poles);
        double obs_err = eigenvalue_match_distance(
            sorted_eigenvalues(plant.F - quick.obs_gains.L_xi * quick.Gamma0_top()),
            cfg.design.observer_poles);
        Timer placement_timer;
        Matrix K = place_poles(plant.F, plant.B, cfg.design.controller_poles, 25);
        double place_seconds = placement_timer.seconds();
        (void)K;
        report(1, "controller poles {-2,-3,-4}, observer poles {-5,-6,-7} within 1e-8",
               ctrl_err <= 1e-8 && obs_err <= 1e-8 && place_seconds < 1.0,
               fmt("ctrl %.2e, obs %.2e, placement %.3fs", ctrl_err, obs_err, place_seconds));
    }

    // ---- criterion 2: open-loop instability ----------------------------
    {
        std::vector<Complex> expected = {{-std::sqrt(2.0), 0.0}, {0.0, 0.0},
                                         {std::sqrt(2.0), 0.0}};
        double err = eigenvalue_match_distance(sorted_eigenvalues(plant.F), expected);
        report(2, "eig(F) = {0, +sqrt2, -sqrt2} within 1e-10", err <= 1e-10,
               fmt("max pairing distance %.2e", err));
    }

    // ---- criterion 3: settling-time constants --------------------------
    {
        auto t = settling_times(plant, Grid(200));
        double err = std::max(std::abs(t.t_c - 11.0 / 6), std::abs(t.t_o - 11.0 / 6));
        report(3, "t_c = t_o = 11/6 (exact on constant speeds)", err <= 1e-12 && t.t_c == t.t_o,
               fmt("deviation %.2e", err));
    }

    // ---- criteria 4, 9b need the full design at N = 200 ----------------
    bool criterion9_ok = false;
    std::string criterion9_detail;
    Timer design_timer;
    DesignResult design = run_design(cfg);
    double design_seconds = design_timer.seconds();

    {
        Timer sim_timer;
        SimTrace trace =
            simulate_closed_loop(plant, design.grid, design.gains.K_xi, design.gains.K_x,
                                 design.obs_gains.L_xi, design.obs_gains.L, cfg.sim);
        double seconds = design_seconds + sim_timer.seconds();
        double eps_tail = trace.tail_max(trace.eps_xi_norm, 2.5) / trace.peak(trace.eps_xi_norm);
        double x_tail = trace.tail_max(trace.sup_x, 3.8) / trace.peak(trace.sup_x);
        double xi_tail = trace.tail_max(trace.xi_norm, 3.8) / trace.peak(trace.xi_norm);
        bool ok = !trace.blew_up && eps_tail <= 0.01 && x_tail <= 0.01 && xi_tail <= 0.01 &&
                  seconds < 60.0;
        report(4,
               "closed loop at N=200, CFL=0.9: |eps_xi| <= 1% of peak after t=2.5, "
               "sup|x| and |xi| <= 1% after t=3.8, under 60 s",
               ok,
               fmt("eps %.3f%%, x %.3f%%, xi %.3f%%", 100 * eps_tail, 100 * x_tail,
                   100 * xi_tail) +
                   fmt(", %.1f s", seconds));

        // ---- criterion 9 (reported after 8): separation + post-settling
        std::vector<Complex> assigned = cfg.design.controller_poles;
        assigned.insert(assigned.end(), cfg.design.observer_poles.begin(),
                        cfg.design.observer_poles.end());
        double spec_err = eigenvalue_match_distance(sorted_eigenvalues(design.cl.fsys), assigned);

        KernelField P_full = compute_full_P(design.pi.P_I, design.grid);
        PostSettlingReport ps =
            predict_post_settling(trace, plant, design.grid, design.ctrl.K, design.ni.N_I,
                                  P_full, design.cl.Sigma, design.times.t_c + design.times.t_o);
        double run_peak = 0.0;
        for (size_t s = 0; s < trace.snapshot_t.size(); ++s) {
            Matrix E = reconstruct_cascade_state(trace.x_snaps[s],
                                                 trace.xi[trace.snapshot_step[s]], plant,
                                                 design.grid, design.ctrl.K, design.ni.N_I,
                                                 P_full);
            run_peak = std::max(run_peak, E.cwiseAbs().maxCoeff());
        }
        criterion9_ok = spec_err <= 1e-8 && ps.max_deviation / run_peak <= 0.05;
        criterion9_detail =
            fmt("spectrum %.2e, deviation %.1f%% of the cascade transient peak", spec_err,
                100 * ps.max_deviation / run_peak) +
            " - the prediction check is blocked by the plant's boundary recycling "
            "(|Q1| ~ 40) amplifying the first-order dissipation remnant and by "
            "|Sigma| ~ 1e7; see the verification notes in the README";
    }

    // ---- criterion 5: finite-time observer property ---------------------
    {
        double tails[2] = {0.0, 0.0};
        int idx = 0;
        for (int N : {200, 400}) {
            auto c = example_config(N, 4.0);
            DesignResult r = run_design(c);
            SimTrace er =
                simulate_error_system(plant, r.grid, r.obs_gains.L_xi, r.obs_gains.L, c.sim);
            double guard = 10.0 * r.grid.h() * 3.0;
            double peak0 = 0.0, tail = 0.0;
            const double h = r.grid.h();
            for (size_t s = 0; s < er.snapshot_t.size(); ++s) {
                const Matrix& E = er.x_snaps[s];
                const Vector& exi = er.xi[er.snapshot_step[s]];
                double sup = 0.0;
                for (int a = 0; a <= r.grid.N; ++a) {
                    Vector v = E.col(a);
                    for (int b = 0; b <= a && a > 0; ++b)
                        v += h * trapezoid_weight(b, a) * r.R.eval_matrix(r.grid.z(a), r.grid.z(b)) *
                             E.col(b);
                    sup = std::max(sup,
                                   (v - r.gamma.Gamma.at_node(a) * exi).cwiseAbs().maxCoeff());
                }
                if (er.snapshot_t[s] < 0.2)
                    peak0 = std::max(peak0, sup);
                if (er.snapshot_t[s] > r.times.t_o + guard)
                    tail = std::max(tail, sup);
            }
            tails[idx++] = tail / peak0;
        }
        bool ok = tails[0] <= 0.02 && tails[0] / tails[1] >= 1.5;
        report(5, "sup|theta| <= 2% of initial peak after t_o + guard, improving >= 1.5x at N=400",
               ok, fmt("N=200: %.3f%%, N=400: %.3f%%, ratio %.2f", 100 * tails[0],
                       100 * tails[1], tails[0] / tails[1]));
    }

    // ---- criterion 6: Volterra oracle suite ----------------------------
    {
        Grid grid(200);
        const double h = grid.h();
        auto max_err = [&](const std::vector<double>& f, auto&& exact) {
            double worst = 0.0;
            for (int k = 0; k <= grid.N; ++k)
                worst = std::max(worst, std::abs(f[k] - exact(grid.z(k))));
            return worst;
        };
        double e1 = max_err(
            solve_volterra2({[](double, double) { return 1.0; }, [](double) { return 1.0; },
                             grid}),
            [](double z) { return std::exp(-z); });
        double e2 = max_err(
            solve_volterra2({[](double z, double zeta) { return z - zeta; },
                             [](double z) { return z; }, grid}),
            [](double z) { return std::sin(z); });

        std::mt19937_64 rng(424242);
        std::uniform_real_distribution<double> coeff(-1.0, 1.0);
        double worst_gap = 0.0;
        for (int trial = 0; trial < 50; ++trial) {
            double a = coeff(rng), b = coeff(rng), c = coeff(rng), d = 2 * coeff(rng);
            VolterraProblem prob{[=](double z, double zeta) {
                                     return a + b * std::sin(3 * z + d) +
                                            c * std::cos(2 * zeta - d);
                                 },
                                 [=](double z) { return std::cos(2 * M_PI * z) + a * z; },
                                 grid};
            auto direct = solve_volterra2(prob);
            auto picard = picard_iterate(prob, 400, 1e-13);
            for (int k = 0; k <= grid.N; ++k)
                worst_gap = std::max(worst_gap, std::abs(direct[k] - picard[k]));
        }
        bool ok = e1 <= 5 * h * h && e2 <= 5 * h * h && worst_gap <= 1e-8;
        report(6, "analytic Volterra cases within 5h^2; Nystrom vs Picard <= 1e-8 on 50 kernels",
               ok, fmt("exp case %.2e, sin case %.2e, max backend gap %.2e", e1, e2, worst_gap));
    }

    // ---- criterion 7: kernel residual gates ----------------------------
    {
        Grid fine(200), coarse(100);
        DesignParams params_fine = cfg.design;
        DesignParams params_coarse = cfg.design;
        params_coarse.grid_N = 100;
        auto ctrl_coarse = solve_controller_kernel(plant, params_coarse, coarse);
        auto obs_coarse = solve_observer_kernel(plant, params_coarse, coarse);

        double bc_ctrl = controller_bc_residual(design.ctrl.K, plant, fine);
        double bc_obs = observer_bc_residual(design.obs.R_I, design.obs.S, plant, fine);
        double r_ctrl = controller_pde_residual(ctrl_coarse.K, plant, coarse).median_abs /
                        controller_pde_residual(design.ctrl.K, plant, fine).median_abs;
        double r_obs = observer_pde_residual(obs_coarse.R_I, plant, coarse).median_abs /
                       observer_pde_residual(design.obs.R_I, plant, fine).median_abs;
        bool ok = bc_ctrl <= 1e-8 && bc_obs <= 1e-8 && r_ctrl >= 1.5 && r_ctrl <= 2.5 &&
                  r_obs >= 1.5 && r_obs <= 2.5;
        report(7, "kernel BCs <= 1e-8; interior residual self-convergence ratio in [1.5, 2.5]",
               ok, fmt("BC ctrl %.2e, obs %.2e", bc_ctrl, bc_obs) +
                       fmt(", ratios ctrl %.2f, obs %.2f", r_ctrl, r_obs));
    }

    // ---- criterion 8: reciprocity and substitution identities -----------
    {
        double p1 = design.diagnostics.at("p1row_residual");
        double kt = design.diagnostics.at("kernel_transform_residual");
        double hv = design.diagnostics.at("hvolp_residual");
        bool ok = p1 <= 1e-10 && kt <= 1e-8 && hv <= 1e-8;
        report(8, "P(1,.) residual <= 1e-10, transform identity <= 1e-8, H1 equations <= 1e-8",
               ok, fmt("%.2e / %.2e / %.2e", p1, kt, hv));
    }

    report(9,
           "separation principle: closed-loop spectrum within 1e-8 and "
           "post-settling e_x = Sigma eps_xi within 5%",
           criterion9_ok, criterion9_detail);

    // ---- criterion 10: structural properties ----------------------------
    {
        bool zeros_ok = true;
        const Grid& grid = design.grid;
        for (int k = 0; k <= grid.N && zeros_ok; ++k) {
            const Matrix& A0 = design.ctrl.A0.at_node(k);
            const Matrix& H0 = design.pi.H0.at_node(k);
            const Matrix& S = design.obs.S.at_node(k);
            for (int i = 0; i < plant.p; ++i)
                for (int j = i; j < plant.p; ++j)
                    zeros_ok = zeros_ok && A0(i, j) == 0.0 && H0(i, j) == 0.0;
            for (int i = 0; i < plant.p; ++i)
                for (int j = 0; j <= i && j < plant.p; ++j)
                    zeros_ok = zeros_ok && S(i, j) == 0.0;
        }
        bool sparsity_ok = true;
        for (int a = 0; a <= grid.N && sparsity_ok; ++a)
            for (int b = 0; b <= a; ++b)
                for (int i = 0; i < plant.n; ++i)
                    for (int j = 0; j < plant.n; ++j)
                        if (!(i <= j && j < plant.p))
                            sparsity_ok = sparsity_ok && design.pi.P_I.at(i, j, a, b) == 0.0;

        Characteristics chars(plant, grid);
        auto p2 = solve_PI_p2(plant, grid, chars, design.ni.M1, design.ctrl.A0, design.ni.M2);
        bool bitwise = design.pi.P_I.max_abs_diff(p2.P_I) == 0.0;
        for (int k = 0; k <= grid.N && bitwise; ++k)
            bitwise = (design.pi.H0.at_node(k) - p2.H0.at_node(k)).cwiseAbs().maxCoeff() == 0.0;

        report(10,
               "A1/H1 strictly lower, S1 strictly upper, P_I confined to the upper p x p "
               "block, p = 2 path bit-identical to the general recursion",
               zeros_ok && sparsity_ok && bitwise,
               std::string(zeros_ok ? "triangular zeros exact" : "triangular zeros VIOLATED") +
                   (sparsity_ok ? ", sparsity exact" : ", sparsity VIOLATED") +
                   (bitwise ? ", recursion paths bit-identical" : ", paths DIFFER"));
    }

    std::printf("%d of 10 criteria failed\n", failures);
    return failures;
}
