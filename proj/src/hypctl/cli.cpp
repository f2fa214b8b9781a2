#include "hypctl/cli.hpp"

#include "hypctl/design.hpp"
#include "hypctl/pole_placement.hpp"
#include "hypctl/simulator.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>

namespace hypctl {

namespace {

struct CheckList {
    std::ostream& os;
    bool all_ok = true;

    void check(const std::string& name, double value, double threshold) {
        bool ok = value <= threshold;
        all_ok = all_ok && ok;
        os << (ok ? "PASS" : "FAIL") << "  " << name << " = " << std::scientific
           << std::setprecision(3) << value << " (<= " << threshold << ")\n";
    }

    void check_range(const std::string& name, double value, double lo, double hi) {
        bool ok = value >= lo && value <= hi;
        all_ok = all_ok && ok;
        os << (ok ? "PASS" : "FAIL") << "  " << name << " = " << std::fixed
           << std::setprecision(3) << value << " (in [" << lo << ", " << hi << "])\n";
    }

    void skip(const std::string& name, const std::string& why) {
        os << "SKIP  " << name << " (" << why << ")\n";
    }
};

void print_spectrum(std::ostream& os, const std::string& label, const Matrix& M) {
    os << label << ":";
    for (const Complex& c : sorted_eigenvalues(M)) {
        os << " " << c.real();
        if (std::abs(c.imag()) > 1e-12)
            os << (c.imag() > 0 ? "+" : "") << c.imag() << "i";
    }
    os << "\n";
}

// The residual gates a finished design must meet before it is written out.
bool design_gates(const DesignResult& r, std::ostream& os) {
    CheckList checks{os};
    auto d = [&](const char* key) { return r.diagnostics.at(key); };
    checks.check("controller kernel BC residual", d("ctrl_bc_residual"), 1e-8);
    checks.check("controller diagonal condition", d("ctrl_diag_residual"), 1e-10);
    checks.check("observer kernel BC residual", d("obs_bc_residual"), 1e-8);
    checks.check("observer diagonal condition", d("obs_diag_residual"), 1e-10);
    checks.check("P(1,.) reciprocity residual", d("p1row_residual"), 1e-10);
    checks.check("H1 Volterra residuals", d("hvolp_residual"), 1e-8);
    checks.check("R reciprocity residual", d("reciprocity_residual"), 1e-10);
    checks.check("kernel transform identity", d("kernel_transform_residual"), 1e-8);
    checks.check("Gamma BC at z=0", d("gamma_bc0_residual"), 1e-12);
    checks.check("Gamma BC at z=1", d("gamma_bc1_residual"), 1e-6);
    checks.check("Sigma BC at z=0", d("sigma_bc0_residual"), 1e-6);
    checks.check("Sigma BC at z=1", d("sigma_bc1_residual"), 1e-6);
    checks.check("controller pole assignment", d("ctrl_pole_error"), 1e-8);
    checks.check("observer pole assignment", d("obs_pole_error"), 1e-8);
    checks.check("closed-loop spectrum", d("fsys_spectrum_error"), 1e-8);
    return checks.all_ok;
}

} // namespace

int cmd_validate(const std::string& config_path, std::ostream& os) {
    ProblemConfig cfg;
    try {
        cfg = load_config(config_path);
    } catch (const std::exception& e) {
        os << "parse error: " << e.what() << "\n";
        return kExitUsage;
    }
    ValidationReport report = validate_plant(cfg.plant, Grid(cfg.design.grid_N));
    os << report.to_string();
    return report.valid() ? kExitOk : kExitFailed;
}

int cmd_design(const std::string& config_path, const std::string& out_path,
               const CommandOverrides& ov, std::ostream& os) {
    ProblemConfig cfg;
    try {
        cfg = load_config(config_path);
    } catch (const std::exception& e) {
        os << "parse error: " << e.what() << "\n";
        return kExitUsage;
    }

    DesignResult r;
    try {
        r = run_design(cfg, ov.grid_N, ov.seed);
    } catch (const DesignStageError& e) {
        os << e.stage << ": failed\n" << e.what() << "\n";
        return kExitFailed;
    }

    os << "settling times: t_c = " << r.times.t_c << ", t_o = " << r.times.t_o << "\n";
    print_spectrum(os, "open-loop ODE spectrum", cfg.plant.F);
    print_spectrum(os, "eig(F - B K)", cfg.plant.F - cfg.plant.B * r.K);
    print_spectrum(os, "eig(F - L_xi E1'Gamma(0))",
                   cfg.plant.F - r.obs_gains.L_xi * r.gamma.Gamma.at_node(0).topRows(cfg.plant.p));
    os << "observability: " << r.observability.summary() << "\n";

    bool ok = design_gates(r, os);

    save_design_output(out_path, r, cfg.plant);
    std::filesystem::path base(out_path);
    write_gains_csv(base.string() + ".Kx.csv", r.gains.K_x, r.grid);
    write_observer_csv(base.string() + ".L.csv", r.obs_gains.L, r.grid);
    {
        std::ofstream kc(base.string() + ".kernel.csv", std::ios::binary);
        r.ctrl.K.write_csv(kc);
    }
    os << "design written to " << out_path << "\n";
    return ok ? kExitOk : kExitFailed;
}

int cmd_simulate(const std::string& config_path, const std::string& design_path,
                 const std::string& out_dir, const CommandOverrides& ov, std::ostream& os) {
    ProblemConfig cfg;
    DesignOutputFile design;
    try {
        cfg = load_config(config_path);
        design = load_design_output(design_path, cfg.plant);
    } catch (const std::exception& e) {
        os << "parse error: " << e.what() << "\n";
        return kExitUsage;
    }

    Grid grid(design.grid_N);
    SimTrace trace = simulate_closed_loop(cfg.plant, grid, design.K_xi, design.K_x,
                                          design.L_xi, design.L, cfg.sim,
                                          FeedbackMode::OutputFeedback);

    std::filesystem::create_directories(out_dir);
    std::filesystem::path dir(out_dir);
    write_trace_csv((dir / "trace.csv").string(), trace);
    write_snapshot_csv((dir / "state.csv").string(), trace, cfg.plant.n);
    if (ov.plots)
        write_norm_plot_svg((dir / "norms.svg").string(), trace);

    if (trace.blew_up) {
        os << "simulation blow-up at t = " << trace.blowup_time << "\n";
        return kExitFailed;
    }
    os << "trace written to " << out_dir << " (" << trace.t.size() << " steps, dt = "
       << trace.dt << ")\n";
    return kExitOk;
}

int cmd_verify(const std::string& config_path, const std::string& design_path,
               const CommandOverrides& ov, std::ostream& os) {
    ProblemConfig cfg;
    DesignOutputFile file;
    try {
        cfg = load_config(config_path);
        file = load_design_output(design_path, cfg.plant);
    } catch (const std::exception& e) {
        os << "parse error: " << e.what() << "\n";
        return kExitUsage;
    }

    int N = ov.grid_N.value_or(file.grid_N);
    DesignResult r;
    try {
        r = run_design(cfg, N, file.seed);
    } catch (const DesignStageError& e) {
        os << e.stage << ": failed\n" << e.what() << "\n";
        return kExitFailed;
    }

    CheckList checks{os};
    auto d = [&](const char* key) { return r.diagnostics.at(key); };
    checks.check("controller kernel BC residual", d("ctrl_bc_residual"), 1e-8);
    checks.check("controller diagonal condition", d("ctrl_diag_residual"), 1e-10);
    checks.check("observer kernel BC residual", d("obs_bc_residual"), 1e-8);
    checks.check("observer diagonal condition", d("obs_diag_residual"), 1e-10);
    checks.check("P(1,.) reciprocity residual", d("p1row_residual"), 1e-10);
    checks.check("H1 Volterra residuals", d("hvolp_residual"), 1e-8);
    checks.check("R reciprocity residual", d("reciprocity_residual"), 1e-10);
    checks.check("kernel transform identity", d("kernel_transform_residual"), 1e-8);
    checks.check("Gamma BC at z=0", d("gamma_bc0_residual"), 1e-12);
    checks.check("Gamma BC at z=1", d("gamma_bc1_residual"), 1e-6);
    checks.check("Sigma BC at z=0", d("sigma_bc0_residual"), 1e-6);
    checks.check("Sigma BC at z=1", d("sigma_bc1_residual"), 1e-6);
    checks.check("controller pole assignment", d("ctrl_pole_error"), 1e-8);
    checks.check("observer pole assignment", d("obs_pole_error"), 1e-8);
    checks.check("closed-loop spectrum vs assigned poles", d("fsys_spectrum_error"), 1e-8);

    // Tamper check: the stored gains must match the recomputation.
    if (N == file.grid_N) {
        double gain_diff = (file.K_xi - r.gains.K_xi).cwiseAbs().maxCoeff();
        gain_diff = std::max(gain_diff, (file.K - r.K).cwiseAbs().maxCoeff());
        gain_diff = std::max(gain_diff, (file.L_xi - r.obs_gains.L_xi).cwiseAbs().maxCoeff());
        for (int k = 0; k <= r.grid.N; ++k) {
            gain_diff = std::max(
                gain_diff, (file.K_x.at_node(k) - r.gains.K_x.at_node(k)).cwiseAbs().maxCoeff());
            gain_diff = std::max(
                gain_diff,
                (file.L.at_node(k) - r.obs_gains.L.at_node(k)).cwiseAbs().maxCoeff());
        }
        checks.check("design file matches recomputation", gain_diff, 1e-9);
    } else {
        checks.skip("design file matches recomputation", "grid override active");
    }

    // First-order self-convergence of the interior kernel residuals.
    if (N / 2 >= 16) {
        DesignParams coarse_params = cfg.design;
        Grid fine(N), coarse(N / 2);
        ResidualStats fine_ctrl = controller_pde_residual(r.ctrl.K, cfg.plant, fine);
        ResidualStats fine_obs = observer_pde_residual(r.obs.R_I, cfg.plant, fine);

        coarse_params.grid_N = N / 2;
        ControllerKernel cK = solve_controller_kernel(cfg.plant, coarse_params, coarse);
        ObserverKernel oK = solve_observer_kernel(cfg.plant, coarse_params, coarse);
        ResidualStats coarse_ctrl = controller_pde_residual(cK.K, cfg.plant, coarse);
        ResidualStats coarse_obs = observer_pde_residual(oK.R_I, cfg.plant, coarse);

        checks.check_range("controller PDE residual convergence ratio",
                           coarse_ctrl.median_abs / fine_ctrl.median_abs, 1.5, 2.5);
        checks.check_range("observer PDE residual convergence ratio",
                           coarse_obs.median_abs / fine_obs.median_abs, 1.5, 2.5);
    } else {
        checks.skip("PDE residual self-convergence", "needs two resolutions, N/2 < 16");
    }

    os << (checks.all_ok ? "verification passed\n" : "verification FAILED\n");
    return checks.all_ok ? kExitOk : kExitFailed;
}

} // namespace hypctl
