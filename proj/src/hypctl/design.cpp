#include "hypctl/design.hpp"

#include "hypctl/pole_placement.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

namespace hypctl {

namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json matrix_to_json(const Matrix& M) {
    ordered_json rows = ordered_json::array();
    for (int i = 0; i < M.rows(); ++i) {
        ordered_json row = ordered_json::array();
        for (int j = 0; j < M.cols(); ++j)
            row.push_back(M(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix matrix_from_json(const ordered_json& j) {
    if (!j.is_array() || j.empty())
        throw std::runtime_error("design file: expected matrix");
    int rows = static_cast<int>(j.size());
    int cols = static_cast<int>(j[0].size());
    Matrix M(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int c = 0; c < cols; ++c)
            M(i, c) = j[i][c].get<double>();
    return M;
}

ordered_json field_to_json(const SpatialMatrixFunction& f) {
    ordered_json nodes = ordered_json::array();
    for (int k = 0; k <= f.grid_cells(); ++k)
        nodes.push_back(matrix_to_json(f.at_node(k)));
    return nodes;
}

SpatialMatrixFunction field_from_json(const ordered_json& j, int rows, int cols) {
    int N = static_cast<int>(j.size()) - 1;
    SpatialMatrixFunction f(Grid(N), rows, cols);
    for (int k = 0; k <= N; ++k)
        f.at_node(k) = matrix_from_json(j[k]);
    return f;
}

std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

DesignResult run_design(const ProblemConfig& cfg, std::optional<int> grid_override,
                        std::optional<uint64_t> seed_override) {
    DesignResult r;
    const PlantSpec& plant = cfg.plant;
    DesignParams params = cfg.design;
    if (grid_override)
        params.grid_N = *grid_override;
    if (seed_override)
        params.seed = *seed_override;
    r.seed = params.seed;
    if (params.grid_N < 16)
        throw DesignStageError("validation", "grid resolution N must be at least 16");
    r.grid = Grid(params.grid_N);

    ValidationReport report = validate_plant(plant, r.grid);
    if (!report.valid())
        throw DesignStageError("validation", report.to_string());
    if (!poles_conjugate_symmetric(params.controller_poles) ||
        !poles_conjugate_symmetric(params.observer_poles))
        throw DesignStageError("validation",
                               "pole sets must be conjugate-symmetric and strictly stable");

    Characteristics chars(plant, r.grid);
    r.times = settling_times(plant, r.grid);

    r.ctrl = solve_controller_kernel(plant, params, r.grid);
    r.diagnostics["ctrl_kernel_iterations"] = r.ctrl.stats.iterations;
    r.diagnostics["ctrl_kernel_final_delta"] = r.ctrl.stats.final_delta;
    r.diagnostics["ctrl_bc_residual"] = controller_bc_residual(r.ctrl.K, plant, r.grid);
    r.diagnostics["ctrl_diag_residual"] = diagonal_condition_residual(r.ctrl.K, plant, r.grid);

    // One recorded seed carries both parameter-matrix draws: the low half
    // seeds the controller placement, the high half the observer placement
    // (zero high half falls back to the low one).
    const uint64_t ctrl_seed = params.seed & 0xffffffffULL;
    uint64_t obs_seed = params.seed >> 32;
    if (obs_seed == 0)
        obs_seed = ctrl_seed;
    try {
        r.K = place_poles(plant.F, plant.B, params.controller_poles, ctrl_seed);
    } catch (const std::exception& e) {
        throw DesignStageError("controller pole placement", e.what());
    }
    r.diagnostics["ctrl_pole_error"] =
        eigenvalue_match_distance(sorted_eigenvalues(plant.F - plant.B * r.K),
                                  params.controller_poles);

    r.ni = solve_NI(plant, r.grid, chars, r.K, r.ctrl.A0, r.ctrl.G);
    r.pi = solve_PI(plant, r.grid, chars, r.ni.M1, r.ctrl.A0, r.ni.M2);
    r.P1 = compute_P1row(r.pi.P_I, plant, r.grid);
    r.diagnostics["p1row_residual"] = p1row_residual(r.P1, r.pi.P_I, plant, r.grid);
    r.diagnostics["hvolp_residual"] = hvolp_residual(r.pi, plant, r.grid, chars);
    r.gains = compute_feedback_gains(r.ctrl.K, r.P1, r.ni.N_I, plant, r.grid);

    r.obs = solve_observer_kernel(plant, params, r.grid);
    r.diagnostics["obs_kernel_iterations"] = r.obs.stats.iterations;
    r.diagnostics["obs_kernel_final_delta"] = r.obs.stats.final_delta;
    r.diagnostics["obs_bc_residual"] = observer_bc_residual(r.obs.R_I, r.obs.S, plant, r.grid);
    r.diagnostics["obs_diag_residual"] = observer_diag_residual(r.obs.R_I, plant, r.grid);

    r.R = compute_R(r.obs.R_I, r.grid);
    r.diagnostics["reciprocity_residual"] = reciprocity_residual(r.R, r.obs.R_I, r.grid);
    r.diagnostics["kernel_transform_residual"] =
        kernel_transform_identity_residual(r.R, r.obs.R_I, r.grid);

    r.G_o = compute_Go(r.R, plant, r.grid);
    r.gamma = solve_Gamma(plant, r.grid, chars, r.G_o, r.obs.S);
    r.diagnostics["gamma_M_condition"] = r.gamma.M_condition;
    r.diagnostics["gamma_bc0_residual"] = gamma_bc0_residual(r.gamma.Gamma, plant);
    r.diagnostics["gamma_bc1_residual"] =
        gamma_bc1_residual(r.gamma.Gamma, r.obs.S, plant, r.grid);

    Matrix Gamma0_top = r.gamma.Gamma.at_node(0).topRows(plant.p);
    r.observability = check_observability(Gamma0_top, plant.F);
    if (!r.observability.observable)
        throw DesignStageError("observability", r.observability.summary());

    try {
        r.obs_gains = compute_observer_gains(r.gamma.Gamma, r.obs.R_I, plant, r.grid,
                                             params.observer_poles, obs_seed);
    } catch (const std::exception& e) {
        throw DesignStageError("observer pole placement", e.what());
    }
    r.diagnostics["obs_pole_error"] = eigenvalue_match_distance(
        sorted_eigenvalues(plant.F - r.obs_gains.L_xi * Gamma0_top), params.observer_poles);

    Matrix Q1t = compute_Q1_tilde(plant, r.grid, r.gains.K_xi, r.gains.K_x,
                                  r.obs_gains.ToInvGamma);
    r.cl = solve_Sigma(plant, r.grid, chars, r.pi.H0, r.K, r.obs_gains.L_xi, Gamma0_top, Q1t);
    r.diagnostics["sigma_M_condition"] = r.cl.M_condition;
    r.diagnostics["sigma_bc0_residual"] = sigma_bc0_residual(r.cl.Sigma, plant);
    r.diagnostics["sigma_bc1_residual"] = sigma_bc1_residual(r.cl.Sigma, Q1t, plant);

    std::vector<Complex> assigned = params.controller_poles;
    assigned.insert(assigned.end(), params.observer_poles.begin(), params.observer_poles.end());
    r.diagnostics["fsys_spectrum_error"] =
        eigenvalue_match_distance(sorted_eigenvalues(r.cl.fsys), assigned);

    r.config_hash = fnv1a_hex(config_to_string(cfg));
    return r;
}

std::string design_output_to_json(const DesignResult& r, const PlantSpec& plant) {
    ordered_json j;
    j["provenance"]["config_hash"] = r.config_hash;
    j["provenance"]["grid_N"] = r.grid.N;
    j["provenance"]["seed"] = r.seed;
    j["provenance"]["t_c"] = r.times.t_c;
    j["provenance"]["t_o"] = r.times.t_o;

    j["gains"]["K"] = matrix_to_json(r.K);
    j["gains"]["K_xi"] = matrix_to_json(r.gains.K_xi);
    j["gains"]["K_x"] = field_to_json(r.gains.K_x);

    j["observer"]["L_xi"] = matrix_to_json(r.obs_gains.L_xi);
    j["observer"]["L"] = field_to_json(r.obs_gains.L);
    j["observer"]["E1T_Gamma0"] = matrix_to_json(r.gamma.Gamma.at_node(0).topRows(plant.p));

    ordered_json eig = ordered_json::array();
    for (const Complex& c : sorted_eigenvalues(r.cl.fsys))
        eig.push_back({c.real(), c.imag()});
    j["reports"]["closed_loop_spectrum"] = eig;
    ordered_json obs_eigs = ordered_json::array();
    for (const Complex& c : r.observability.eigenvalues)
        obs_eigs.push_back({c.real(), c.imag()});
    j["reports"]["plant_ode_spectrum"] = obs_eigs;
    j["reports"]["observability_products"] = r.observability.products;

    for (const auto& [key, value] : r.diagnostics)
        j["diagnostics"][key] = value;
    return j.dump(2) + "\n";
}

void save_design_output(const std::string& path, const DesignResult& result,
                        const PlantSpec& plant) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write design output: " + path);
    out << design_output_to_json(result, plant);
}

DesignOutputFile load_design_output(const std::string& path, const PlantSpec& plant) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open design output: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();

    DesignOutputFile f;
    f.raw_json = buf.str();
    ordered_json j = ordered_json::parse(f.raw_json);
    f.grid_N = j["provenance"]["grid_N"].get<int>();
    f.seed = j["provenance"]["seed"].get<uint64_t>();
    f.config_hash = j["provenance"]["config_hash"].get<std::string>();
    f.K = matrix_from_json(j["gains"]["K"]);
    f.K_xi = matrix_from_json(j["gains"]["K_xi"]);
    f.K_x = field_from_json(j["gains"]["K_x"], plant.p, plant.n);
    f.L_xi = matrix_from_json(j["observer"]["L_xi"]);
    f.L = field_from_json(j["observer"]["L"], plant.n, plant.p);
    f.Gamma0_top = matrix_from_json(j["observer"]["E1T_Gamma0"]);
    if (j.contains("diagnostics"))
        for (auto it = j["diagnostics"].begin(); it != j["diagnostics"].end(); ++it)
            f.diagnostics[it.key()] = it.value().get<double>();
    return f;
}

void write_trace_csv(const std::string& path, const SimTrace& trace) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write trace: " + path);
    out << "t";
    const int nxi = trace.xi.empty() ? 0 : static_cast<int>(trace.xi[0].size());
    const int pu = trace.u.empty() ? 0 : static_cast<int>(trace.u[0].size());
    for (int i = 0; i < nxi; ++i)
        out << ",xi" << i + 1;
    for (int i = 0; i < nxi && !trace.xihat.empty(); ++i)
        out << ",xihat" << i + 1;
    for (int i = 0; i < pu; ++i)
        out << ",u" << i + 1;
    for (int i = 0; i < pu && !trace.y.empty(); ++i)
        out << ",y" << i + 1;
    out << ",eps_xi_norm,xi_norm,sup_x\n";
    for (size_t k = 0; k < trace.t.size(); ++k) {
        out << format_g17(trace.t[k]);
        for (int i = 0; i < nxi; ++i)
            out << ',' << format_g17(trace.xi[k](i));
        if (!trace.xihat.empty())
            for (int i = 0; i < nxi; ++i)
                out << ',' << format_g17(trace.xihat[k](i));
        if (!trace.u.empty())
            for (int i = 0; i < pu; ++i)
                out << ',' << format_g17(trace.u[k](i));
        if (!trace.y.empty() && k < trace.y.size())
            for (int i = 0; i < pu; ++i)
                out << ',' << format_g17(trace.y[k](i));
        out << ',' << format_g17(trace.eps_xi_norm[k]) << ',' << format_g17(trace.xi_norm[k])
            << ',' << format_g17(trace.sup_x[k]) << "\n";
    }
}

void write_snapshot_csv(const std::string& path, const SimTrace& trace, int component_count) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write snapshots: " + path);
    out << "t,z";
    for (int i = 0; i < component_count; ++i)
        out << ",x" << i + 1;
    out << "\n";
    const int N = trace.grid_N;
    for (size_t s = 0; s < trace.snapshot_t.size(); ++s)
        for (int k = 0; k <= N; ++k) {
            out << format_g17(trace.snapshot_t[s]) << ','
                << format_g17(static_cast<double>(k) / N);
            for (int i = 0; i < component_count; ++i)
                out << ',' << format_g17(trace.x_snaps[s](i, k));
            out << "\n";
        }
}

void write_gains_csv(const std::string& path, const SpatialMatrixFunction& K_x,
                     const Grid& grid) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write gains: " + path);
    out << "z";
    for (int i = 0; i < K_x.rows(); ++i)
        for (int j = 0; j < K_x.cols(); ++j)
            out << ",Kx_" << i + 1 << j + 1;
    out << "\n";
    for (int k = 0; k <= grid.N; ++k) {
        out << format_g17(grid.z(k));
        const Matrix& M = K_x.at_node(k);
        for (int i = 0; i < M.rows(); ++i)
            for (int j = 0; j < M.cols(); ++j)
                out << ',' << format_g17(M(i, j));
        out << "\n";
    }
}

void write_observer_csv(const std::string& path, const SpatialMatrixFunction& L,
                        const Grid& grid) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write observer gains: " + path);
    out << "z";
    for (int i = 0; i < L.rows(); ++i)
        for (int j = 0; j < L.cols(); ++j)
            out << ",L_" << i + 1 << j + 1;
    out << "\n";
    for (int k = 0; k <= grid.N; ++k) {
        out << format_g17(grid.z(k));
        const Matrix& M = L.at_node(k);
        for (int i = 0; i < M.rows(); ++i)
            for (int j = 0; j < M.cols(); ++j)
                out << ',' << format_g17(M(i, j));
        out << "\n";
    }
}

void write_norm_plot_svg(const std::string& path, const SimTrace& trace) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write plot: " + path);

    const double W = 880, H = 360, ml = 60, mr = 20, mt = 24, mb = 40;
    double tmax = trace.t.empty() ? 1.0 : trace.t.back();
    double vmax = 1e-12;
    for (size_t k = 0; k < trace.t.size(); ++k)
        vmax = std::max({vmax, trace.eps_xi_norm[k], trace.xi_norm[k], trace.sup_x[k]});

    auto X = [&](double t) { return ml + (W - ml - mr) * (t / tmax); };
    auto Y = [&](double v) { return H - mb - (H - mt - mb) * (v / vmax); };

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
        << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<line x1=\"" << ml << "\" y1=\"" << H - mb << "\" x2=\"" << W - mr << "\" y2=\""
        << H - mb << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << H - mb
        << "\" stroke=\"black\"/>\n";

    auto polyline = [&](const std::vector<double>& series, const char* color) {
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.2\" points=\"";
        for (size_t k = 0; k < trace.t.size(); ++k)
            out << X(trace.t[k]) << ',' << Y(series[k]) << ' ';
        out << "\"/>\n";
    };
    polyline(trace.sup_x, "#888888");
    polyline(trace.xi_norm, "#1f77b4");
    polyline(trace.eps_xi_norm, "#d62728");

    out << "<text x=\"" << ml + 8 << "\" y=\"" << mt + 12
        << "\" font-size=\"12\">gray: sup|x|, blue: |xi|, red: |eps_xi| (max "
        << format_g17(vmax) << ")</text>\n";
    out << "<text x=\"" << (W / 2) << "\" y=\"" << H - 10 << "\" font-size=\"12\">t in [0, "
        << format_g17(tmax) << "]</text>\n";
    out << "</svg>\n";
}

} // namespace hypctl
