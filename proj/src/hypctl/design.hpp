#pragma once

#include "hypctl/analysis.hpp"
#include "hypctl/config.hpp"
#include "hypctl/ctrl_kernel.hpp"
#include "hypctl/decoupling.hpp"
#include "hypctl/observer.hpp"

#include <map>
#include <optional>

namespace hypctl {

// Raised when a pipeline stage cannot complete; `stage` names it for the CLI.
struct DesignStageError : std::runtime_error {
    std::string stage;
    DesignStageError(const std::string& stage_, const std::string& msg)
        : std::runtime_error(stage_ + ": " + msg), stage(stage_) {}
};

// Full in-memory result of the compensator design pipeline.
struct DesignResult {
    Grid grid{200};
    SettlingTimes times;

    ControllerKernel ctrl;
    Matrix K;        // ODE feedback gain (p x n_xi acting on xi... n_xi states)
    NIResult ni;
    PISolution pi;
    SpatialMatrixFunction P1;
    FeedbackGains gains;

    ObserverKernel obs;
    KernelField R;
    SpatialMatrixFunction G_o;
    GammaSolution gamma;
    ObservabilityReport observability;
    ObserverGains obs_gains;

    ClosedLoopModel cl;

    std::map<std::string, double> diagnostics;
    uint64_t seed = 1;
    std::string config_hash;

    Matrix Gamma0_top() const { return gamma.Gamma.at_node(0).topRows(obs_gains.L_xi.cols()); }
};

// Runs kernel solve -> decoupling -> gains -> observer design -> closed-loop
// analysis. Throws DesignStageError on validation, placement, or
// observability failures. Overrides replace the config values when set.
DesignResult run_design(const ProblemConfig& cfg, std::optional<int> grid_override = {},
                        std::optional<uint64_t> seed_override = {});

// Serialized design artifact: gains, observer, diagnostics, provenance.
// Reloading and re-exporting reproduces identical bytes.
std::string design_output_to_json(const DesignResult& result, const PlantSpec& plant);
void save_design_output(const std::string& path, const DesignResult& result,
                        const PlantSpec& plant);

// The subset of the design read back from file (enough to simulate and to
// cross-check a recomputed design).
struct DesignOutputFile {
    int grid_N = 0;
    uint64_t seed = 1;
    std::string config_hash;
    Matrix K, K_xi, L_xi, Gamma0_top;
    SpatialMatrixFunction K_x; // p x n over the grid
    SpatialMatrixFunction L;   // n x p over the grid
    std::map<std::string, double> diagnostics;
    std::string raw_json;
};

DesignOutputFile load_design_output(const std::string& path, const PlantSpec& plant);

// CSV / plot exports.
void write_trace_csv(const std::string& path, const SimTrace& trace);
void write_snapshot_csv(const std::string& path, const SimTrace& trace, int component_count);
void write_gains_csv(const std::string& path, const SpatialMatrixFunction& K_x,
                     const Grid& grid);
void write_observer_csv(const std::string& path, const SpatialMatrixFunction& L,
                        const Grid& grid);
void write_norm_plot_svg(const std::string& path, const SimTrace& trace);

} // namespace hypctl
