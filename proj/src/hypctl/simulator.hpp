#pragma once

#include "hypctl/plant.hpp"
#include "hypctl/spatial_matrix.hpp"

namespace hypctl {

enum class FeedbackMode {
    OutputFeedback, // u from the observer state (the compensator)
    StateFeedback,  // u from the true state (observer bypassed)
    OpenLoop,       // u = 0
};

struct SimTrace {
    // Per-step series.
    std::vector<double> t;
    std::vector<Vector> xi, xihat;
    std::vector<Vector> u, y;
    std::vector<double> eps_xi_norm; // ||xi - xihat||_2
    std::vector<double> xi_norm;
    std::vector<double> sup_x;       // max_i sup_z |x_i(z,t)|
    std::vector<double> sup_xhat;

    // Decimated state snapshots, n x (N+1) per entry.
    std::vector<double> snapshot_t;
    std::vector<Matrix> x_snaps, xhat_snaps;
    std::vector<int> snapshot_step;

    double dt = 0.0;
    int grid_N = 0;
    bool blew_up = false;
    double blowup_time = 0.0;

    double peak(const std::vector<double>& series) const;
    // Largest series value over t > t0.
    double tail_max(const std::vector<double>& series, double t0) const;
};

// Feedback operator value -K_xi xihat - int_0^1 K_x(z) xhat(z) dz (trapezoid).
Vector evaluate_feedback(const Matrix& xhat, const Vector& xihat, const Matrix& K_xi,
                         const SpatialMatrixFunction& K_x, const Grid& grid);

// Explicit co-simulation of plant and observer: first-order upwind transport
// (direction by the sign of lambda_i), RK4 for the ODEs with inputs frozen
// over the step, shared dt = CFL h / max |lambda|. Boundary conditions are
// applied after each step in the order: outflow x1(0), then the unactuated
// relation at z=0, then the actuated inflow at z=1 with u from the selected
// feedback path. Throws nothing; a blow-up aborts the trace with the flag set.
SimTrace simulate_closed_loop(const PlantSpec& spec, const Grid& grid, const Matrix& K_xi,
                              const SpatialMatrixFunction& K_x, const Matrix& L_xi,
                              const SpatialMatrixFunction& L, const SimConfig& cfg,
                              FeedbackMode mode = FeedbackMode::OutputFeedback);

// Observer error dynamics simulated directly (no controller): state is
// eps = x - xhat with initial profile x0 - xhat0. The xi series carries
// eps_xi; xhat-related series stay empty.
SimTrace simulate_error_system(const PlantSpec& spec, const Grid& grid, const Matrix& L_xi,
                               const SpatialMatrixFunction& L, const SimConfig& cfg);

} // namespace hypctl
