#pragma once

#include "hypctl/characteristics.hpp"
#include "hypctl/kernel_solver.hpp"
#include "hypctl/plant.hpp"
#include "hypctl/spatial_matrix.hpp"

namespace hypctl {

// State-feedback backstepping kernel K(z,zeta) together with the quantities
// read off from it: the target-system boundary coupling A0(z) = [A1; A2]
// (A1 strictly lower triangular) and the ODE coupling G(z) of the
// transformed plant.
struct ControllerKernel {
    KernelField K;
    SpatialMatrixFunction A0; // n x p
    SpatialMatrixFunction G;  // n x n_xi
    KernelSolveStats stats;
};

// Bottom-boundary matrix Lambda(0) (E1 + E2 Q0) of the controller kernel BVP.
Matrix controller_bottom_matrix(const PlantSpec& spec);

KernelProblem controller_kernel_problem(const PlantSpec& spec, const ArtificialBC& bc);

ControllerKernel solve_controller_kernel(const PlantSpec& spec, const DesignParams& params,
                                         const Grid& grid);

SpatialMatrixFunction extract_A0(const KernelField& K, const PlantSpec& spec, const Grid& grid);

SpatialMatrixFunction compute_G(const KernelField& K, const PlantSpec& spec, const Grid& grid);

// --- residual diagnostics -------------------------------------------------

// Max over bottom nodes z_a, a >= 1, of the imposed relation
// |[E1^T K(z,0) Lambda(0)(E1 + E2 Q0)]_{i<=j}| (the z = 0 corner belongs to
// the diagonal datum and is excluded).
double controller_bc_residual(const KernelField& K, const PlantSpec& spec, const Grid& grid);

// Max violation of the imposed artificial data at their nodes.
double artificial_bc_residual(const KernelField& K, const PlantSpec& spec,
                              const ArtificialBC& bc, const Grid& grid);

// Max over diagonal nodes of |K_ij(z,z)(lambda_j(z)-lambda_i(z)) - A_ij(z)|
// over entries with lambda_i != lambda_j.
double diagonal_condition_residual(const KernelField& K, const PlantSpec& spec, const Grid& grid);

// One-sided finite-difference residual of the kernel PDE at the interior
// nodes (1 <= zeta index < z index < N). The median is the self-convergence
// statistic: the kernels are only piecewise C^1 and the kink neighborhoods
// (an O(sqrt(h)) fraction of the nodes, where the pointwise residual does
// not contract) would dominate the max and skew the mean, while the bulk
// residual behind the median contracts first order.
struct ResidualStats {
    double median_abs = 0.0;
    double mean_abs = 0.0;
    double max_abs = 0.0;
    long count = 0;
};

ResidualStats controller_pde_residual(const KernelField& K, const PlantSpec& spec,
                                      const Grid& grid);

// Max/mean/median over a bag of absolute residual values (consumes it).
ResidualStats finalize_residual_stats(std::vector<double>& values);

} // namespace hypctl
