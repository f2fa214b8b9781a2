#pragma once

#include "hypctl/characteristics.hpp"
#include "hypctl/kernel_field.hpp"
#include "hypctl/plant.hpp"
#include "hypctl/spatial_matrix.hpp"

namespace hypctl {

// Solution of the inverse decoupling equations together with the resulting
// state-feedback gains: the ODE coupling matrix N_I(z) = E1 M1 + E2 M2 with
// imposed initial rows M1(0) = -K, M2(0) = C2 - Q0 K, the kernel P_I
// (nonzero only in its upper-triangular top-left p x p block), the target
// coupling H0 = [H1; H2] with H1 strictly lower triangular, the row P(1,.)
// of the direct kernel, and the gains of the feedback operator.
struct DecouplingSolution {
    Matrix K;                  // p x n_xi ODE feedback, places F - BK
    SpatialMatrixFunction M1;  // p x n_xi
    SpatialMatrixFunction M2;  // m x n_xi
    SpatialMatrixFunction N_I; // n x n_xi
    KernelField P_I;           // n x n
    SpatialMatrixFunction H0;  // n x p
    SpatialMatrixFunction P1;  // n x n, P(1, zeta) over zeta
    Matrix K_xi;               // p x n_xi
    SpatialMatrixFunction K_x; // p x n
};

struct NIResult {
    SpatialMatrixFunction M1, M2, N_I;
};

// Explicit fundamental-matrix solution of the decoupled IVPs for the rows of
// M1 and M2, using Psi_i(z,zeta) = exp((F - BK)(phi_i(z) - phi_i(zeta))).
NIResult solve_NI(const PlantSpec& spec, const Grid& grid, const Characteristics& chars,
                  const Matrix& K, const SpatialMatrixFunction& A0,
                  const SpatialMatrixFunction& G);

struct PISolution {
    KernelField P_I;          // n x n field sampled on the triangle
    SpatialMatrixFunction H0; // n x p

    // Internals kept for verification: boundary trace tables f_ij with
    // p_I,ij(z,zeta) = f_ij(sigma_ij(z,zeta)) / lambda_j(zeta) (zero where
    // phi_j(zeta) > phi_i(z)), and the strictly-lower entries of H1.
    std::vector<std::vector<double>> f;     // p*p row-major, i <= j used
    std::vector<std::vector<double>> h;     // p*p row-major, i > j used
    std::vector<std::vector<double>> h_rhs; // right-hand sides of the h solves

    double eval_PI(int i, int j, double z, double zeta, const Characteristics& chars,
                   const PlantSpec& spec) const;
};

// Line-by-line recursion for the kernel P_I and H0: the last column of the
// boundary trace is [M1 B], inner columns add integrals of already-known
// h-entries, and each strictly-lower H1 entry solves one scalar Volterra
// equation of the second kind (p^2 scalar solves in total).
PISolution solve_PI(const PlantSpec& spec, const Grid& grid, const Characteristics& chars,
                    const SpatialMatrixFunction& M1, const SpatialMatrixFunction& A0,
                    const SpatialMatrixFunction& M2);

// Direct transliteration of the two-input case; used to pin the general
// recursion (p = 2 must reproduce it bit for bit).
PISolution solve_PI_p2(const PlantSpec& spec, const Grid& grid, const Characteristics& chars,
                       const SpatialMatrixFunction& M1, const SpatialMatrixFunction& A0,
                       const SpatialMatrixFunction& M2);

// P(1, zeta) from the reciprocity Volterra equation, solved in reversed
// orientation (substitution zeta -> 1 - zeta reuses the forward solver).
SpatialMatrixFunction compute_P1row(const KernelField& P_I, const PlantSpec& spec,
                                    const Grid& grid);

// Residual of the reversed reciprocity equation at the grid nodes.
double p1row_residual(const SpatialMatrixFunction& P1, const KernelField& P_I,
                      const PlantSpec& spec, const Grid& grid);

// Residuals of the h-entry Volterra equations after substitution.
double hvolp_residual(const PISolution& pi, const PlantSpec& spec, const Grid& grid,
                      const Characteristics& chars);

struct FeedbackGains {
    Matrix K_xi;               // p x n_xi
    SpatialMatrixFunction K_x; // p x n
};

FeedbackGains compute_feedback_gains(const KernelField& K_kernel,
                                     const SpatialMatrixFunction& P1,
                                     const SpatialMatrixFunction& N_I, const PlantSpec& spec,
                                     const Grid& grid);

} // namespace hypctl
