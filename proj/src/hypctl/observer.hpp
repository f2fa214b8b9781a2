#pragma once

#include "hypctl/characteristics.hpp"
#include "hypctl/ctrl_kernel.hpp"
#include "hypctl/kernel_solver.hpp"
#include "hypctl/plant.hpp"
#include "hypctl/spatial_matrix.hpp"

namespace hypctl {

struct ObserverKernel {
    KernelField R_I;         // n x n
    SpatialMatrixFunction S; // p x n, [S1 S2] with S1 strictly upper triangular
    KernelSolveStats stats;
};

// Solves the observer kernel equations by mapping them onto the controller
// form: with xi = 1 - zeta, eta = 1 - z the transposed kernel satisfies the
// controller BVP with speeds lambda(1-.), coupling A^T(1-.), and bottom
// matrix E1 - E2 Q1^T; the solution maps back via R_I(z,zeta) =
// W^T(1-zeta, 1-z). S is read off the z = 1 boundary relation.
ObserverKernel solve_observer_kernel(const PlantSpec& spec, const DesignParams& params,
                                     const Grid& grid);

// Inverse-transformation kernel from the reciprocity relation
// R(z,zeta) - int_zeta^z R(z,zeta') R_I(zeta',zeta) dzeta' = R_I(z,zeta),
// solved per z-line after the substitution t = z - zeta.
KernelField compute_R(const KernelField& R_I, const Grid& grid);

// G_o(z) = C1(z) + int_0^z R(z,zeta) C1(zeta) dzeta - R(z,0) Lambda(0) E2 C2.
SpatialMatrixFunction compute_Go(const KernelField& R, const PlantSpec& spec, const Grid& grid);

struct GammaSolution {
    SpatialMatrixFunction Gamma; // n x n_xi
    double M_condition = 0.0;    // condition number of the initial-value system
};

// Constructive solution of the Gamma BVP: explicit fundamental-matrix rows
// for E2^T Gamma, and a block-triangular linear system for the initial values
// of the E1^T Gamma rows.
GammaSolution solve_Gamma(const PlantSpec& spec, const Grid& grid, const Characteristics& chars,
                          const SpatialMatrixFunction& G_o, const SpatialMatrixFunction& S);

struct ObservabilityReport {
    bool observable = false;
    bool rank_fallback = false;          // defective F, per-eigenvalue rank test used
    std::vector<double> products;        // ||E1^T Gamma(0) v_i|| per eigenvector
    std::vector<Complex> eigenvalues;
    double threshold = 0.0;
    std::string summary() const;
};

// Eigenvector test on (E1^T Gamma(0), F): every independent eigenvector of F
// must map to a nonzero output direction. The threshold is relative,
// 1e-8 * ||E1^T Gamma(0)||_2 * ||v_i||.
ObservabilityReport check_observability(const Matrix& Gamma0_top, const Matrix& F);

struct ObserverGains {
    Matrix L_xi;                      // n_xi x p
    SpatialMatrixFunction L;          // n x p
    SpatialMatrixFunction ToInvGamma; // n x n_xi, Gamma - int R_I Gamma
};

ObserverGains compute_observer_gains(const SpatialMatrixFunction& Gamma, const KernelField& R_I,
                                     const PlantSpec& spec, const Grid& grid,
                                     const std::vector<Complex>& observer_poles, uint64_t seed);

// --- residual diagnostics -------------------------------------------------

// Structural part of (E1^T - Q1 E2^T) R_I(1,.) + S(.) that the solver imposes
// (entries on and below the diagonal of the S1 block), max over nodes b < N.
double observer_bc_residual(const KernelField& R_I, const SpatialMatrixFunction& S,
                            const PlantSpec& spec, const Grid& grid);

// Lambda(z) R_I(z,z) - R_I(z,z) Lambda(z) = A(z) at the diagonal nodes.
double observer_diag_residual(const KernelField& R_I, const PlantSpec& spec, const Grid& grid);

// One-sided FD residual of Lambda(z) dz R_I + dzeta(R_I Lambda(zeta)) + A(z) R_I = 0.
ResidualStats observer_pde_residual(const KernelField& R_I, const PlantSpec& spec,
                                    const Grid& grid);

// Reciprocity substitution residual at the grid nodes.
double reciprocity_residual(const KernelField& R, const KernelField& R_I, const Grid& grid);

// T_o[R_I(.,0)](z) = R(z,0): max violation over nodes.
double kernel_transform_identity_residual(const KernelField& R, const KernelField& R_I,
                                          const Grid& grid);

// Gamma boundary residuals: exact at z=0 (imposed), quadrature-limited at z=1.
double gamma_bc0_residual(const SpatialMatrixFunction& Gamma, const PlantSpec& spec);
double gamma_bc1_residual(const SpatialMatrixFunction& Gamma, const SpatialMatrixFunction& S,
                          const PlantSpec& spec, const Grid& grid);

} // namespace hypctl
