#pragma once

#include "hypctl/kernel_field.hpp"
#include "hypctl/scalar_function.hpp"
#include "hypctl/types.hpp"

namespace hypctl {

// Generic backstepping kernel boundary value problem on the triangle
// 0 <= zeta <= z <= 1. Entrywise the PDE reads
//
//   speed_i(z) dW_ij/dz + speed_j(zeta) dW_ij/dzeta + c_ij W_ij
//     = sum_k W_ik(z,zeta) coupling_kj(zeta)
//
// with c_ij = speed_j'(zeta) (controller form) or speed_i'(z) (observer form
// after the variable swap). Boundary data:
//   * diagonal, i != j:   W_ij(z,z) = coupling_ij(z) / (speed_j(z) - speed_i(z))
//   * bottom, rows i < p: [W(z,0) D]_{ij} = 0 for i <= j < p,
//                         which pins W_ij(z,0) since the top p x p block of D
//                         is diagonal; the strictly lower part of W(z,0) D and
//                         its last m rows are outputs, not constraints
//   * artificial data:    l on z=1 (block ++, i > j), m on zeta=0 (block --,
//                         i >= j), n on z=1 (block --, i < j)
//
// The first p speeds are positive, the rest negative, strictly ordered
// pointwise. Each entry is integrated along its characteristic field
// (speed_i(z), speed_j(zeta)) from the boundary carrying its datum; a
// Gauss-Seidel sweep ordered along the marching direction propagates boundary
// data across the triangle in one pass, and the fixed-point iteration handles
// the integral coupling between entries of a row. Rows are independent
// subproblems and are solved concurrently.
struct KernelProblem {
    int n = 0, p = 0;
    std::vector<ScalarFunction> speed;       // n signed speeds
    std::vector<ScalarFunction> coupling;    // n x n entries, row-major
    Matrix bottom_matrix;                    // D, n x p
    bool zeroth_order_on_z = false;          // false: c = speed_j'(zeta)
    std::vector<ScalarFunction> art_l;       // p x p row-major (i > j used)
    std::vector<ScalarFunction> art_m;       // m x m row-major (i >= j used)
    std::vector<ScalarFunction> art_n;       // m x m row-major (i < j used)
};

struct KernelSolveOptions {
    int grid_N = 200;
    double tol = 1e-10;
    int max_iters = 200;
};

struct KernelSolveStats {
    int iterations = 0;
    double final_delta = 0.0;
    bool converged = false;
};

KernelField solve_kernel_bvp(const KernelProblem& prob, const KernelSolveOptions& opts,
                             KernelSolveStats* stats = nullptr);

} // namespace hypctl
