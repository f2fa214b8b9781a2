#pragma once

#include "hypctl/types.hpp"

#include <functional>

namespace hypctl {

// Volterra integral equation of the second kind,
//   f(z) + integral_0^z k(z, zeta) f(zeta) dzeta = g(z),  z in [0,1].
struct VolterraProblem {
    std::function<double(double, double)> kernel; // evaluable for zeta <= z
    std::function<double(double)> rhs;
    Grid grid;
};

// Nystrom discretization with trapezoid weights; the resulting lower
// triangular system is solved by forward substitution. Throws if a diagonal
// pivot 1 + (h/2) k(z_j, z_j) is within 1e-10 of zero.
std::vector<double> solve_volterra2(const VolterraProblem& prob);

// Successive approximation f_{m+1} = g - integral k f_m starting from f_0 = g,
// stopped when the sup-norm change drops below tol. Kept as an independent
// oracle for the direct solver. Throws on non-convergence.
std::vector<double> picard_iterate(const VolterraProblem& prob, int max_iters = 200,
                                   double tol = 1e-12);

// Matrix-valued variant on the nodes t_k = k h, k = 0..m. The unknown F(t)
// multiplies the kernel from the chosen side:
//   Left:  F(t) + integral_0^t k(t,t') F(t') dt' = G(t)
//   Right: F(t) + integral_0^t F(t') k(t,t') dt' = G(t)
enum class KernelSide { Left, Right };

std::vector<Matrix> solve_volterra2_matrix(const std::function<Matrix(int, int)>& kernel_at,
                                           const std::function<Matrix(int)>& rhs_at, int m,
                                           double h, KernelSide side);

std::vector<Matrix> picard_iterate_matrix(const std::function<Matrix(int, int)>& kernel_at,
                                          const std::function<Matrix(int)>& rhs_at, int m,
                                          double h, KernelSide side, int max_iters = 200,
                                          double tol = 1e-12);

} // namespace hypctl
