#pragma once

#include "hypctl/scalar_function.hpp"
#include "hypctl/types.hpp"

#include <string>
#include <vector>

namespace hypctl {

// Function-valued matrix of coefficient entries (row-major storage).
class ScalarMatrix {
public:
    ScalarMatrix() = default;
    ScalarMatrix(int rows, int cols)
        : rows_(rows), cols_(cols), entries_(rows * cols, ScalarFunction::constant(0.0)) {}

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    ScalarFunction& operator()(int i, int j) { return entries_[i * cols_ + j]; }
    const ScalarFunction& operator()(int i, int j) const { return entries_[i * cols_ + j]; }

    Matrix eval(double z) const {
        Matrix out(rows_, cols_);
        for (int i = 0; i < rows_; ++i)
            for (int j = 0; j < cols_; ++j)
                out(i, j) = (*this)(i, j)(z);
        return out;
    }

private:
    int rows_ = 0, cols_ = 0;
    std::vector<ScalarFunction> entries_;
};

// The plant: n transport PDEs coupled in-domain (A), with the ODE state
// entering through C1 in-domain and through C2 at the unactuated boundary,
// and the ODE driven from that boundary.
//
//   d/dt x = Lambda(z) d/dz x + A(z) x + C1(z) xi
//   x2(0) = Q0 x1(0) + C2 xi
//   x1(1) = Q1 x2(1) + u
//   d/dt xi = F xi + B x1(0),   y = x1(0)
//
// The first p speeds are positive, the remaining m = n - p negative.
struct PlantSpec {
    int n = 0, p = 0, m = 0, n_xi = 0;
    std::vector<ScalarFunction> lambda; // n signed transport speeds
    ScalarMatrix A;                     // n x n, zero diagonal
    ScalarMatrix C1;                    // n x n_xi
    Matrix Q0;                          // m x p
    Matrix Q1;                          // p x m
    Matrix F;                           // n_xi x n_xi
    Matrix B;                           // n_xi x p
    Matrix C2;                          // m x n_xi

    Matrix E1() const; // n x p selector [I; 0]
    Matrix E2() const; // n x m selector [0; I]
    Matrix Lambda(double z) const;
};

// Freely choosable boundary data for the kernel equations (all-zero by
// default); indexed over the block-local sub-ranges where each applies.
struct ArtificialBC {
    ScalarMatrix l; // p x p, rows i > j used, functions of zeta at z = 1
    ScalarMatrix m; // m x m, rows i >= j used, functions of z at zeta = 0
    ScalarMatrix n; // m x m, rows i < j used, functions of zeta at z = 1

    ArtificialBC() = default;
    ArtificialBC(int p, int mm) : l(p, p), m(mm, mm), n(mm, mm) {}
};

struct DesignParams {
    std::vector<Complex> controller_poles; // n_xi values, conjugate-closed
    std::vector<Complex> observer_poles;   // n_xi values, conjugate-closed
    ArtificialBC controller_bc;
    ArtificialBC observer_bc; // applied to the swapped observer kernel problem
    int grid_N = 200;
    double kernel_tol = 1e-10;
    int kernel_max_iters = 200;
    uint64_t seed = 1;
};

struct SimConfig {
    double cfl = 0.9;
    double t_final = 6.0;
    std::vector<ScalarFunction> x0;    // n initial profiles
    Vector xi0;                        // n_xi
    std::vector<ScalarFunction> xhat0; // n observer initial profiles
    Vector xihat0;                     // n_xi
    int output_decimation = 5;         // keep every k-th snapshot
};

struct ValidationReport {
    std::vector<std::string> violations;
    bool valid() const { return violations.empty(); }
    std::string to_string() const;
};

// Checks the structural assumptions: dimension consistency, strict speed
// ordering eps_1 > ... > eps_p > 0 > -eps_{p+1} > ... > -eps_n at every
// grid node, zero diagonal of A, and stabilizability of (F, B) via the
// Hautus eigenvector test. Violations are reported, not thrown.
ValidationReport validate_plant(const PlantSpec& spec, const Grid& grid);

// Hautus tests. `mu` ranges over eigenvalues of F with Re >= 0 for
// stabilizability; over all eigenvalues for controllability.
bool is_stabilizable(const Matrix& F, const Matrix& B);
bool is_controllable(const Matrix& F, const Matrix& B);

// Pole multiset sanity: closed under conjugation, strictly negative real parts.
bool poles_conjugate_symmetric(const std::vector<Complex>& poles, double tol = 1e-12);

} // namespace hypctl
