#pragma once

#include "hypctl/matrix_exp.hpp"
#include "hypctl/plant.hpp"
#include "hypctl/types.hpp"

namespace hypctl {

// Characteristic time maps phi_i(z) = integral_0^z dzeta / lambda_i(zeta),
// tabulated by cumulative trapezoid on the shared grid; phi_i is strictly
// increasing for i <= p (positive speed) and strictly decreasing otherwise.
class Characteristics {
public:
    Characteristics(const PlantSpec& spec, const Grid& grid);

    int count() const { return static_cast<int>(tables_.size()); }
    const Grid& grid() const { return grid_; }

    // phi_i at arbitrary z in [0,1] (linear between nodes); i is 0-based.
    double phi(int i, double z) const;

    // Inverse of phi_i, defined for i < p on [0, phi_i(1)]. Exact inverse of
    // the piecewise-linear table, found by bisection over cells.
    double phi_inverse(int i, double s) const;

    // sigma_ij(z, zeta) = phi_i^{-1}(phi_i(z) - phi_j(zeta)); requires
    // i <= j < p and phi_j(zeta) <= phi_i(z).
    double sigma(int i, int j, double z, double zeta) const;

    double phi_end(int i) const { return tables_[i].back(); }

private:
    Grid grid_;
    int p_;
    std::vector<std::vector<double>> tables_; // phi_i at grid nodes
};

// exp(M * (phi_i(z) - phi_i(zeta))), the state-transition matrix of
// d/dz Psi = (1/lambda_i) M Psi along the i-th characteristic.
Matrix fundamental_matrix(const Matrix& M, const Characteristics& chars, int i, double z,
                          double zeta);

// Both horizons equal sum_{i=1}^{p+1} |phi_i(1)|.
struct SettlingTimes {
    double t_c = 0.0;
    double t_o = 0.0;
};
SettlingTimes settling_times(const PlantSpec& spec, const Grid& grid);

} // namespace hypctl
