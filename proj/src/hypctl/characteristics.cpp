#include "hypctl/characteristics.hpp"

#include <cmath>
#include <stdexcept>

namespace hypctl {

Characteristics::Characteristics(const PlantSpec& spec, const Grid& grid)
    : grid_(grid), p_(spec.p) {
    tables_.resize(spec.n);
    const double h = grid.h();
    for (int i = 0; i < spec.n; ++i) {
        auto& tab = tables_[i];
        tab.resize(grid.nodes());
        tab[0] = 0.0;
        double prev = 1.0 / spec.lambda[i](0.0);
        for (int k = 1; k <= grid.N; ++k) {
            double cur = 1.0 / spec.lambda[i](grid.z(k));
            tab[k] = tab[k - 1] + 0.5 * h * (prev + cur);
            prev = cur;
        }
    }
}

double Characteristics::phi(int i, double z) const {
    if (i < 0 || i >= count())
        throw std::out_of_range("Characteristics::phi: index out of range");
    if (z < -1e-12 || z > 1.0 + 1e-12)
        throw std::domain_error("Characteristics::phi: z outside [0,1]");
    z = std::min(1.0, std::max(0.0, z));
    double s = z * grid_.N;
    int k = std::min(grid_.N - 1, static_cast<int>(s));
    double t = s - k;
    return tables_[i][k] + t * (tables_[i][k + 1] - tables_[i][k]);
}

double Characteristics::phi_inverse(int i, double s) const {
    if (i < 0 || i >= p_)
        throw std::out_of_range("Characteristics::phi_inverse: needs a positive-speed index");
    const auto& tab = tables_[i];
    const double end = tab.back();
    if (s < -1e-12 || s > end + 1e-12)
        throw std::domain_error("Characteristics::phi_inverse: value outside [0, phi_i(1)]");
    s = std::min(end, std::max(0.0, s));

    // Bisection for the cell containing s, then linear solve inside it.
    int lo = 0, hi = grid_.N;
    while (hi - lo > 1) {
        int mid = (lo + hi) / 2;
        (tab[mid] <= s ? lo : hi) = mid;
    }
    double span = tab[hi] - tab[lo];
    double t = span > 0.0 ? (s - tab[lo]) / span : 0.0;
    return (lo + t) * grid_.h();
}

double Characteristics::sigma(int i, int j, double z, double zeta) const {
    if (!(i <= j && j < p_))
        throw std::out_of_range("Characteristics::sigma: requires i <= j < p");
    double s = phi(i, z) - phi(j, zeta);
    if (s < -1e-12)
        throw std::domain_error("Characteristics::sigma: phi_j(zeta) > phi_i(z)");
    return phi_inverse(i, std::max(0.0, s));
}

Matrix fundamental_matrix(const Matrix& M, const Characteristics& chars, int i, double z,
                          double zeta) {
    if (M.rows() != M.cols())
        throw std::invalid_argument("fundamental_matrix: M must be square");
    return matrix_exponential(M * (chars.phi(i, z) - chars.phi(i, zeta)));
}

SettlingTimes settling_times(const PlantSpec& spec, const Grid& grid) {
    Characteristics chars(spec, grid);
    double sum = 0.0;
    for (int i = 0; i <= spec.p; ++i)
        sum += std::abs(chars.phi_end(i));
    return {sum, sum};
}

} // namespace hypctl
