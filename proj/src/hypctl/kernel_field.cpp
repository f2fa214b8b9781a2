#include "hypctl/kernel_field.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace hypctl {

KernelField::KernelField(const TriGrid& grid, int rows, int cols)
    : grid_(grid), rows_(rows), cols_(cols),
      data_(static_cast<size_t>(rows) * cols * grid.node_count(), 0.0) {
    if (grid.N < 1)
        throw std::invalid_argument("KernelField: empty grid");
}

double KernelField::eval(int i, int j, double z, double zeta) const {
    const int N = grid_.N;
    z = std::clamp(z, 0.0, 1.0);
    zeta = std::clamp(zeta, 0.0, z);

    double sz = z * N;
    double sc = zeta * N;
    int a = std::min(N - 1, static_cast<int>(sz));
    int b = std::min(a, static_cast<int>(sc)); // keep the cell inside the triangle
    double u = sz - a;
    double v = sc - b;

    if (a == b) {
        // Diagonal cell: triangle with vertices (a,a), (a+1,a), (a+1,a+1).
        v = std::min(v, u);
        return at(i, j, a, a) * (1.0 - u) + at(i, j, a + 1, a) * (u - v) +
               at(i, j, a + 1, a + 1) * v;
    }
    double f00 = at(i, j, a, b), f10 = at(i, j, a + 1, b);
    double f01 = at(i, j, a, b + 1), f11 = at(i, j, a + 1, b + 1);
    return (1 - u) * ((1 - v) * f00 + v * f01) + u * ((1 - v) * f10 + v * f11);
}

double KernelField::eval_on_line(int i, int j, int a, double zeta) const {
    double sc = std::clamp(zeta, 0.0, a * grid_.h()) * grid_.N;
    int b = std::min(a - 1, static_cast<int>(sc));
    if (a == 0)
        return at(i, j, 0, 0);
    double t = sc - b;
    return at(i, j, a, b) * (1.0 - t) + at(i, j, a, b + 1) * t;
}

Matrix KernelField::eval_matrix(double z, double zeta) const {
    Matrix out(rows_, cols_);
    for (int i = 0; i < rows_; ++i)
        for (int j = 0; j < cols_; ++j)
            out(i, j) = eval(i, j, z, zeta);
    return out;
}

double KernelField::max_abs_diff(const KernelField& other) const {
    if (other.data_.size() != data_.size())
        throw std::invalid_argument("KernelField: shape mismatch");
    double m = 0.0;
    for (size_t k = 0; k < data_.size(); ++k)
        m = std::max(m, std::abs(data_[k] - other.data_[k]));
    return m;
}

void KernelField::write_csv(std::ostream& os) const {
    os << "z,zeta,i,j,value\n";
    char buf[128];
    const double h = grid_.h();
    for (int a = 0; a <= grid_.N; ++a)
        for (int b = 0; b <= a; ++b)
            for (int i = 0; i < rows_; ++i)
                for (int j = 0; j < cols_; ++j) {
                    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%d,%d,%.17g\n", a * h, b * h,
                                  i + 1, j + 1, at(i, j, a, b));
                    os << buf;
                }
}

} // namespace hypctl
