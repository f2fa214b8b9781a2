#pragma once

#include "hypctl/types.hpp"

#include <iosfwd>

namespace hypctl {

// Node numbering on the triangle 0 <= zeta <= z <= 1: node (a, b) sits at
// (z, zeta) = (a h, b h) with b <= a.
struct TriGrid {
    int N = 0;

    explicit TriGrid(int cells = 0) : N(cells) {}

    double h() const { return 1.0 / N; }
    int node_count() const { return (N + 1) * (N + 2) / 2; }
    int index(int a, int b) const { return a * (a + 1) / 2 + b; }
};

// Matrix-valued kernel sampled on the triangular grid. Interpolation is
// bilinear inside square cells and barycentric inside the cells cut by the
// diagonal; discontinuity curves are not tracked geometrically, so values
// interpolated across them carry a local first-order error.
class KernelField {
public:
    KernelField() = default;
    KernelField(const TriGrid& grid, int rows, int cols);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    const TriGrid& grid() const { return grid_; }

    double& at(int i, int j, int a, int b) {
        return data_[offset(i, j) + grid_.index(a, b)];
    }
    double at(int i, int j, int a, int b) const {
        return data_[offset(i, j) + grid_.index(a, b)];
    }

    // Entry value at arbitrary (z, zeta) with zeta <= z (small overshoots are
    // clamped onto the triangle).
    double eval(int i, int j, double z, double zeta) const;

    // Value along the grid line z = a h at continuous zeta in [0, a h].
    double eval_on_line(int i, int j, int a, double zeta) const;

    Matrix eval_matrix(double z, double zeta) const;

    double max_abs_diff(const KernelField& other) const;

    // CSV rows: z, zeta, i, j, value (1-based indices).
    void write_csv(std::ostream& os) const;

private:
    size_t offset(int i, int j) const {
        return static_cast<size_t>(i * cols_ + j) * grid_.node_count();
    }

    TriGrid grid_{0};
    int rows_ = 0, cols_ = 0;
    std::vector<double> data_;
};

} // namespace hypctl
