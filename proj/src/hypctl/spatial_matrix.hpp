#pragma once

#include "hypctl/types.hpp"

namespace hypctl {

// Matrix-valued function of z in [0,1]: values stored at the grid nodes,
// linear interpolation between them.
class SpatialMatrixFunction {
public:
    SpatialMatrixFunction() = default;

    SpatialMatrixFunction(const Grid& grid, int rows, int cols)
        : N_(grid.N), rows_(rows), cols_(cols),
          values_(grid.nodes(), Matrix::Zero(rows, cols)) {}

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    int grid_cells() const { return N_; }

    Matrix& at_node(int k) { return values_[k]; }
    const Matrix& at_node(int k) const { return values_[k]; }

    Matrix operator()(double z) const {
        double s = z * N_;
        if (s <= 0.0)
            return values_.front();
        if (s >= N_)
            return values_.back();
        int k = static_cast<int>(s);
        double t = s - k;
        return (1.0 - t) * values_[k] + t * values_[k + 1];
    }

    // Trapezoid integral over [0,1].
    Matrix integrate() const {
        Matrix acc = Matrix::Zero(rows_, cols_);
        double h = 1.0 / N_;
        for (int k = 0; k <= N_; ++k)
            acc += h * trapezoid_weight(k, N_) * values_[k];
        return acc;
    }

    double max_abs() const {
        double m = 0.0;
        for (const auto& v : values_)
            m = std::max(m, v.cwiseAbs().maxCoeff());
        return m;
    }

private:
    int N_ = 0;
    int rows_ = 0, cols_ = 0;
    std::vector<Matrix> values_;
};

} // namespace hypctl
