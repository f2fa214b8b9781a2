#include "hypctl/plant.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>
#include <sstream>

namespace hypctl {

Matrix PlantSpec::E1() const {
    Matrix e = Matrix::Zero(n, p);
    e.topRows(p) = Matrix::Identity(p, p);
    return e;
}

Matrix PlantSpec::E2() const {
    Matrix e = Matrix::Zero(n, m);
    e.bottomRows(m) = Matrix::Identity(m, m);
    return e;
}

Matrix PlantSpec::Lambda(double z) const {
    Matrix L = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i)
        L(i, i) = lambda[i](z);
    return L;
}

std::string ValidationReport::to_string() const {
    if (violations.empty())
        return "plant specification valid\n";
    std::ostringstream os;
    for (const auto& v : violations)
        os << "violation: " << v << "\n";
    return os.str();
}

namespace {

int complex_rank(const Eigen::MatrixXcd& M, double tol_scale = 1e-10) {
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(M);
    const auto& s = svd.singularValues();
    if (s.size() == 0)
        return 0;
    double tol = tol_scale * s(0);
    int r = 0;
    for (int i = 0; i < s.size(); ++i)
        if (s(i) > tol)
            ++r;
    return r;
}

bool hautus(const Matrix& F, const Matrix& B, bool all_modes) {
    const int n = static_cast<int>(F.rows());
    Eigen::EigenSolver<Matrix> es(F);
    for (int i = 0; i < n; ++i) {
        Complex mu = es.eigenvalues()(i);
        if (!all_modes && mu.real() < 0.0)
            continue;
        Eigen::MatrixXcd M(n, n + B.cols());
        M.leftCols(n) = mu * Eigen::MatrixXcd::Identity(n, n) - F.cast<Complex>();
        M.rightCols(B.cols()) = B.cast<Complex>();
        if (complex_rank(M) < n)
            return false;
    }
    return true;
}

} // namespace

bool is_stabilizable(const Matrix& F, const Matrix& B) {
    return hautus(F, B, /*all_modes=*/false);
}

bool is_controllable(const Matrix& F, const Matrix& B) {
    return hautus(F, B, /*all_modes=*/true);
}

bool poles_conjugate_symmetric(const std::vector<Complex>& poles, double tol) {
    std::vector<bool> used(poles.size(), false);
    for (size_t i = 0; i < poles.size(); ++i) {
        if (poles[i].real() >= 0.0)
            return false;
        if (used[i] || std::abs(poles[i].imag()) <= tol)
            continue;
        bool found = false;
        for (size_t j = i + 1; j < poles.size(); ++j) {
            if (!used[j] && std::abs(poles[j] - std::conj(poles[i])) <= tol) {
                used[i] = used[j] = true;
                found = true;
                break;
            }
        }
        if (!found)
            return false;
    }
    return true;
}

ValidationReport validate_plant(const PlantSpec& spec, const Grid& grid) {
    ValidationReport report;
    auto fail = [&](const std::string& msg) { report.violations.push_back(msg); };

    if (spec.n <= 0 || spec.p <= 0 || spec.m <= 0 || spec.n_xi <= 0)
        fail("dimensions must be positive");
    if (spec.p + spec.m != spec.n)
        fail("p + m must equal n");
    if (static_cast<int>(spec.lambda.size()) != spec.n)
        fail("lambda must have n entries");
    if (spec.A.rows() != spec.n || spec.A.cols() != spec.n)
        fail("A must be n x n");
    if (spec.C1.rows() != spec.n || spec.C1.cols() != spec.n_xi)
        fail("C1 must be n x n_xi");
    if (spec.Q0.rows() != spec.m || spec.Q0.cols() != spec.p)
        fail("Q0 must be m x p");
    if (spec.Q1.rows() != spec.p || spec.Q1.cols() != spec.m)
        fail("Q1 must be p x m");
    if (spec.F.rows() != spec.n_xi || spec.F.cols() != spec.n_xi)
        fail("F must be n_xi x n_xi");
    if (spec.B.rows() != spec.n_xi || spec.B.cols() != spec.p)
        fail("B must be n_xi x p");
    if (spec.C2.rows() != spec.m || spec.C2.cols() != spec.n_xi)
        fail("C2 must be m x n_xi");
    if (!report.violations.empty())
        return report; // dimension errors make the value checks meaningless

    // Strict speed ordering and sign split at every node.
    for (int k = 0; k <= grid.N; ++k) {
        double z = grid.z(k);
        for (int i = 0; i < spec.n; ++i) {
            double v = spec.lambda[i](z);
            bool ok = (i < spec.p) ? v > 0.0 : v < 0.0;
            if (!ok) {
                std::ostringstream os;
                os << "lambda_" << i + 1 << "(" << z << ") = " << v << " has wrong sign";
                fail(os.str());
                return report;
            }
        }
        for (int i = 0; i + 1 < spec.n; ++i) {
            if (!(spec.lambda[i](z) > spec.lambda[i + 1](z))) {
                std::ostringstream os;
                os << "speed ordering violated at z = " << z << ": lambda_" << i + 1
                   << " <= lambda_" << i + 2;
                fail(os.str());
                return report;
            }
        }
    }

    for (int i = 0; i < spec.n; ++i) {
        for (int k = 0; k <= grid.N; ++k) {
            if (std::abs(spec.A(i, i)(grid.z(k))) > 0.0) {
                std::ostringstream os;
                os << "A_" << i + 1 << i + 1 << " must vanish identically, nonzero at z = "
                   << grid.z(k);
                fail(os.str());
                break;
            }
        }
    }

    if (!is_stabilizable(spec.F, spec.B))
        fail("(F, B) is not stabilizable (Hautus test failed)");

    return report;
}

} // namespace hypctl
