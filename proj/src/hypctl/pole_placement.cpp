#include "hypctl/pole_placement.hpp"

#include "hypctl/plant.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hypctl {

namespace {

uint64_t splitmix64(uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double uniform_pm1(uint64_t& state) {
    return 2.0 * (static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53) - 1.0;
}

// Real block-diagonal form of a conjugate-symmetric pole multiset: real
// poles as 1x1 blocks, conjugate pairs (a +- ib) as [[a, b], [-b, a]].
Matrix real_pole_blocks(std::vector<Complex> poles) {
    std::sort(poles.begin(), poles.end(), [](const Complex& x, const Complex& y) {
        if (x.real() != y.real())
            return x.real() < y.real();
        return x.imag() < y.imag();
    });
    const int n = static_cast<int>(poles.size());
    Matrix P = Matrix::Zero(n, n);
    std::vector<bool> used(n, false);
    int pos = 0;
    for (int i = 0; i < n; ++i) {
        if (used[i])
            continue;
        if (std::abs(poles[i].imag()) <= 1e-12) {
            P(pos, pos) = poles[i].real();
            used[i] = true;
            pos += 1;
            continue;
        }
        int mate = -1;
        for (int j = i + 1; j < n; ++j)
            if (!used[j] && std::abs(poles[j] - std::conj(poles[i])) <= 1e-9) {
                mate = j;
                break;
            }
        if (mate < 0)
            throw std::invalid_argument("place_poles: pole set not conjugate-symmetric");
        double a = poles[i].real(), b = std::abs(poles[i].imag());
        P(pos, pos) = a;
        P(pos, pos + 1) = b;
        P(pos + 1, pos) = -b;
        P(pos + 1, pos + 1) = a;
        used[i] = used[mate] = true;
        pos += 2;
    }
    return P;
}

} // namespace

std::vector<Complex> sorted_eigenvalues(const Matrix& M) {
    Eigen::EigenSolver<Matrix> es(M);
    std::vector<Complex> out(es.eigenvalues().data(),
                             es.eigenvalues().data() + es.eigenvalues().size());
    std::sort(out.begin(), out.end(), [](const Complex& x, const Complex& y) {
        if (x.real() != y.real())
            return x.real() < y.real();
        return x.imag() < y.imag();
    });
    return out;
}

double eigenvalue_match_distance(std::vector<Complex> a, std::vector<Complex> b) {
    if (a.size() != b.size())
        return std::numeric_limits<double>::infinity();
    double worst = 0.0;
    std::vector<bool> used(b.size(), false);
    for (const Complex& x : a) {
        double best = std::numeric_limits<double>::infinity();
        int arg = -1;
        for (size_t j = 0; j < b.size(); ++j)
            if (!used[j] && std::abs(x - b[j]) < best) {
                best = std::abs(x - b[j]);
                arg = static_cast<int>(j);
            }
        used[arg] = true;
        worst = std::max(worst, best);
    }
    return worst;
}

Matrix place_poles(const Matrix& F, const Matrix& B, const std::vector<Complex>& poles,
                   uint64_t seed) {
    const int n = static_cast<int>(F.rows());
    const int p = static_cast<int>(B.cols());
    if (static_cast<int>(poles.size()) != n)
        throw std::invalid_argument("place_poles: need exactly one pole per state");
    if (!poles_conjugate_symmetric(poles, 1e-9))
        throw std::invalid_argument(
            "place_poles: poles must be conjugate-symmetric with negative real parts");

    const Matrix P = real_pole_blocks(poles);
    uint64_t rng = seed ^ 0x853c49e6748fea9bULL;

    for (int attempt = 0; attempt < 5; ++attempt) {
        Matrix Gp(p, n);
        for (int i = 0; i < p; ++i)
            for (int j = 0; j < n; ++j)
                Gp(i, j) = uniform_pm1(rng);

        // vec(F X - X P) = (I (x) F - P^T (x) I) vec(X), column-major vec.
        Matrix S = Matrix::Zero(n * n, n * n);
        const Matrix In = Matrix::Identity(n, n);
        for (int c = 0; c < n; ++c) {
            S.block(c * n, c * n, n, n) += F;
            for (int r = 0; r < n; ++r)
                S.block(c * n, r * n, n, n) -= P(r, c) * In;
        }
        Matrix rhs = B * Gp;
        Vector vecX = S.partialPivLu().solve(
            Eigen::Map<const Vector>(rhs.data(), rhs.size()));
        Matrix X = Eigen::Map<Matrix>(vecX.data(), n, n);

        Eigen::JacobiSVD<Matrix> svd(X);
        double smin = svd.singularValues().minCoeff();
        double smax = svd.singularValues().maxCoeff();
        if (smin <= 0.0 || smax / smin > 1e8)
            continue; // ill-conditioned eigenvector matrix, redraw Gp

        Matrix K = X.transpose().partialPivLu().solve(Gp.transpose()).transpose();
        if (eigenvalue_match_distance(sorted_eigenvalues(F - B * K), poles) < 1e-8)
            return K;
    }
    throw std::runtime_error(
        "place_poles: pole set unattainable (check controllability of uncontrollable modes)");
}

} // namespace hypctl
