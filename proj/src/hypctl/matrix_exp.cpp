#include "hypctl/matrix_exp.hpp"

#include <Eigen/LU>
#include <cmath>

namespace hypctl {

namespace {

// Pade approximant of order (m, m): returns (V - U)^{-1} (V + U).
Matrix pade(const Matrix& A, const double* b, int m) {
    const auto n = A.rows();
    const Matrix I = Matrix::Identity(n, n);
    const Matrix A2 = A * A;

    Matrix U = b[1] * I;
    Matrix V = b[0] * I;
    Matrix P = I; // A^(2k)
    for (int k = 1; 2 * k <= m; ++k) {
        P = P * A2;
        U += b[2 * k + 1] * P;
        V += b[2 * k] * P;
    }
    U = A * U;
    return (V - U).partialPivLu().solve(V + U);
}

// Pade-13 with the A2/A4/A6 factorization.
Matrix pade13(const Matrix& A) {
    static const double b[] = {
        64764752532480000.0, 32382376266240000.0, 7771770303897600.0, 1187353796428800.0,
        129060195264000.0,   10559470521600.0,    670442572800.0,     33522128640.0,
        1323241920.0,        40840800.0,          960960.0,           16380.0,
        182.0,               1.0};
    const auto n = A.rows();
    const Matrix I = Matrix::Identity(n, n);
    const Matrix A2 = A * A;
    const Matrix A4 = A2 * A2;
    const Matrix A6 = A2 * A4;
    Matrix U = A * (A6 * (b[13] * A6 + b[11] * A4 + b[9] * A2) + b[7] * A6 + b[5] * A4 +
                    b[3] * A2 + b[1] * I);
    Matrix V = A6 * (b[12] * A6 + b[10] * A4 + b[8] * A2) + b[6] * A6 + b[4] * A4 + b[2] * A2 +
               b[0] * I;
    return (V - U).partialPivLu().solve(V + U);
}

} // namespace

Matrix matrix_exponential(const Matrix& A) {
    static const double b3[] = {120.0, 60.0, 12.0, 1.0};
    static const double b5[] = {30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0};
    static const double b7[] = {17297280.0, 8648640.0, 1995840.0, 277200.0,
                                25200.0,    1512.0,    56.0,      1.0};
    static const double b9[] = {17643225600.0, 8821612800.0, 2075673600.0, 302702400.0,
                                30270240.0,    2162160.0,    110880.0,     3960.0,
                                90.0,          1.0};

    const double norm = A.cwiseAbs().colwise().sum().maxCoeff(); // 1-norm
    if (norm < 1.495585217958292e-2)
        return pade(A, b3, 3);
    if (norm < 2.539398330063230e-1)
        return pade(A, b5, 5);
    if (norm < 9.504178996162932e-1)
        return pade(A, b7, 7);
    if (norm < 2.097847961257068e0)
        return pade(A, b9, 9);

    const double theta13 = 5.371920351148152;
    int squarings = 0;
    Matrix As = A;
    if (norm > theta13) {
        squarings = static_cast<int>(std::ceil(std::log2(norm / theta13)));
        As /= std::ldexp(1.0, squarings);
    }
    Matrix E = pade13(As);
    for (int k = 0; k < squarings; ++k)
        E = E * E;
    return E;
}

} // namespace hypctl
