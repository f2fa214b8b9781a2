#pragma once

#include "hypctl/types.hpp"

#include <vector>

namespace hypctl {

// Eigenstructure assignment through a Sylvester equation: draw a parameter
// matrix Gp (seeded, deterministic), solve F X - X P = B Gp with P the real
// block-diagonal form of the requested poles, and set K = Gp X^{-1}. Redraws
// Gp up to five times when X is ill-conditioned. Requires the pole multiset
// to be conjugate-symmetric; throws when the assignment is unattainable.
Matrix place_poles(const Matrix& F, const Matrix& B, const std::vector<Complex>& poles,
                   uint64_t seed = 1);

// Eigenvalues of M sorted by (real, imag).
std::vector<Complex> sorted_eigenvalues(const Matrix& M);

// Greedy matching of two eigenvalue multisets; returns the largest pairing
// distance.
double eigenvalue_match_distance(std::vector<Complex> a, std::vector<Complex> b);

} // namespace hypctl
