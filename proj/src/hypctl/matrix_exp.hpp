#pragma once

#include "hypctl/types.hpp"

namespace hypctl {

// Dense matrix exponential via Pade approximation with scaling and squaring
// (Higham 2005 order selection).
Matrix matrix_exponential(const Matrix& A);

} // namespace hypctl
