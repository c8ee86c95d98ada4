// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "simolab/types.hpp"

namespace simo {

// Determinant from an LU factorization with partial pivoting. The magnitude is
// kept as a log so large systems do not overflow.
struct Determinant {
    double log_abs = 0.0; // -inf when singular
    cplx phase{1.0, 0.0};
    bool singular = false;

    double abs() const;
    cplx value() const;
};

Determinant lu_determinant(const CMatrix& m);

// sigma_max / sigma_min; +inf for a singular or empty-rank matrix.
double condition_number(const CMatrix& m);

// sigma_min > tol * sigma_max
bool has_full_column_rank(const CMatrix& m, double tol);

} // namespace simo
