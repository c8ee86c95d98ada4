// SPDX-License-Identifier: Apache-2.0
#pragma once

// Plain views shared by the scalar and AVX2 translation units. Kept free of
// Eigen and standard containers so the AVX2 unit instantiates no inline code
// that could leak into the rest of the program.

#include <cstddef>

namespace simo::kernels::detail {

struct ModelView {
    int n, q, m;
    double rho;
    const double* c_re;
    const double* c_im;
    const double* d_re; // null for Gram-only models
    const double* d_im;
    double y_norm2;
    double log_norm;
};

struct BatchView {
    std::size_t stride;
    const double* re;
    const double* im;
};

inline constexpr int avx2_max_q = 8;

// Samples [begin, end). loglik may be null.
void gaussian_scalar(const ModelView& mv, const BatchView& bv, std::size_t begin, std::size_t end, double* logdet,
                     double* loglik);

// Samples [begin, begin + 4*k); requires q <= avx2_max_q.
void gaussian_avx2(const ModelView& mv, const BatchView& bv, std::size_t begin, std::size_t end, double* logdet,
                   double* loglik);

} // namespace simo::kernels::detail
