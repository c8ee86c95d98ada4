// SPDX-License-Identifier: Apache-2.0
// Compiled with -mavx2 -mfma. Four samples per lane group.
#include <immintrin.h>

#include <cmath>

#include "gaussian_kernel.hpp"

namespace simo::kernels::detail {

void gaussian_avx2(const ModelView& mv, const BatchView& bv, std::size_t begin, std::size_t end, double* logdet,
                   double* loglik)
{
    const int n = mv.n, q = mv.q;
    const std::size_t qq = static_cast<std::size_t>(q) * q;
    const __m256d rho = _mm256_set1_pd(mv.rho);
    const __m256d one = _mm256_set1_pd(1.0);
    const bool want_lik = loglik && mv.d_re;

    __m256d gre[avx2_max_q][avx2_max_q], gim[avx2_max_q][avx2_max_q];
    __m256d lre[avx2_max_q][avx2_max_q], lim[avx2_max_q][avx2_max_q];
    __m256d linv[avx2_max_q];
    __m256d vre[avx2_max_q], vim[avx2_max_q], wre[avx2_max_q], wim[avx2_max_q];
    alignas(32) double lane[4];

    for (std::size_t k = begin; k + 4 <= end; k += 4) {
        for (int p = 0; p < q; ++p)
            for (int r = p; r < q; ++r) gre[p][r] = gim[p][r] = _mm256_setzero_pd();

        for (int t = 0; t < n; ++t) {
            const std::size_t off = static_cast<std::size_t>(t) * bv.stride + k;
            const __m256d xr = _mm256_loadu_pd(bv.re + off);
            const __m256d xi = _mm256_loadu_pd(bv.im + off);
            const __m256d pw = _mm256_fmadd_pd(xr, xr, _mm256_mul_pd(xi, xi));
            const double* cr = mv.c_re + static_cast<std::size_t>(t) * qq;
            const double* ci = mv.c_im + static_cast<std::size_t>(t) * qq;
            for (int p = 0; p < q; ++p) {
                for (int r = p; r < q; ++r) {
                    gre[p][r] = _mm256_fmadd_pd(pw, _mm256_set1_pd(cr[p * q + r]), gre[p][r]);
                    gim[p][r] = _mm256_fmadd_pd(pw, _mm256_set1_pd(ci[p * q + r]), gim[p][r]);
                }
            }
        }

        // Cholesky of S = I + rho G; S(i,j) = rho conj(G(j,i)) below the diagonal.
        __m256d det = one;
        for (int j = 0; j < q; ++j) {
            __m256d d = _mm256_fmadd_pd(rho, gre[j][j], one);
            for (int c = 0; c < j; ++c) {
                d = _mm256_fnmadd_pd(lre[j][c], lre[j][c], d);
                d = _mm256_fnmadd_pd(lim[j][c], lim[j][c], d);
            }
            det = _mm256_mul_pd(det, d);
            linv[j] = _mm256_div_pd(one, _mm256_sqrt_pd(d));
            for (int i = j + 1; i < q; ++i) {
                __m256d sr = _mm256_mul_pd(rho, gre[j][i]);
                __m256d si = _mm256_sub_pd(_mm256_setzero_pd(), _mm256_mul_pd(rho, gim[j][i]));
                for (int c = 0; c < j; ++c) {
                    // L(i,c) * conj(L(j,c))
                    sr = _mm256_fnmadd_pd(lre[i][c], lre[j][c], sr);
                    sr = _mm256_fnmadd_pd(lim[i][c], lim[j][c], sr);
                    si = _mm256_fnmadd_pd(lim[i][c], lre[j][c], si);
                    si = _mm256_fmadd_pd(lre[i][c], lim[j][c], si);
                }
                lre[i][j] = _mm256_mul_pd(sr, linv[j]);
                lim[i][j] = _mm256_mul_pd(si, linv[j]);
            }
        }
        _mm256_store_pd(lane, det);
        double ld[4];
        for (int u = 0; u < 4; ++u) {
            ld[u] = std::log(lane[u]);
            logdet[k + u] = ld[u];
        }
        if (!want_lik) continue;

        __m256d quad = _mm256_set1_pd(mv.y_norm2);
        for (int a = 0; a < mv.m; ++a) {
            for (int p = 0; p < q; ++p) vre[p] = vim[p] = _mm256_setzero_pd();
            for (int t = 0; t < n; ++t) {
                const std::size_t off = static_cast<std::size_t>(t) * bv.stride + k;
                const __m256d xr = _mm256_loadu_pd(bv.re + off);
                const __m256d xi = _mm256_loadu_pd(bv.im + off);
                const double* dr = mv.d_re + (static_cast<std::size_t>(a) * n + t) * q;
                const double* di = mv.d_im + (static_cast<std::size_t>(a) * n + t) * q;
                for (int p = 0; p < q; ++p) {
                    const __m256d br = _mm256_set1_pd(dr[p]);
                    const __m256d bi = _mm256_set1_pd(di[p]);
                    // conj(x) * d
                    vre[p] = _mm256_fmadd_pd(xr, br, vre[p]);
                    vre[p] = _mm256_fmadd_pd(xi, bi, vre[p]);
                    vim[p] = _mm256_fmadd_pd(xr, bi, vim[p]);
                    vim[p] = _mm256_fnmadd_pd(xi, br, vim[p]);
                }
            }
            for (int i = 0; i < q; ++i) {
                __m256d ar = vre[i], ai = vim[i];
                for (int c = 0; c < i; ++c) {
                    ar = _mm256_fnmadd_pd(lre[i][c], wre[c], ar);
                    ar = _mm256_fmadd_pd(lim[i][c], wim[c], ar);
                    ai = _mm256_fnmadd_pd(lre[i][c], wim[c], ai);
                    ai = _mm256_fnmadd_pd(lim[i][c], wre[c], ai);
                }
                wre[i] = _mm256_mul_pd(ar, linv[i]);
                wim[i] = _mm256_mul_pd(ai, linv[i]);
                const __m256d nrm = _mm256_fmadd_pd(wre[i], wre[i], _mm256_mul_pd(wim[i], wim[i]));
                quad = _mm256_fnmadd_pd(rho, nrm, quad);
            }
        }
        _mm256_store_pd(lane, quad);
        for (int u = 0; u < 4; ++u) loglik[k + u] = mv.log_norm - mv.m * ld[u] - lane[u];
    }
}

} // namespace simo::kernels::detail
