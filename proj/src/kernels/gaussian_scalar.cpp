// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <complex>
#include <vector>

#include "gaussian_kernel.hpp"

namespace simo::kernels::detail {

void gaussian_scalar(const ModelView& mv, const BatchView& bv, std::size_t begin, std::size_t end, double* logdet,
                     double* loglik)
{
    using cplx = std::complex<double>;
    const int n = mv.n, q = mv.q;
    const std::size_t qq = static_cast<std::size_t>(q) * q;
    std::vector<cplx> s(qq), l(qq), v(static_cast<std::size_t>(q)), w(static_cast<std::size_t>(q));

    for (std::size_t k = begin; k < end; ++k) {
        for (std::size_t i = 0; i < qq; ++i) s[i] = 0.0;
        for (int t = 0; t < n; ++t) {
            const cplx x(bv.re[static_cast<std::size_t>(t) * bv.stride + k], bv.im[static_cast<std::size_t>(t) * bv.stride + k]);
            const double p = std::norm(x);
            const std::size_t off = static_cast<std::size_t>(t) * qq;
            for (std::size_t i = 0; i < qq; ++i) s[i] += p * cplx(mv.c_re[off + i], mv.c_im[off + i]);
        }
        for (std::size_t i = 0; i < qq; ++i) s[i] *= mv.rho;
        for (int j = 0; j < q; ++j) s[static_cast<std::size_t>(j) * q + j] += 1.0;

        // S = L L^H
        double ld = 0.0;
        for (int j = 0; j < q; ++j) {
            double d = s[static_cast<std::size_t>(j) * q + j].real();
            for (int c = 0; c < j; ++c) d -= std::norm(l[static_cast<std::size_t>(j) * q + c]);
            const double ljj = std::sqrt(d);
            ld += std::log(d);
            l[static_cast<std::size_t>(j) * q + j] = ljj;
            for (int i = j + 1; i < q; ++i) {
                cplx acc = s[static_cast<std::size_t>(i) * q + j];
                for (int c = 0; c < j; ++c)
                    acc -= l[static_cast<std::size_t>(i) * q + c] * std::conj(l[static_cast<std::size_t>(j) * q + c]);
                l[static_cast<std::size_t>(i) * q + j] = acc / ljj;
            }
        }
        logdet[k] = ld;
        if (!loglik || !mv.d_re) continue;

        double quad = mv.y_norm2;
        for (int a = 0; a < mv.m; ++a) {
            for (int p = 0; p < q; ++p) v[static_cast<std::size_t>(p)] = 0.0;
            for (int t = 0; t < n; ++t) {
                const cplx xc(bv.re[static_cast<std::size_t>(t) * bv.stride + k], -bv.im[static_cast<std::size_t>(t) * bv.stride + k]);
                const std::size_t off = (static_cast<std::size_t>(a) * n + t) * q;
                for (int p = 0; p < q; ++p) v[static_cast<std::size_t>(p)] += xc * cplx(mv.d_re[off + p], mv.d_im[off + p]);
            }
            for (int i = 0; i < q; ++i) {
                cplx acc = v[static_cast<std::size_t>(i)];
                for (int c = 0; c < i; ++c) acc -= l[static_cast<std::size_t>(i) * q + c] * w[static_cast<std::size_t>(c)];
                w[static_cast<std::size_t>(i)] = acc / l[static_cast<std::size_t>(i) * q + i].real();
                quad -= mv.rho * std::norm(w[static_cast<std::size_t>(i)]);
            }
        }
        loglik[k] = mv.log_norm - mv.m * ld - quad;
    }
}

} // namespace simo::kernels::detail
