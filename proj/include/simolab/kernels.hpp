// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "simolab/types.hpp"

namespace simo::kernels {

enum class Backend { automatic, scalar, avx2 };
const char* to_string(Backend b) noexcept;

bool avx2_compiled() noexcept;
bool avx2_supported() noexcept; // compiled in and the CPU has AVX2+FMA

// Backend used when `automatic` is requested. Defaults to AVX2 where
// supported; the SIMOLAB_FORCE_SCALAR environment variable or
// set_default_backend(scalar) pins the scalar path.
Backend default_backend() noexcept;
void set_default_backend(Backend b) noexcept;
Backend resolve(Backend requested) noexcept;

// Structure-of-arrays batch of input blocks: entry t of sample k lives at
// re[t * stride + k], im[t * stride + k].
struct SampleBatch {
    int n = 0;
    std::size_t count = 0;
    std::size_t stride = 0;
    const double* re = nullptr;
    const double* im = nullptr;
};

// Owns SoA storage for up to `capacity` blocks of length n.
class SampleBuffer {
public:
    SampleBuffer(int n, std::size_t capacity);
    void set(std::size_t k, const CVector& x);
    void set(std::size_t k, int t, cplx v)
    {
        re_[static_cast<std::size_t>(t) * cap_ + k] = v.real();
        im_[static_cast<std::size_t>(t) * cap_ + k] = v.imag();
    }
    cplx get(std::size_t k, int t) const
    {
        return {re_[static_cast<std::size_t>(t) * cap_ + k], im_[static_cast<std::size_t>(t) * cap_ + k]};
    }
    SampleBatch batch(std::size_t count) const;
    std::size_t capacity() const noexcept { return cap_; }

private:
    int n_;
    std::size_t cap_;
    std::vector<double> re_, im_;
};

// Complex Gaussian model y_m ~ CN(0, I_N + rho X A A^H X^H), m = 1..M,
// evaluated for many x at once through the Q x Q matrix S = I + rho A^H X^H X A.
class GaussianModel {
public:
    // Gram-only model: log det S.
    GaussianModel(const CMatrix& a, double rho);
    // With an observation y (length M*N, antenna-major): also ln p(y | x).
    GaussianModel(const CMatrix& a, double rho, int m, const CVector& y);

    int n() const noexcept { return n_; }
    int q() const noexcept { return q_; }
    int m() const noexcept { return m_; }
    double rho() const noexcept { return rho_; }
    bool has_observation() const noexcept { return has_y_; }

    // Natural-log det(I_Q + rho A^H X^H X A) per sample.
    void log_det(const SampleBatch& b, std::span<double> out, Backend backend = Backend::automatic) const;
    // Natural-log density ln p(y | x) per sample; optionally also log det.
    void log_likelihood(const SampleBatch& b, std::span<double> out, std::span<double> logdet_out = {},
                        Backend backend = Backend::automatic) const;

    double log_det(const CVector& x) const;
    double log_likelihood(const CVector& x) const;

private:
    void run(const SampleBatch& b, double* logdet, double* loglik, Backend backend) const;

    int n_, q_, m_;
    double rho_;
    bool has_y_ = false;
    std::vector<double> c_re_, c_im_; // conj(A_tp) A_tr at (t*Q + p)*Q + r
    std::vector<double> d_re_, d_im_; // conj(A_tp) y_{m,t} at (m*N + t)*Q + p
    double y_norm2_ = 0.0;
    double log_norm_ = 0.0;
};

} // namespace simo::kernels
