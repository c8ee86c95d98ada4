// SPDX-License-Identifier: Apache-2.0
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <numbers>

#include "gaussian_kernel.hpp"
#include "simolab/errors.hpp"
#include "simolab/kernels.hpp"

namespace simo::kernels {

const char* to_string(Backend b) noexcept
{
    switch (b) {
    case Backend::automatic: return "automatic";
    case Backend::scalar: return "scalar";
    case Backend::avx2: return "avx2";
    }
    return "unknown";
}

bool avx2_compiled() noexcept
{
#ifdef SIMOLAB_HAVE_AVX2
    return true;
#else
    return false;
#endif
}

bool avx2_supported() noexcept
{
#ifdef SIMOLAB_HAVE_AVX2
    static const bool ok = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
    return ok;
#else
    return false;
#endif
}

namespace {

Backend initial_backend() noexcept
{
    if (std::getenv("SIMOLAB_FORCE_SCALAR")) return Backend::scalar;
    return avx2_supported() ? Backend::avx2 : Backend::scalar;
}

std::atomic<Backend>& default_slot() noexcept
{
    static std::atomic<Backend> slot{initial_backend()};
    return slot;
}

} // namespace

Backend default_backend() noexcept { return default_slot().load(); }

void set_default_backend(Backend b) noexcept
{
    default_slot().store(b == Backend::automatic ? initial_backend() : b);
}

Backend resolve(Backend requested) noexcept
{
    if (requested == Backend::automatic) requested = default_backend();
    if (requested == Backend::avx2 && !avx2_supported()) return Backend::scalar;
    return requested;
}

SampleBuffer::SampleBuffer(int n, std::size_t capacity)
    : n_(n), cap_(capacity), re_(static_cast<std::size_t>(n) * capacity), im_(static_cast<std::size_t>(n) * capacity)
{
}

void SampleBuffer::set(std::size_t k, const CVector& x)
{
    require(x.size() == n_, ErrorCode::dimension_mismatch, "sample length differs from buffer block length");
    for (int t = 0; t < n_; ++t) set(k, t, x[t]);
}

SampleBatch SampleBuffer::batch(std::size_t count) const
{
    require(count <= cap_, ErrorCode::invalid_argument, "batch exceeds buffer capacity");
    return SampleBatch{n_, count, cap_, re_.data(), im_.data()};
}

GaussianModel::GaussianModel(const CMatrix& a, double rho)
    : n_(static_cast<int>(a.rows())), q_(static_cast<int>(a.cols())), m_(0), rho_(rho)
{
    require(rho >= 0.0 && std::isfinite(rho), ErrorCode::invalid_argument, "rho must be finite and nonnegative");
    require(n_ >= 1 && q_ >= 1, ErrorCode::dimension_mismatch, "empty covariance factor");
    const std::size_t qq = static_cast<std::size_t>(q_) * q_;
    c_re_.resize(static_cast<std::size_t>(n_) * qq);
    c_im_.resize(c_re_.size());
    for (int t = 0; t < n_; ++t)
        for (int p = 0; p < q_; ++p)
            for (int r = 0; r < q_; ++r) {
                const cplx c = std::conj(a(t, p)) * a(t, r);
                const std::size_t i = static_cast<std::size_t>(t) * qq + static_cast<std::size_t>(p) * q_ + r;
                c_re_[i] = c.real();
                c_im_[i] = c.imag();
            }
}

GaussianModel::GaussianModel(const CMatrix& a, double rho, int m, const CVector& y) : GaussianModel(a, rho)
{
    require(m >= 1, ErrorCode::invalid_argument, "M must be positive");
    require(y.size() == static_cast<Eigen::Index>(m) * n_, ErrorCode::dimension_mismatch, "observation length differs from M*N");
    m_ = m;
    has_y_ = true;
    d_re_.resize(static_cast<std::size_t>(m) * n_ * q_);
    d_im_.resize(d_re_.size());
    for (int r = 0; r < m; ++r)
        for (int t = 0; t < n_; ++t)
            for (int p = 0; p < q_; ++p) {
                const cplx d = std::conj(a(t, p)) * y[static_cast<Eigen::Index>(r) * n_ + t];
                const std::size_t i = (static_cast<std::size_t>(r) * n_ + t) * q_ + p;
                d_re_[i] = d.real();
                d_im_[i] = d.imag();
            }
    y_norm2_ = y.squaredNorm();
    log_norm_ = -static_cast<double>(m) * n_ * std::log(std::numbers::pi);
}

void GaussianModel::run(const SampleBatch& b, double* logdet, double* loglik, Backend backend) const
{
    require(b.n == n_, ErrorCode::dimension_mismatch, "batch block length differs from N");
    const detail::ModelView mv{n_,
                               q_,
                               m_,
                               rho_,
                               c_re_.data(),
                               c_im_.data(),
                               has_y_ ? d_re_.data() : nullptr,
                               has_y_ ? d_im_.data() : nullptr,
                               y_norm2_,
                               log_norm_};
    const detail::BatchView bv{b.stride, b.re, b.im};
    std::size_t done = 0;
#ifdef SIMOLAB_HAVE_AVX2
    if (resolve(backend) == Backend::avx2 && q_ <= detail::avx2_max_q) {
        done = b.count / 4 * 4;
        detail::gaussian_avx2(mv, bv, 0, done, logdet, loglik);
    }
#else
    (void)backend;
#endif
    detail::gaussian_scalar(mv, bv, done, b.count, logdet, loglik);
}

void GaussianModel::log_det(const SampleBatch& b, std::span<double> out, Backend backend) const
{
    require(out.size() >= b.count, ErrorCode::dimension_mismatch, "output span too short");
    run(b, out.data(), nullptr, backend);
}

void GaussianModel::log_likelihood(const SampleBatch& b, std::span<double> out, std::span<double> logdet_out,
                                   Backend backend) const
{
    require(has_y_, ErrorCode::invalid_argument, "model has no observation");
    require(out.size() >= b.count, ErrorCode::dimension_mismatch, "output span too short");
    std::vector<double> scratch;
    double* ld = nullptr;
    if (logdet_out.size() >= b.count) {
        ld = logdet_out.data();
    } else {
        scratch.resize(b.count);
        ld = scratch.data();
    }
    run(b, ld, out.data(), backend);
}

double GaussianModel::log_det(const CVector& x) const
{
    SampleBuffer buf(n_, 1);
    buf.set(0, x);
    double out = 0.0;
    log_det(buf.batch(1), {&out, 1}, Backend::scalar);
    return out;
}

double GaussianModel::log_likelihood(const CVector& x) const
{
    SampleBuffer buf(n_, 1);
    buf.set(0, x);
    double out = 0.0;
    log_likelihood(buf.batch(1), {&out, 1}, {}, Backend::scalar);
    return out;
}

} // namespace simo::kernels
