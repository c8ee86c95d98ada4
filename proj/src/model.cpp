// SPDX-License-Identifier: Apache-2.0
#include "simolab/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <string>

#include "simolab/errors.hpp"
#include "simolab/linalg.hpp"

namespace simo {

ChannelConfig ChannelConfig::make(int n, int q, int m)
{
    ChannelConfig c{n, q, m};
    c.validate();
    return c;
}

void ChannelConfig::validate() const
{
    if (n < 2) fail(ErrorCode::invalid_argument, "block length N must be at least 2");
    if (q < 1 || q > n) fail(ErrorCode::invalid_argument, "covariance rank Q must satisfy 1 <= Q <= N");
    if (m < 1) fail(ErrorCode::invalid_argument, "antenna count M must be at least 1");
}

CovarianceFactor CovarianceFactor::from_matrix(CMatrix a)
{
    if (a.rows() < 1 || a.cols() < 1 || a.cols() > a.rows())
        fail(ErrorCode::dimension_mismatch, "covariance factor must be N x Q with 1 <= Q <= N");
    for (Eigen::Index t = 0; t < a.rows(); ++t) {
        if (std::abs(a.row(t).norm() - 1.0) > row_norm_tol)
            fail(ErrorCode::invalid_argument, "row " + std::to_string(t) + " of the covariance factor is not unit-norm");
    }
    if (!has_full_column_rank(a, rank_tol)) fail(ErrorCode::singular_input, "covariance factor is rank deficient");
    return CovarianceFactor(std::move(a));
}

CovarianceFactor make_dft_covariance(int n, std::span<const int> keep_cols)
{
    if (n < 1) fail(ErrorCode::invalid_argument, "n must be positive");
    if (keep_cols.empty()) fail(ErrorCode::invalid_argument, "keep_cols is empty");
    if (static_cast<int>(keep_cols.size()) > n) fail(ErrorCode::invalid_argument, "more columns than n");
    std::set<int> seen;
    for (int c : keep_cols) {
        if (c < 0 || c >= n) fail(ErrorCode::invalid_argument, "column index out of range");
        if (!seen.insert(c).second) fail(ErrorCode::invalid_argument, "duplicate column index");
    }
    const int q = static_cast<int>(keep_cols.size());
    const double scale = 1.0 / std::sqrt(static_cast<double>(q));
    CMatrix a(n, q);
    for (int l = 0; l < n; ++l) {
        for (int k = 0; k < q; ++k) {
            // reduce l*c mod n first so the angle stays exact for large n
            const long long r = (static_cast<long long>(l) * keep_cols[k]) % n;
            const double th = 2.0 * std::numbers::pi * static_cast<double>(r) / n;
            a(l, k) = scale * cplx(std::cos(th), std::sin(th));
        }
    }
    return CovarianceFactor::from_matrix(std::move(a));
}

CovarianceFactor make_random_covariance(int n, int q, std::uint64_t seed)
{
    if (n < 1 || q < 1) fail(ErrorCode::invalid_argument, "n and q must be positive");
    if (q > n) fail(ErrorCode::invalid_argument, "q exceeds n");
    const CounterRng rng = CounterRng(seed).substream("covariance");
    CMatrix a(n, q);
    for (int l = 0; l < n; ++l)
        for (int k = 0; k < q; ++k) a(l, k) = rng.complex_normal(static_cast<std::uint64_t>(l) * q + k);
    for (int l = 0; l < n; ++l) a.row(l) /= a.row(l).norm();
    return CovarianceFactor::from_matrix(std::move(a));
}

ChannelState sample_channel_state(const ChannelConfig& cfg, const CounterRng& rng)
{
    cfg.validate();
    ChannelState st{CVector(cfg.mq())};
    rng.fill_complex_normal(st.s);
    return st;
}

ChannelState sample_channel_state(const ChannelConfig& cfg, std::uint64_t seed)
{
    return sample_channel_state(cfg, CounterRng(seed).substream("channel-state"));
}

TxBlock sample_input_iid_gaussian(int n, const CounterRng& rng)
{
    if (n < 1) fail(ErrorCode::invalid_argument, "n must be positive");
    TxBlock x{CVector(n)};
    rng.fill_complex_normal(x.x);
    return x;
}

TxBlock sample_input_iid_gaussian(int n, std::uint64_t seed)
{
    return sample_input_iid_gaussian(n, CounterRng(seed).substream("input"));
}

namespace {

int antennas_of(const CovarianceFactor& a, const ChannelState& state)
{
    const auto len = state.s.size();
    if (len == 0 || len % a.q() != 0) fail(ErrorCode::dimension_mismatch, "state length is not a multiple of Q");
    return static_cast<int>(len / a.q());
}

} // namespace

CVector expand_channel(const CovarianceFactor& a, const ChannelState& state)
{
    const int m = antennas_of(a, state);
    const int n = a.n(), q = a.q();
    CVector h(static_cast<Eigen::Index>(m) * n);
    for (int r = 0; r < m; ++r) h.segment(r * n, n) = a.matrix() * state.s.segment(r * q, q);
    return h;
}

CVector noiseless_output(const CovarianceFactor& a, const ChannelState& state, const TxBlock& x)
{
    if (x.x.size() != a.n()) fail(ErrorCode::dimension_mismatch, "input block length differs from N");
    const int m = antennas_of(a, state);
    const int n = a.n(), q = a.q();
    CVector y(static_cast<Eigen::Index>(m) * n);
    for (int r = 0; r < m; ++r)
        y.segment(r * n, n) = x.x.cwiseProduct(a.matrix() * state.s.segment(r * q, q));
    return y;
}

RxBlock channel_apply(const CovarianceFactor& a, const ChannelState& state, const TxBlock& x, double snr,
                      const CVector& noise)
{
    if (!(snr > 0.0)) fail(ErrorCode::invalid_argument, "snr must be positive");
    CVector y = noiseless_output(a, state, x);
    if (noise.size() != y.size()) fail(ErrorCode::dimension_mismatch, "noise length differs from M*N");
    y *= std::sqrt(snr);
    y += noise;
    return RxBlock{std::move(y), snr};
}

RxBlock channel_apply(const CovarianceFactor& a, const ChannelState& state, const TxBlock& x, double snr,
                      const CounterRng& noise_rng)
{
    CVector w(static_cast<Eigen::Index>(antennas_of(a, state)) * a.n());
    noise_rng.fill_complex_normal(w);
    return channel_apply(a, state, x, snr, w);
}

RxBlock channel_apply(const CovarianceFactor& a, const ChannelState& state, const TxBlock& x, double snr,
                      std::uint64_t noise_seed)
{
    return channel_apply(a, state, x, snr, CounterRng(noise_seed).substream("noise"));
}

} // namespace simo
