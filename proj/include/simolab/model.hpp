// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>

#include "simolab/rng.hpp"
#include "simolab/types.hpp"

namespace simo {

// Block length N, covariance rank Q, receive antennas M.
struct ChannelConfig {
    int n = 0;
    int q = 0;
    int m = 0;

    static ChannelConfig make(int n, int q, int m);
    void validate() const;

    int mq() const { return m * q; }
    int mn() const { return m * n; }
    friend bool operator==(const ChannelConfig&, const ChannelConfig&) = default;
};

// N x Q factor with unit-norm rows and full column rank.
class CovarianceFactor {
public:
    static constexpr double row_norm_tol = 1e-9;
    static constexpr double rank_tol = 1e-10;

    // Validates the invariants; throws on violation.
    static CovarianceFactor from_matrix(CMatrix a);

    const CMatrix& matrix() const noexcept { return a_; }
    int n() const noexcept { return static_cast<int>(a_.rows()); }
    int q() const noexcept { return static_cast<int>(a_.cols()); }
    // Row t of A as a row vector (b_t transposed).
    auto row(int t) const { return a_.row(t); }

private:
    explicit CovarianceFactor(CMatrix a) : a_(std::move(a)) {}
    CMatrix a_;
};

struct ChannelState {
    CVector s; // M*Q, antenna-major
};

struct TxBlock {
    CVector x; // N
};

struct RxBlock {
    CVector y; // M*N, antenna-major
    double snr = 1.0;
};

CovarianceFactor make_dft_covariance(int n, std::span<const int> keep_cols);
CovarianceFactor make_random_covariance(int n, int q, std::uint64_t seed);

ChannelState sample_channel_state(const ChannelConfig& cfg, std::uint64_t seed);
ChannelState sample_channel_state(const ChannelConfig& cfg, const CounterRng& rng);

TxBlock sample_input_iid_gaussian(int n, std::uint64_t seed);
TxBlock sample_input_iid_gaussian(int n, const CounterRng& rng);

// (I_M kron A) s
CVector expand_channel(const CovarianceFactor& a, const ChannelState& state);

// (I_M kron XA) s, X = diag(x)
CVector noiseless_output(const CovarianceFactor& a, const ChannelState& state, const TxBlock& x);

// sqrt(snr) * noiseless + w
RxBlock channel_apply(const CovarianceFactor& a, const ChannelState& state, const TxBlock& x, double snr,
                      const CVector& noise);
RxBlock channel_apply(const CovarianceFactor& a, const ChannelState& state, const TxBlock& x, double snr,
                      std::uint64_t noise_seed);
RxBlock channel_apply(const CovarianceFactor& a, const ChannelState& state, const TxBlock& x, double snr,
                      const CounterRng& noise_rng);

} // namespace simo
