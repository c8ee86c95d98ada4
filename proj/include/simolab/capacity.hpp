// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "simolab/kernels.hpp"
#include "simolab/model.hpp"

namespace simo {

struct MiEstimate {
    double snr_db = 0.0;
    double mi_bits_per_cu = 0.0;
    double std_err = 0.0;
    std::uint64_t outer = 0;
    std::uint64_t inner = 0;
    std::uint64_t seed = 0;
    double median_ess = 0.0; // effective inner sample size, median over outer draws
};

struct SlopeFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    std::pair<double, double> window_db{0.0, 0.0};
};

double db_to_linear(double db);

// Block conditional entropy in bits:
// MN log2(pi e) + M E_x[log2 det(I_Q + rho A^H X^H X A)], x ~ CN(0, I_N).
double cond_entropy_rate_mc(const CovarianceFactor& a, const ChannelConfig& cfg, double snr, std::uint64_t trials,
                            std::uint64_t seed, int workers = 1);

// M(1 - Q/N) log2(rho) + (Q/N) log2(log2(rho)), additive constant taken as 0.
// Requires rho > e.
double upper_bound_rate(const ChannelConfig& cfg, double snr);

// How p(y_j) is estimated for each outer draw.
//  prior:     (1/K) sum_k p(y_j | x_k), x_k ~ CN(0, I_N)
//  posterior: importance sampling from a heavy-tailed proposal built around
//             the draw's own input block, mixed with the prior
enum class InnerSampler { prior, posterior };
const char* to_string(InnerSampler s) noexcept;

struct MiOptions {
    InnerSampler sampler = InnerSampler::posterior;
    double defensive_weight = 0.05;   // share of inner draws taken from the prior
    double density_budget = 1e9;      // max outer * inner density evaluations
    int workers = 1;
    kernels::Backend backend = kernels::Backend::automatic;
};

// (1/N)[h(y) - h(y|x)] in bits per channel use under i.i.d. CN(0,1) inputs.
// The same seed gives the same (x, s, w) draws at every SNR.
MiEstimate mi_rate_mc(const CovarianceFactor& a, const ChannelConfig& cfg, double snr_db, std::uint64_t outer,
                      std::uint64_t inner, std::uint64_t seed, const MiOptions& options = {});

// OLS of mi_bits_per_cu against log2(rho).
SlopeFit prelog_slope_fit(std::span<const MiEstimate> points);

} // namespace simo
