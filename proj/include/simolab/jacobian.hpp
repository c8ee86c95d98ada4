// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "simolab/model.hpp"
#include "simolab/structure.hpp"

namespace simo {

// Columns are ordered (c_1 .. c_M, x_alpha .. x_{N-1}); rows follow plan.selected.
struct JacobianFactors {
    CMatrix j1;     // diag of the selected x entries
    CMatrix j2;     // P [I kron A | a_alpha .. a_{N-1}], x-free
    CMatrix j3;     // diag(I_MQ, diag(x_D)^-1)
    CMatrix j_full; // P [I kron XA | a_alpha .. a_{N-1}]
};

// Selected rows of (I kron XA) c with x = (x_pilot, x_data).
CVector map_g(const CovarianceFactor& a, const IndexPlan& plan, const CVector& x_pilot, const CVector& c,
              const CVector& x_data);

// a_t = (I_M kron diag(e_t) A) c, t = 0..N-1, each of length M*N.
std::vector<CVector> a_vectors(const CovarianceFactor& a, const CVector& c);

CMatrix j2_matrix(const CovarianceFactor& a, const IndexPlan& plan, const CVector& c);

// Throws singular_input if any entry of x is zero.
JacobianFactors jacobian_factors(const CovarianceFactor& a, const IndexPlan& plan, const TxBlock& x, const CVector& c);

// det J2 is homogeneous in c of this degree (one linear a-column per data time).
int det_j2_homogeneity_degree(const IndexPlan& plan);

struct WitnessSets {
    std::vector<std::vector<int>> k_sets;        // K_i, zero-based times
    std::vector<std::vector<int>> k_complements; // K_i^c, partition of D
    CVector c;                                   // stacked c_i, length M*Q
    int draws_used = 0;
};

inline constexpr int witness_retry_budget = 100;

// c_i lies in the null space of {b_j^T : j in K_i} and is not annihilated by
// any b_j^T with j in K_i^c. Requires Property (A).
WitnessSets witness_sets(const CovarianceFactor& a, const IndexPlan& plan, std::uint64_t seed, double tol = 1e-10);

struct WitnessCheck {
    double lhs;     // |det J2(c)|
    double rhs;     // const_c * prod_i |det A_{B u K_i}|
    double const_c; // prod_i prod_{j in K_i^c} |b_j^T c_i|
};

WitnessCheck verify_witness_factorization(const CovarianceFactor& a, const IndexPlan& plan, const WitnessSets& ws);

struct LogDetCheckpoint {
    std::uint64_t count;
    double mean;
    std::uint64_t zeros; // zero determinants among the first `count` samples
};

struct LogDetSeries {
    std::vector<LogDetCheckpoint> checkpoints; // 1-2-5 spacing from 10, plus the final count
    std::uint64_t zero_count = 0;             // samples with det exactly 0, left out of the means
    double final_mean = 0.0;
};

// Running mean of ln|det J2(s)|, s ~ CN(0, I_MQ). Independent of worker count.
LogDetSeries mc_expected_log_abs_det_j2(const CovarianceFactor& a, const IndexPlan& plan, std::uint64_t trials,
                                        std::uint64_t seed, int workers = 1);

} // namespace simo
