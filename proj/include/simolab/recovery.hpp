// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "simolab/model.hpp"
#include "simolab/structure.hpp"

namespace simo {

// Unknowns are (s_1 .. s_M, z_alpha .. z_{N-1}) with z_t = 1/x_t.
struct LinearSystem {
    CMatrix matrix;
    CVector rhs;
};

struct RecoveryOptions {
    double max_condition = 1e12;
    double min_symbol = 1e-12;
};

struct RecoveryResult {
    CVector s_hat;
    CVector x_data_hat;
    CVector z_data_hat;
    double residual = 0.0;
    double condition = 0.0;
};

// Entries of a stacked length-MN output at plan.selected.
CVector select_rows(const IndexPlan& plan, const CVector& y_full);

// Pilot rows: b_t^T s_r = y_k / x_t. Data rows: b_t^T s_r - y_k z_t = 0.
LinearSystem build_recovery_system(const CovarianceFactor& a, const IndexPlan& plan, const CVector& x_pilot,
                                   const CVector& y_selected);

// The same equations on all MN rows.
LinearSystem build_full_recovery_system(const CovarianceFactor& a, const IndexPlan& plan, const CVector& x_pilot,
                                        const CVector& y_full);

// Pilot-free homogeneous system on all MN rows, unknowns (s, z_0 .. z_{N-1}).
// Its null space always contains the true (s, 1/x).
CMatrix build_homogeneous_system(const CovarianceFactor& a, const ChannelConfig& cfg, const CVector& y_full);

// Throws degenerate_system when the condition number reaches
// options.max_condition, near_zero_symbol when a data time carries no signal or
// a recovered |z| falls below options.min_symbol.
RecoveryResult recover_noiseless(const CovarianceFactor& a, const IndexPlan& plan, const CVector& x_pilot,
                                 const CVector& y_selected, const RecoveryOptions& options = {});

// Least squares on all MN rows; for noisy y = sqrt(rho) XAs + w, s_hat estimates sqrt(rho) s.
RecoveryResult recover_least_squares(const CovarianceFactor& a, const IndexPlan& plan, const CVector& x_pilot,
                                     const CVector& y_full, const RecoveryOptions& options = {});

} // namespace simo
