// SPDX-License-Identifier: Apache-2.0
#include "simolab/recovery.hpp"

#include <cmath>
#include <string>

#include "simolab/errors.hpp"
#include "simolab/linalg.hpp"

namespace simo {

namespace {

void check_inputs(const CovarianceFactor& a, const IndexPlan& plan, const CVector& x_pilot)
{
    if (a.n() != plan.cfg.n || a.q() != plan.cfg.q) fail(ErrorCode::dimension_mismatch, "covariance shape differs from plan");
    if (x_pilot.size() != plan.alpha) fail(ErrorCode::dimension_mismatch, "pilot vector length differs from alpha");
    for (Eigen::Index i = 0; i < x_pilot.size(); ++i)
        if (x_pilot[i] == cplx(0.0, 0.0)) fail(ErrorCode::singular_input, "zero pilot entry");
}

LinearSystem build_rows(const CovarianceFactor& a, const IndexPlan& plan, const CVector& x_pilot,
                        const std::vector<int>& positions, const CVector& y)
{
    const int q = plan.cfg.q, mq = plan.cfg.mq();
    const int unknowns = mq + plan.cfg.n - plan.alpha;
    const auto rows = static_cast<Eigen::Index>(positions.size());
    LinearSystem sys{CMatrix::Zero(rows, unknowns), CVector::Zero(rows)};
    for (Eigen::Index k = 0; k < rows; ++k) {
        const int pos = positions[static_cast<std::size_t>(k)];
        const int r = plan.antenna_of(pos), t = plan.time_of(pos);
        sys.matrix.block(k, r * q, 1, q) = a.row(t);
        if (plan.is_pilot_time(t))
            sys.rhs[k] = y[k] / x_pilot[t];
        else
            sys.matrix(k, mq + t - plan.alpha) = -y[k];
    }
    return sys;
}

RecoveryResult solve(const IndexPlan& plan, const LinearSystem& sys, const CVector& y, const RecoveryOptions& opt)
{
    const double y_norm = y.norm();
    if (y_norm == 0.0) fail(ErrorCode::degenerate_system, "observation is identically zero");
    const int mq = plan.cfg.mq();
    for (int t = plan.alpha; t < plan.cfg.n; ++t) {
        if (sys.matrix.col(mq + t - plan.alpha).norm() <= opt.min_symbol * y_norm)
            fail(ErrorCode::near_zero_symbol, "no signal at data time " + std::to_string(t));
    }
    RecoveryResult res;
    res.condition = condition_number(sys.matrix);
    if (!std::isfinite(res.condition) || res.condition >= opt.max_condition)
        fail(ErrorCode::degenerate_system, "system condition number " + std::to_string(res.condition));
    const Eigen::ColPivHouseholderQR<CMatrix> qr(sys.matrix);
    const CVector sol = qr.solve(sys.rhs);
    res.residual = (sys.matrix * sol - sys.rhs).norm();
    res.s_hat = sol.head(mq);
    res.z_data_hat = sol.tail(plan.cfg.n - plan.alpha);
    res.x_data_hat.resize(res.z_data_hat.size());
    for (Eigen::Index i = 0; i < res.z_data_hat.size(); ++i) {
        if (std::abs(res.z_data_hat[i]) < opt.min_symbol)
            fail(ErrorCode::near_zero_symbol, "recovered inverse symbol below threshold at data index " + std::to_string(i));
        res.x_data_hat[i] = 1.0 / res.z_data_hat[i];
    }
    return res;
}

} // namespace

CVector select_rows(const IndexPlan& plan, const CVector& y_full)
{
    if (y_full.size() != plan.cfg.mn()) fail(ErrorCode::dimension_mismatch, "output length differs from M*N");
    CVector out(plan.size());
    for (int k = 0; k < plan.size(); ++k) out[k] = y_full[plan.selected[static_cast<std::size_t>(k)]];
    return out;
}

LinearSystem build_recovery_system(const CovarianceFactor& a, const IndexPlan& plan, const CVector& x_pilot,
                                   const CVector& y_selected)
{
    check_inputs(a, plan, x_pilot);
    if (y_selected.size() != plan.size()) fail(ErrorCode::dimension_mismatch, "selected output length differs from |I|");
    return build_rows(a, plan, x_pilot, plan.selected, y_selected);
}

LinearSystem build_full_recovery_system(const CovarianceFactor& a, const IndexPlan& plan, const CVector& x_pilot,
                                        const CVector& y_full)
{
    check_inputs(a, plan, x_pilot);
    if (y_full.size() != plan.cfg.mn()) fail(ErrorCode::dimension_mismatch, "output length differs from M*N");
    std::vector<int> all(static_cast<std::size_t>(plan.cfg.mn()));
    for (int i = 0; i < plan.cfg.mn(); ++i) all[static_cast<std::size_t>(i)] = i;
    return build_rows(a, plan, x_pilot, all, y_full);
}

CMatrix build_homogeneous_system(const CovarianceFactor& a, const ChannelConfig& cfg, const CVector& y_full)
{
    cfg.validate();
    if (a.n() != cfg.n || a.q() != cfg.q) fail(ErrorCode::dimension_mismatch, "covariance shape differs from config");
    if (y_full.size() != cfg.mn()) fail(ErrorCode::dimension_mismatch, "output length differs from M*N");
    const int n = cfg.n, q = cfg.q, mq = cfg.mq();
    CMatrix h = CMatrix::Zero(cfg.mn(), mq + n);
    for (int r = 0; r < cfg.m; ++r)
        for (int t = 0; t < n; ++t) {
            h.block(r * n + t, r * q, 1, q) = a.row(t);
            h(r * n + t, mq + t) = -y_full[r * n + t];
        }
    return h;
}

RecoveryResult recover_noiseless(const CovarianceFactor& a, const IndexPlan& plan, const CVector& x_pilot,
                                 const CVector& y_selected, const RecoveryOptions& options)
{
    return solve(plan, build_recovery_system(a, plan, x_pilot, y_selected), y_selected, options);
}

RecoveryResult recover_least_squares(const CovarianceFactor& a, const IndexPlan& plan, const CVector& x_pilot,
                                     const CVector& y_full, const RecoveryOptions& options)
{
    return solve(plan, build_full_recovery_system(a, plan, x_pilot, y_full), y_full, options);
}

} // namespace simo
