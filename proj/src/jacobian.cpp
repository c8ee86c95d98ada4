// SPDX-License-Identifier: Apache-2.0
#include "simolab/jacobian.hpp"

#include <algorithm>
#include <cmath>

#include "simolab/errors.hpp"
#include "simolab/linalg.hpp"
#include "simolab/parallel.hpp"
#include "simolab/rng.hpp"

namespace simo {

namespace {

void check_plan(const CovarianceFactor& a, const IndexPlan& plan)
{
    if (a.n() != plan.cfg.n || a.q() != plan.cfg.q) fail(ErrorCode::dimension_mismatch, "covariance shape differs from plan");
}

void check_c(const IndexPlan& plan, const CVector& c)
{
    if (c.size() != plan.cfg.mq()) fail(ErrorCode::dimension_mismatch, "c must have length M*Q");
}

cplx row_times(const CovarianceFactor& a, int t, const CVector& v)
{
    return (a.row(t) * v)(0, 0);
}

} // namespace

CVector map_g(const CovarianceFactor& a, const IndexPlan& plan, const CVector& x_pilot, const CVector& c,
              const CVector& x_data)
{
    check_plan(a, plan);
    check_c(plan, c);
    if (x_pilot.size() != plan.alpha || x_data.size() != plan.cfg.n - plan.alpha)
        fail(ErrorCode::dimension_mismatch, "pilot/data lengths differ from the plan");
    const int q = plan.cfg.q;
    CVector g(plan.size());
    for (int k = 0; k < plan.size(); ++k) {
        const int pos = plan.selected[static_cast<std::size_t>(k)];
        const int r = plan.antenna_of(pos), t = plan.time_of(pos);
        const cplx xt = t < plan.alpha ? x_pilot[t] : x_data[t - plan.alpha];
        g[k] = xt * row_times(a, t, c.segment(r * q, q));
    }
    return g;
}

std::vector<CVector> a_vectors(const CovarianceFactor& a, const CVector& c)
{
    const int n = a.n(), q = a.q();
    if (c.size() == 0 || c.size() % q != 0) fail(ErrorCode::dimension_mismatch, "c length is not a multiple of Q");
    const int m = static_cast<int>(c.size() / q);
    std::vector<CVector> out(static_cast<std::size_t>(n), CVector::Zero(static_cast<Eigen::Index>(m) * n));
    for (int t = 0; t < n; ++t)
        for (int r = 0; r < m; ++r) out[static_cast<std::size_t>(t)][r * n + t] = row_times(a, t, c.segment(r * q, q));
    return out;
}

CMatrix j2_matrix(const CovarianceFactor& a, const IndexPlan& plan, const CVector& c)
{
    check_plan(a, plan);
    check_c(plan, c);
    const int q = plan.cfg.q, mq = plan.cfg.mq();
    const int rows = plan.size();
    CMatrix j = CMatrix::Zero(rows, rows);
    for (int k = 0; k < rows; ++k) {
        const int pos = plan.selected[static_cast<std::size_t>(k)];
        const int r = plan.antenna_of(pos), t = plan.time_of(pos);
        j.block(k, r * q, 1, q) = a.row(t);
        if (!plan.is_pilot_time(t)) j(k, mq + t - plan.alpha) = row_times(a, t, c.segment(r * q, q));
    }
    return j;
}

JacobianFactors jacobian_factors(const CovarianceFactor& a, const IndexPlan& plan, const TxBlock& x, const CVector& c)
{
    check_plan(a, plan);
    check_c(plan, c);
    const int n = plan.cfg.n, q = plan.cfg.q, mq = plan.cfg.mq();
    if (x.x.size() != n) fail(ErrorCode::dimension_mismatch, "x must have length N");
    for (int t = 0; t < n; ++t)
        if (x.x[t] == cplx(0.0, 0.0)) fail(ErrorCode::singular_input, "x has a zero entry at time " + std::to_string(t));

    const int rows = plan.size();
    JacobianFactors f;
    f.j2 = j2_matrix(a, plan, c);
    f.j1 = CMatrix::Zero(rows, rows);
    f.j3 = CMatrix::Identity(rows, rows);
    f.j_full = CMatrix::Zero(rows, rows);
    for (int k = 0; k < rows; ++k) {
        const int pos = plan.selected[static_cast<std::size_t>(k)];
        const int r = plan.antenna_of(pos), t = plan.time_of(pos);
        f.j1(k, k) = x.x[t];
        f.j_full.block(k, r * q, 1, q) = x.x[t] * a.row(t);
        if (!plan.is_pilot_time(t)) f.j_full(k, mq + t - plan.alpha) = row_times(a, t, c.segment(r * q, q));
    }
    for (int t = plan.alpha; t < n; ++t) f.j3(mq + t - plan.alpha, mq + t - plan.alpha) = 1.0 / x.x[t];
    return f;
}

int det_j2_homogeneity_degree(const IndexPlan& plan) { return plan.cfg.n - plan.alpha; }

WitnessSets witness_sets(const CovarianceFactor& a, const IndexPlan& plan, std::uint64_t seed, double tol)
{
    check_plan(a, plan);
    const auto pa = check_property_a(a, tol);
    if (!pa.holds) fail(ErrorCode::property_violation, "covariance factor violates Property (A)");

    const int q = plan.cfg.q, m = plan.cfg.m;
    const CounterRng rng = CounterRng(seed).substream("witness");
    WitnessSets ws;
    ws.c = CVector::Zero(plan.cfg.mq());
    for (int i = 0; i < m; ++i) {
        const auto& owned = plan.owned_data[static_cast<std::size_t>(i)];
        std::vector<int> k_set;
        for (int t : plan.kept_times[static_cast<std::size_t>(i)])
            if (!plan.is_pilot_time(t) && !std::binary_search(owned.begin(), owned.end(), t)) k_set.push_back(t);

        CMatrix basis;
        if (k_set.empty()) {
            basis = CMatrix::Identity(q, q);
        } else {
            CMatrix bk(static_cast<Eigen::Index>(k_set.size()), q);
            for (std::size_t j = 0; j < k_set.size(); ++j) bk.row(static_cast<Eigen::Index>(j)) = a.row(k_set[j]);
            const Eigen::JacobiSVD<CMatrix> svd(bk, Eigen::ComputeFullV);
            const auto rank = static_cast<Eigen::Index>(k_set.size());
            basis = svd.matrixV().rightCols(q - rank);
        }

        bool found = false;
        for (int attempt = 0; attempt < witness_retry_budget && !found; ++attempt) {
            ++ws.draws_used;
            CVector g(basis.cols());
            rng.substream(static_cast<std::uint64_t>(i)).substream(static_cast<std::uint64_t>(attempt)).fill_complex_normal(g);
            CVector ci = basis * g;
            ci /= ci.norm();
            found = std::all_of(owned.begin(), owned.end(), [&](int t) {
                return std::abs(row_times(a, t, ci)) > 1e-10 * a.row(t).norm();
            });
            if (found) ws.c.segment(i * q, q) = ci;
        }
        if (!found) fail(ErrorCode::retry_exhausted, "no witness vector found for antenna " + std::to_string(i));
        ws.k_sets.push_back(std::move(k_set));
        ws.k_complements.push_back(owned);
    }
    return ws;
}

WitnessCheck verify_witness_factorization(const CovarianceFactor& a, const IndexPlan& plan, const WitnessSets& ws)
{
    check_plan(a, plan);
    check_c(plan, ws.c);
    const int q = plan.cfg.q;
    WitnessCheck out{};
    out.lhs = lu_determinant(j2_matrix(a, plan, ws.c)).abs();
    double log_c = 0.0, log_minors = 0.0;
    for (std::size_t i = 0; i < ws.k_sets.size(); ++i) {
        const CVector ci = ws.c.segment(static_cast<Eigen::Index>(i) * q, q);
        for (int t : ws.k_complements[i]) log_c += std::log(std::abs(row_times(a, t, ci)));
        std::vector<int> rows = plan.pilot_set;
        rows.insert(rows.end(), ws.k_sets[i].begin(), ws.k_sets[i].end());
        std::sort(rows.begin(), rows.end());
        CMatrix sub(static_cast<Eigen::Index>(rows.size()), q);
        for (std::size_t j = 0; j < rows.size(); ++j) sub.row(static_cast<Eigen::Index>(j)) = a.row(rows[j]);
        log_minors += lu_determinant(sub).log_abs;
    }
    out.const_c = std::exp(log_c);
    out.rhs = std::exp(log_c + log_minors);
    return out;
}

LogDetSeries mc_expected_log_abs_det_j2(const CovarianceFactor& a, const IndexPlan& plan, std::uint64_t trials,
                                        std::uint64_t seed, int workers)
{
    check_plan(a, plan);
    if (trials < 1000) fail(ErrorCode::invalid_argument, "trials must be at least 1000");
    const CounterRng rng = CounterRng(seed).substream("logdet-j2");
    std::vector<double> vals(static_cast<std::size_t>(trials));
    std::vector<unsigned char> zero(static_cast<std::size_t>(trials), 0);
    parallel_for(vals.size(), workers, [&](std::size_t b, std::size_t e, int) {
        CVector s(plan.cfg.mq());
        for (std::size_t k = b; k < e; ++k) {
            rng.substream(static_cast<std::uint64_t>(k)).fill_complex_normal(s);
            const Determinant d = lu_determinant(j2_matrix(a, plan, s));
            if (d.singular) {
                zero[k] = 1;
                vals[k] = 0.0;
            } else {
                vals[k] = d.log_abs;
            }
        }
    });

    std::vector<std::uint64_t> marks;
    for (std::uint64_t decade = 10; decade <= trials; decade *= 10)
        for (std::uint64_t f : {1, 2, 5})
            if (decade * f <= trials) marks.push_back(decade * f);
    if (marks.empty() || marks.back() != trials) marks.push_back(trials);

    LogDetSeries out;
    std::vector<double> prefix;
    for (std::uint64_t cnt : marks) {
        prefix.clear();
        for (std::uint64_t k = 0; k < cnt; ++k)
            if (!zero[k]) prefix.push_back(vals[k]);
        const double mean = prefix.empty() ? 0.0 : pairwise_sum(prefix) / static_cast<double>(prefix.size());
        out.checkpoints.push_back({cnt, mean, cnt - prefix.size()});
    }
    out.zero_count = static_cast<std::uint64_t>(std::count(zero.begin(), zero.end(), 1));
    out.final_mean = out.checkpoints.back().mean;
    return out;
}

} // namespace simo
