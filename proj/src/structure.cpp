// SPDX-License-Identifier: Apache-2.0
#include "simolab/structure.hpp"

#include <algorithm>
#include <atomic>
#include <limits>
#include <numeric>

#include "simolab/errors.hpp"
#include "simolab/parallel.hpp"
#include "simolab/rng.hpp"

namespace simo {

const char* to_string(Regime r) noexcept
{
    return r == Regime::block_limited ? "block_limited" : "antenna_limited";
}

const char* to_string(SearchOutcome o) noexcept
{
    switch (o) {
    case SearchOutcome::holds: return "holds";
    case SearchOutcome::fails: return "fails";
    case SearchOutcome::not_found_within_budget: return "not_found_within_budget";
    }
    return "unknown";
}

std::string format_rational(const Rational& r)
{
    if (r.denominator() == 1) return std::to_string(r.numerator());
    return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

int critical_antennas(int n, int q)
{
    if (q < 1 || n < 2) fail(ErrorCode::invalid_argument, "invalid (n, q)");
    if (q >= n) fail(ErrorCode::invalid_argument, "critical antenna count requires q < n");
    return (n - 1 + (n - q) - 1) / (n - q);
}

PrelogReport prelog(const ChannelConfig& cfg)
{
    cfg.validate();
    const Rational block_cap(cfg.n - 1, cfg.n);
    const Rational antenna_term = Rational(cfg.m) * Rational(cfg.n - cfg.q, cfg.n);
    PrelogReport rep;
    rep.prelog = std::min(block_cap, antenna_term);
    if (cfg.q < cfg.n) {
        rep.critical_m = critical_antennas(cfg.n, cfg.q);
        rep.regime = cfg.m >= *rep.critical_m ? Regime::block_limited : Regime::antenna_limited;
    }
    return rep;
}

IndexPlan build_index_plan(const ChannelConfig& cfg)
{
    cfg.validate();
    const int n = cfg.n, q = cfg.q, m = cfg.m;
    IndexPlan p;
    p.cfg = cfg;
    p.alpha = std::max(1, m * q + n - m * n);
    p.shortened = (m * n > m * q + n - 1) ? m * (n - q) - (n - 1) : 0;
    for (int t = 0; t < n; ++t) (t < p.alpha ? p.pilot_set : p.data_set).push_back(t);

    // Drops are spread over antennas, earlier antennas taking one more; each
    // antenna then carries the next n-q-drops data times as its own a-columns
    // and keeps the smallest remaining q-alpha data times (the K sets of the
    // witness construction). With L < M this reproduces I_r = [rN, rN+N-1) for
    // r < L. It also stays nonsingular when L >= M, where dropping the last
    // time at every antenna would leave that time unobserved.
    const int drops_base = p.shortened / m, drops_extra = p.shortened % m;
    int next_data = 0;
    for (int r = 0; r < m; ++r) {
        const int drops = drops_base + (r < drops_extra ? 1 : 0);
        const int own = (n - q) - drops;
        std::vector<int> owned(p.data_set.begin() + next_data, p.data_set.begin() + next_data + own);
        next_data += own;
        std::vector<int> others;
        for (int t : p.data_set)
            if (!std::binary_search(owned.begin(), owned.end(), t)) others.push_back(t);
        std::vector<int> kept = p.pilot_set;
        kept.insert(kept.end(), owned.begin(), owned.end());
        kept.insert(kept.end(), others.begin(), others.begin() + (q - p.alpha));
        std::sort(kept.begin(), kept.end());
        std::vector<int> rows;
        for (int t : kept) rows.push_back(r * n + t);
        p.selected.insert(p.selected.end(), rows.begin(), rows.end());
        p.row_sets.push_back(std::move(rows));
        p.kept_times.push_back(std::move(kept));
        p.owned_data.push_back(std::move(owned));
    }
    if (next_data != static_cast<int>(p.data_set.size()) || p.size() != m * q + n - p.alpha)
        fail(ErrorCode::invalid_argument, "index plan bookkeeping failed");
    return p;
}

std::uint64_t binomial(int n, int k) noexcept
{
    if (k < 0 || k > n) return 0;
    k = std::min(k, n - k);
    unsigned __int128 r = 1;
    for (int i = 1; i <= k; ++i) {
        r = r * static_cast<unsigned>(n - k + i) / static_cast<unsigned>(i);
        if (r > std::numeric_limits<std::uint64_t>::max()) return std::numeric_limits<std::uint64_t>::max();
    }
    return static_cast<std::uint64_t>(r);
}

namespace {

bool subset_independent(const CMatrix& a, const std::vector<int>& rows, double tol)
{
    CMatrix s(static_cast<Eigen::Index>(rows.size()), a.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) s.row(static_cast<Eigen::Index>(i)) = a.row(rows[i]);
    const Eigen::JacobiSVD<CMatrix> svd(s);
    const auto& sv = svd.singularValues();
    return sv[sv.size() - 1] > tol * sv[0];
}

// k-subset of {0..n-1} with lexicographic rank `rank`.
std::vector<int> unrank_combination(int n, int k, std::uint64_t rank)
{
    std::vector<int> c;
    c.reserve(static_cast<std::size_t>(k));
    int x = 0;
    for (int i = 0; i < k; ++i) {
        for (;; ++x) {
            const std::uint64_t with_x = binomial(n - x - 1, k - i - 1);
            if (rank < with_x) break;
            rank -= with_x;
        }
        c.push_back(x++);
    }
    return c;
}

bool next_combination(std::vector<int>& c, int n)
{
    const int k = static_cast<int>(c.size());
    int i = k - 1;
    while (i >= 0 && c[static_cast<std::size_t>(i)] == n - k + i) --i;
    if (i < 0) return false;
    ++c[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < k; ++j) c[static_cast<std::size_t>(j)] = c[static_cast<std::size_t>(j - 1)] + 1;
    return true;
}

void check_tol(double tol)
{
    if (!(tol > 0.0 && tol < 1e-3)) fail(ErrorCode::invalid_argument, "tol must lie in (0, 1e-3)");
}

} // namespace

bool rows_satisfy_property_a(const CMatrix& a, const std::vector<int>& rows, double tol)
{
    const int q = static_cast<int>(a.cols());
    const int k = static_cast<int>(rows.size());
    if (k < q) return false;
    std::vector<int> c(static_cast<std::size_t>(q));
    std::iota(c.begin(), c.end(), 0);
    std::vector<int> picked(static_cast<std::size_t>(q));
    do {
        for (int i = 0; i < q; ++i) picked[static_cast<std::size_t>(i)] = rows[static_cast<std::size_t>(c[static_cast<std::size_t>(i)])];
        if (!subset_independent(a, picked, tol)) return false;
    } while (next_combination(c, k));
    return true;
}

PropertyAResult check_property_a(const CMatrix& a, double tol, int workers)
{
    check_tol(tol);
    const int n = static_cast<int>(a.rows()), q = static_cast<int>(a.cols());
    if (n < 1 || q < 1 || q > n) fail(ErrorCode::dimension_mismatch, "matrix must be N x Q with 1 <= Q <= N");
    const std::uint64_t total = binomial(n, q);
    if (total > property_a_subset_limit)
        fail(ErrorCode::too_large, "C(N,Q) = " + std::to_string(total) + " exceeds the subset limit");

    constexpr std::uint64_t none = std::numeric_limits<std::uint64_t>::max();
    std::atomic<std::uint64_t> first_bad{none};
    parallel_for(static_cast<std::size_t>(total), workers, [&](std::size_t b, std::size_t e, int) {
        std::vector<int> c = unrank_combination(n, q, b);
        for (std::uint64_t r = b; r < e; ++r) {
            if (r > first_bad.load(std::memory_order_relaxed)) return;
            if (!subset_independent(a, c, tol)) {
                std::uint64_t cur = first_bad.load();
                while (r < cur && !first_bad.compare_exchange_weak(cur, r)) {}
                return;
            }
            next_combination(c, n);
        }
    });

    PropertyAResult res;
    if (first_bad.load() == none) {
        res.holds = true;
        res.subsets_checked = total;
    } else {
        res.holds = false;
        res.failing_rows = unrank_combination(n, q, first_bad.load());
        res.subsets_checked = first_bad.load() + 1;
    }
    return res;
}

PropertyAResult check_property_a(const CovarianceFactor& a, double tol, int workers)
{
    return check_property_a(a.matrix(), tol, workers);
}

PropertyAPrimeResult check_property_a_prime(const CMatrix& a, const ChannelConfig& cfg, double tol,
                                            std::uint64_t seed, std::uint64_t budget)
{
    check_tol(tol);
    cfg.validate();
    if (cfg.m < 2) fail(ErrorCode::invalid_argument, "Property (A') needs M >= 2");
    if (a.rows() != cfg.n || a.cols() != cfg.q) fail(ErrorCode::dimension_mismatch, "matrix shape differs from (N, Q)");
    const int n = cfg.n;
    const int k = std::min((cfg.mq() - 1 + cfg.m - 2) / (cfg.m - 1), n);

    PropertyAPrimeResult res;
    res.cardinality = k;
    const std::uint64_t total = binomial(n, k);
    if (total <= property_a_prime_exhaustive_limit) {
        res.exhaustive = true;
        std::vector<int> c(static_cast<std::size_t>(k));
        std::iota(c.begin(), c.end(), 0);
        do {
            ++res.sets_tried;
            if (rows_satisfy_property_a(a, c, tol)) {
                res.outcome = SearchOutcome::holds;
                res.witness_set = c;
                return res;
            }
        } while (next_combination(c, n));
        res.outcome = SearchOutcome::fails;
        return res;
    }

    const CounterRng rng = CounterRng(seed).substream("property-a-prime");
    std::vector<int> perm(static_cast<std::size_t>(n));
    for (std::uint64_t trial = 0; trial < budget; ++trial) {
        const CounterRng draw = rng.substream(trial);
        std::iota(perm.begin(), perm.end(), 0);
        for (int i = 0; i < k; ++i) {
            const double u = draw.uniform(static_cast<std::uint64_t>(i));
            const int j = i + std::min(n - i - 1, static_cast<int>(u * (n - i)));
            std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
        }
        std::vector<int> cand(perm.begin(), perm.begin() + k);
        std::sort(cand.begin(), cand.end());
        ++res.sets_tried;
        if (rows_satisfy_property_a(a, cand, tol)) {
            res.outcome = SearchOutcome::holds;
            res.witness_set = std::move(cand);
            return res;
        }
    }
    res.outcome = SearchOutcome::not_found_within_budget;
    return res;
}

} // namespace simo
