// SPDX-License-Identifier: Apache-2.0
// Acceptance run: one PASS/FAIL line per criterion, then a rerun digest check.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "simolab/capacity.hpp"
#include "simolab/errors.hpp"
#include "simolab/io.hpp"
#include "simolab/jacobian.hpp"
#include "simolab/recovery.hpp"
#include "simolab/structure.hpp"

using namespace simo;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
    std::string digest; // serialized numeric output, compared across reruns
};

struct Log {
    Outcome o;
    std::ostringstream d;
    void fail(const std::string& why)
    {
        if (o.pass) o.detail = why;
        o.pass = false;
    }
    void num(double v) { d << io::format_double(v) << ';'; }
    void num(std::int64_t v) { d << v << ';'; }
    Outcome done(const std::string& summary)
    {
        if (o.pass) o.detail = summary;
        o.digest = d.str();
        return o;
    }
};

std::string fmt(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

CVector cn(int len, const CounterRng& r)
{
    CVector v(len);
    r.fill_complex_normal(v);
    return v;
}

const std::vector<ChannelConfig> jac_sweep{ChannelConfig::make(2, 1, 2), ChannelConfig::make(3, 2, 2),
                                           ChannelConfig::make(4, 2, 3), ChannelConfig::make(5, 3, 2)};

Outcome c1_prelog()
{
    Log l;
    int count = 0;
    for (int n = 2; n <= 8; ++n)
        for (int q = 1; q <= n; ++q) {
            Rational prev(0);
            for (int m = 1; m <= 6; ++m) {
                const auto rep = prelog(ChannelConfig::make(n, q, m));
                const auto [num, den] = oracle::prelog_fraction(n, q, m);
                l.num(static_cast<std::int64_t>(rep.prelog.numerator()));
                l.num(static_cast<std::int64_t>(rep.prelog.denominator()));
                if (rep.prelog.numerator() != num || rep.prelog.denominator() != den)
                    l.fail("min-formula mismatch at (" + std::to_string(n) + "," + std::to_string(q) + "," + std::to_string(m) + ")");
                if (rep.prelog < prev) l.fail("not monotone in M");
                prev = rep.prelog;
                if (q < n) {
                    const int crit = (n - 1 + (n - q) - 1) / (n - q);
                    if (!rep.critical_m || *rep.critical_m != crit) l.fail("critical antenna count");
                    if ((m >= crit) != (rep.prelog == Rational(n - 1, n))) l.fail("saturation point");
                }
                ++count;
            }
        }
    if (prelog(ChannelConfig::make(3, 2, 1)).prelog != Rational(1, 3)) l.fail("(3,2,1) != 1/3");
    if (prelog(ChannelConfig::make(3, 2, 2)).prelog != Rational(2, 3)) l.fail("(3,2,2) != 2/3");
    return l.done(std::to_string(count) + " configurations exact");
}

Outcome c2_factorization()
{
    Log l;
    double worst_id = 0.0, worst_fd = 0.0;
    for (const auto& cfg : jac_sweep) {
        const auto a = make_random_covariance(cfg.n, cfg.q, 1);
        const auto plan = build_index_plan(cfg);
        const CounterRng rng = CounterRng(2).substream("factorization").substream(static_cast<std::uint64_t>(cfg.n * 100 + cfg.q * 10 + cfg.m));
        const int mq = cfg.mq();
        for (std::uint64_t i = 0; i < 1000; ++i) {
            const CounterRng r = rng.substream(i);
            const CVector c = cn(mq, r.substream("c"));
            const auto x = sample_input_iid_gaussian(cfg.n, r.substream("x"));
            const auto f = jacobian_factors(a, plan, x, c);
            const cplx dj = oracle::det(f.j_full);
            const double err = std::abs(dj - oracle::det(f.j1) * oracle::det(f.j2) * oracle::det(f.j3)) / std::abs(dj);
            worst_id = std::max(worst_id, err);
            l.num(std::log(std::abs(dj)));
            if (i >= 10) continue;
            const CVector xp = x.x.head(plan.alpha), xd = x.x.tail(cfg.n - plan.alpha);
            const double h = 1e-5;
            for (int col = 0; col < plan.size(); ++col)
                for (const cplx step : {cplx(h, 0.0), cplx(0.0, h)}) {
                    CVector cp = c, cm = c, dp = xd, dm = xd;
                    if (col < mq) {
                        cp[col] += step;
                        cm[col] -= step;
                    } else {
                        dp[col - mq] += step;
                        dm[col - mq] -= step;
                    }
                    const CVector fd = (map_g(a, plan, xp, cp, dp) - map_g(a, plan, xp, cm, dm)) / (2.0 * step);
                    worst_fd = std::max(worst_fd, (fd - f.j_full.col(col)).cwiseAbs().maxCoeff());
                }
        }
    }
    l.num(worst_id);
    l.num(worst_fd);
    if (worst_id > 1e-9) l.fail("identity rel err " + fmt(worst_id));
    if (worst_fd > 1e-6) l.fail("finite-difference err " + fmt(worst_fd));
    return l.done("identity " + fmt(worst_id) + ", fd " + fmt(worst_fd));
}

Outcome c3_homogeneity()
{
    Log l;
    double worst = 0.0;
    for (const auto& cfg : jac_sweep) {
        const auto a = make_random_covariance(cfg.n, cfg.q, 1);
        const auto plan = build_index_plan(cfg);
        const int deg = det_j2_homogeneity_degree(plan);
        if (deg != cfg.n - plan.alpha) l.fail("degree");
        const CounterRng rng = CounterRng(3).substream("homogeneity").substream(static_cast<std::uint64_t>(cfg.n * 100 + cfg.q * 10 + cfg.m));
        for (std::uint64_t i = 0; i < 1000; ++i) {
            const CVector c = cn(cfg.mq(), rng.substream(i));
            const cplx base = oracle::det(j2_matrix(a, plan, c));
            for (const cplx lam : {cplx(2.0, 0.0), cplx(0.0, 1.0), cplx(-3.0, 0.0)}) {
                const cplx expect = std::pow(lam, deg) * base;
                const cplx got = oracle::det(j2_matrix(a, plan, (lam * c).eval()));
                worst = std::max(worst, std::abs(got - expect) / std::abs(expect));
            }
        }
    }
    l.num(worst);
    if (worst > 1e-10) l.fail("rel err " + fmt(worst));
    return l.done("max rel err " + fmt(worst));
}

Outcome c4_witness()
{
    Log l;
    double min_lhs = INFINITY, worst = 0.0;
    int cases = 0;
    auto one = [&](const CovarianceFactor& a, const ChannelConfig& cfg, std::uint64_t seed) {
        const auto plan = build_index_plan(cfg);
        const auto ws = witness_sets(a, plan, seed);
        const auto chk = verify_witness_factorization(a, plan, ws);
        const double lhs_oracle = std::abs(oracle::det(j2_matrix(a, plan, ws.c)));
        min_lhs = std::min(min_lhs, chk.lhs);
        worst = std::max({worst, std::abs(chk.lhs - chk.rhs) / chk.lhs, std::abs(lhs_oracle - chk.rhs) / lhs_oracle});
        l.num(chk.lhs);
        l.num(chk.rhs);
        ++cases;
    };
    one(make_dft_covariance(5, std::vector<int>{0, 1}), ChannelConfig::make(5, 2, 2), 1);
    for (const auto& cfg : {ChannelConfig::make(3, 2, 2), ChannelConfig::make(4, 2, 3)}) {
        int made = 0;
        for (std::uint64_t s = 0; made < 100; ++s) {
            const auto a = make_random_covariance(cfg.n, cfg.q, 1000 + s);
            if (!check_property_a(a).holds) continue;
            one(a, cfg, s);
            ++made;
        }
    }
    if (!(min_lhs > 1e-8)) l.fail("|det J2| " + fmt(min_lhs));
    if (worst > 1e-9) l.fail("product identity rel err " + fmt(worst));
    return l.done(std::to_string(cases) + " cases, min |det J2| " + fmt(min_lhs) + ", rel err " + fmt(worst));
}

Outcome c5_property_a()
{
    Log l;
    for (const int q : {2, 3}) {
        std::vector<int> keep(static_cast<std::size_t>(q));
        std::iota(keep.begin(), keep.end(), 0);
        const auto r = check_property_a(make_dft_covariance(5, keep));
        l.num(static_cast<std::int64_t>(r.holds));
        if (!r.holds) l.fail("DFT N=5 Q=" + std::to_string(q) + " fails");
    }
    const auto bad = check_property_a(make_dft_covariance(4, std::vector<int>{0, 2}));
    if (bad.holds || !bad.failing_rows || *bad.failing_rows != std::vector<int>{0, 2})
        l.fail("DFT N=4 keep {0,2} not reported as rows {0,2}");
    else
        l.num(static_cast<std::int64_t>(bad.failing_rows->at(1)));
    int passed = 0;
    for (std::uint64_t s = 0; s < 100; ++s) {
        const auto r = check_property_a(make_random_covariance(6, 3, s));
        passed += r.holds;
        l.num(static_cast<std::int64_t>(r.subsets_checked));
    }
    if (passed != 100) l.fail(std::to_string(100 - passed) + " random matrices fail");
    return l.done("DFT(5) passes, DFT(4,{0,2}) reports rows {0,2}, 100/100 random pass");
}

Outcome c6_recovery()
{
    Log l;
    double worst = 0.0;
    int deficient = 0, total = 0;
    for (const auto& cfg : {ChannelConfig::make(3, 2, 2), ChannelConfig::make(4, 2, 3)}) {
        const auto a = make_random_covariance(cfg.n, cfg.q, 6);
        const auto plan = build_index_plan(cfg);
        const CounterRng rng = CounterRng(6).substream("recovery").substream(static_cast<std::uint64_t>(cfg.n));
        for (std::uint64_t i = 0; i < 1000; ++i) {
            const CounterRng r = rng.substream(i);
            const auto st = sample_channel_state(cfg, r.substream("s"));
            TxBlock x{CVector::Ones(cfg.n)};
            for (int t = plan.alpha; t < cfg.n; ++t) x.x[t] = r.substream("x").complex_normal(static_cast<std::uint64_t>(t));
            const CVector y = noiseless_output(a, st, x);
            ++total;
            try {
                const auto res = recover_noiseless(a, plan, CVector::Ones(plan.alpha), select_rows(plan, y));
                const CVector xd = x.x.tail(cfg.n - plan.alpha);
                const double e = std::max((res.s_hat - st.s).norm() / st.s.norm(), (res.x_data_hat - xd).norm() / xd.norm());
                worst = std::max(worst, e);
                l.num(e);
            } catch (const Error& e) {
                l.fail(std::string("trial failed: ") + e.what());
            }
            Eigen::ColPivHouseholderQR<CMatrix> qr(build_homogeneous_system(a, cfg, y));
            qr.setThreshold(1e-10);
            if (qr.rank() < cfg.mq() + cfg.n) ++deficient;
        }
    }
    if (worst > 1e-8) l.fail("max rel err " + fmt(worst));
    if (deficient != total) l.fail("no-pilot system full rank on " + std::to_string(total - deficient) + " instances");
    return l.done(std::to_string(total) + " round trips, max rel err " + fmt(worst) + ", no-pilot rank-deficient " +
                  std::to_string(deficient) + "/" + std::to_string(total));
}

Outcome c7_cond_entropy()
{
    Log l;
    const auto cfg = ChannelConfig::make(3, 2, 2);
    const auto a = make_random_covariance(3, 2, 7);
    const double h30 = cond_entropy_rate_mc(a, cfg, db_to_linear(30.0), 10000, 7);
    const double h40 = cond_entropy_rate_mc(a, cfg, db_to_linear(40.0), 10000, 7);
    const double slope = (h40 - h30) / (std::log2(db_to_linear(40.0)) - std::log2(db_to_linear(30.0)));
    l.num(h30);
    l.num(h40);
    if (std::abs(slope - cfg.mq()) > 0.1) l.fail("slope " + fmt(slope));
    return l.done("slope " + fmt(slope) + " (MQ = 4)");
}

Outcome c8_logdet()
{
    Log l;
    const auto a = make_random_covariance(3, 2, 8);
    const auto plan = build_index_plan(ChannelConfig::make(3, 2, 2));
    const auto s = mc_expected_log_abs_det_j2(a, plan, 1'000'000, 8);
    double m5 = NAN;
    for (const auto& cp : s.checkpoints) {
        l.num(cp.mean);
        if (cp.count == 100'000) m5 = cp.mean;
    }
    const double gap = std::abs(s.final_mean - m5);
    if (!(gap < 0.05)) l.fail("|mean(1e6) - mean(1e5)| = " + fmt(gap));
    if (s.zero_count != 0) l.fail(std::to_string(s.zero_count) + " zero determinants");
    return l.done("mean " + fmt(s.final_mean) + ", gap " + fmt(gap) + ", zero dets " + std::to_string(s.zero_count));
}

Outcome c9_mi_slope()
{
    Log l;
    const std::vector<double> grid{25.0, 30.0, 35.0, 40.0};
    const std::uint64_t outer = 2000, inner = 10000, seed = 9;
    auto sweep = [&](const ChannelConfig& cfg) {
        const auto a = make_random_covariance(cfg.n, cfg.q, 9);
        std::vector<MiEstimate> pts;
        for (double db : grid) {
            pts.push_back(mi_rate_mc(a, cfg, db, outer, inner, seed));
            l.num(pts.back().mi_bits_per_cu);
            l.num(pts.back().std_err);
        }
        return prelog_slope_fit(pts);
    };
    const auto f1 = sweep(ChannelConfig::make(3, 2, 1));
    const auto f2 = sweep(ChannelConfig::make(3, 2, 2));
    if (std::abs(f1.slope - 1.0 / 3.0) > 0.15) l.fail("(3,2,1) slope " + fmt(f1.slope));
    if (std::abs(f2.slope - 2.0 / 3.0) > 0.15) l.fail("(3,2,2) slope " + fmt(f2.slope));
    if (!(f2.slope - f1.slope >= 0.2)) l.fail("separation " + fmt(f2.slope - f1.slope));

    // inner-sample bias check at the top of the grid
    const auto cfg = ChannelConfig::make(3, 2, 2);
    const auto a = make_random_covariance(3, 2, 9);
    const auto lo = mi_rate_mc(a, cfg, 40.0, outer, inner, seed);
    const auto hi = mi_rate_mc(a, cfg, 40.0, outer, 4 * inner, seed);
    const double bias = lo.mi_bits_per_cu - hi.mi_bits_per_cu;
    l.num(hi.mi_bits_per_cu);
    if (!(std::abs(bias) <= 2.0 * lo.std_err)) l.fail("inner vs 4 inner differ by " + fmt(bias) + " > 2 std_err " + fmt(2.0 * lo.std_err));
    return l.done("slopes " + fmt(f1.slope) + " / " + fmt(f2.slope) + ", separation " + fmt(f2.slope - f1.slope) +
                  ", inner bias " + fmt(bias) + " (2 std_err " + fmt(2.0 * lo.std_err) + ")");
}

struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
};

} // namespace

int main()
{
    const std::vector<Criterion> criteria{
        {1, "pre-log staircase", c1_prelog},
        {2, "Jacobian factorization", c2_factorization},
        {3, "det J2 homogeneity", c3_homogeneity},
        {4, "witness product identity", c4_witness},
        {5, "Property (A) checks", c5_property_a},
        {6, "noise-free blind recovery", c6_recovery},
        {7, "conditional-entropy slope", c7_cond_entropy},
        {8, "log|det J2| finiteness", c8_logdet},
        {9, "mutual-information slope separation", c9_mi_slope},
    };
    int failures = 0;
    std::vector<std::string> digests;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("[%s] %d: %s: %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), secs);
        std::fflush(stdout);
        failures += !o.pass;
        digests.push_back(o.digest);
    }

    const auto t0 = std::chrono::steady_clock::now();
    std::vector<int> differ;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        std::string again;
        try {
            again = criteria[i].run().digest;
        } catch (const std::exception&) {
            again = "exception";
        }
        if (again != digests[i] || again.empty()) differ.push_back(criteria[i].id);
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::string detail = "criteria 1-9 rerun with identical seeds give byte-identical outputs";
    if (!differ.empty()) {
        detail = "outputs differ for criteria";
        for (int id : differ) detail += " " + std::to_string(id);
    }
    std::printf("[%s] 10: determinism: %s (%.2f s)\n", differ.empty() ? "PASS" : "FAIL", detail.c_str(), secs);
    failures += !differ.empty();
    return failures == 0 ? 0 : 1;
}
