// SPDX-License-Identifier: Apache-2.0
#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

#include "oracles.hpp"
#include "simolab/errors.hpp"
#include "simolab/jacobian.hpp"
#include "simolab/linalg.hpp"
#include "simolab/recovery.hpp"

using namespace simo;

namespace {

CovarianceFactor all_ones_column()
{
    CMatrix a(2, 1);
    a << 1.0, 1.0;
    return CovarianceFactor::from_matrix(a);
}

CVector cn(int len, const CounterRng& r)
{
    CVector v(len);
    r.fill_complex_normal(v);
    return v;
}

std::vector<ChannelConfig> sweep()
{
    std::vector<ChannelConfig> out;
    for (int n = 2; n <= 6; ++n)
        for (int q = 1; q < n; ++q)
            for (int m = 1; m <= 3; ++m) out.push_back(ChannelConfig::make(n, q, m));
    return out;
}

} // namespace

TEST_CASE("map g hand expansion for N=2, Q=1, M=2")
{
    const auto a = all_ones_column();
    const auto plan = build_index_plan(ChannelConfig::make(2, 1, 2));
    REQUIRE(plan.selected == std::vector<int>{0, 2, 3});
    const cplx x1(0.3, 1.1), x2(-2.0, 0.5), s1(1.5, -0.2), s2(0.1, 0.9);
    const CVector g = map_g(a, plan, CVector::Constant(1, x1), (CVector(2) << s1, s2).finished(), CVector::Constant(1, x2));
    CHECK(std::abs(g[0] - x1 * s1) < 1e-15);
    CHECK(std::abs(g[1] - x1 * s2) < 1e-15);
    CHECK(std::abs(g[2] - x2 * s2) < 1e-15);

    CHECK(map_g(a, plan, CVector::Constant(1, x1), CVector::Zero(2), CVector::Constant(1, x2)).norm() == 0.0);

    const auto av = a_vectors(a, (CVector(2) << s1, s2).finished());
    REQUIRE(av.size() == 2);
    CHECK(av[1] == (CVector(4) << 0.0, s1, 0.0, s2).finished());
    for (const auto& v : a_vectors(a, CVector::Zero(2))) CHECK(v.norm() == 0.0);

    // det J = x1^2 s2; det J1 = x1^2 x2; det J2 = s2; det J3 = 1/x2
    const auto f = jacobian_factors(a, plan, TxBlock{(CVector(2) << x1, x2).finished()}, (CVector(2) << s1, s2).finished());
    CHECK(std::abs(oracle::det(f.j_full) - x1 * x1 * s2) < 1e-13);
    CHECK(std::abs(oracle::det(f.j1) - x1 * x1 * x2) < 1e-13);
    CHECK(std::abs(oracle::det(f.j2) - s2) < 1e-13);
    CHECK(std::abs(oracle::det(f.j3) - 1.0 / x2) < 1e-13);
}

TEST_CASE("map g equals the selected rows of the noiseless output")
{
    for (const auto& cfg : {ChannelConfig::make(3, 2, 2), ChannelConfig::make(4, 2, 3), ChannelConfig::make(5, 3, 2)}) {
        const auto a = make_random_covariance(cfg.n, cfg.q, 5);
        const auto plan = build_index_plan(cfg);
        for (std::uint64_t i = 0; i < 100; ++i) {
            const CounterRng r = CounterRng(1).substream(i);
            const auto st = sample_channel_state(cfg, r.substream("s"));
            const auto x = sample_input_iid_gaussian(cfg.n, r.substream("x"));
            const CVector ref = select_rows(plan, noiseless_output(a, st, x));
            const CVector g = map_g(a, plan, x.x.head(plan.alpha), st.s, x.x.tail(cfg.n - plan.alpha));
            CHECK((g - ref).norm() <= 1e-12 * ref.norm());
        }
    }
}

TEST_CASE("a-vector decomposition")
{
    const auto cfg = ChannelConfig::make(4, 2, 3);
    const auto a = make_random_covariance(4, 2, 9);
    const CVector c = cn(6, CounterRng(2));
    const auto x = sample_input_iid_gaussian(4, 3);
    const auto av = a_vectors(a, c);
    CVector sum = CVector::Zero(12);
    for (int t = 0; t < 4; ++t) {
        sum += x.x[t] * av[static_cast<std::size_t>(t)];
        for (int pos = 0; pos < 12; ++pos)
            if (pos % 4 != t) CHECK(av[static_cast<std::size_t>(t)][pos] == cplx(0.0, 0.0));
    }
    const CVector ref = noiseless_output(a, ChannelState{c}, x);
    CHECK((sum - ref).norm() <= 1e-12 * ref.norm());
    (void)cfg;
}

TEST_CASE("factorization identity across the sweep")
{
    for (const auto& cfg : sweep()) {
        const auto a = make_random_covariance(cfg.n, cfg.q, 100 + static_cast<std::uint64_t>(cfg.n * 100 + cfg.q * 10 + cfg.m));
        const auto plan = build_index_plan(cfg);
        double worst = 0.0;
        for (std::uint64_t i = 0; i < 100; ++i) {
            const CounterRng r = CounterRng(3).substream(i);
            const auto x = sample_input_iid_gaussian(cfg.n, r.substream("x"));
            const auto f = jacobian_factors(a, plan, x, cn(cfg.mq(), r.substream("c")));
            const cplx dj = oracle::det(f.j_full);
            const cplx prod = oracle::det(f.j1) * oracle::det(f.j2) * oracle::det(f.j3);
            worst = std::max(worst, std::abs(dj - prod) / std::abs(dj));
            // the library determinant agrees with the oracle factorization
            CHECK(std::abs(lu_determinant(f.j_full).value() - dj) <= 1e-9 * std::abs(dj));
        }
        INFO("N=" << cfg.n << " Q=" << cfg.q << " M=" << cfg.m);
        CHECK(worst <= 1e-9);
    }
}

TEST_CASE("factor shapes")
{
    const auto cfg = ChannelConfig::make(4, 2, 3);
    const auto a = make_random_covariance(4, 2, 1);
    const auto plan = build_index_plan(cfg);
    const auto x = sample_input_iid_gaussian(4, 1);
    const auto f = jacobian_factors(a, plan, x, cn(6, CounterRng(1)));
    for (int k = 0; k < plan.size(); ++k) {
        CHECK(f.j1(k, k) == x.x[plan.time_of(plan.selected[static_cast<std::size_t>(k)])]);
        for (int j = 0; j < plan.size(); ++j)
            if (j != k) {
                CHECK(f.j1(k, j) == cplx(0.0, 0.0));
                CHECK(f.j3(k, j) == cplx(0.0, 0.0));
            }
    }
    for (int k = 0; k < 6; ++k) CHECK(f.j3(k, k) == cplx(1.0, 0.0));
    for (int t = 1; t < 4; ++t) CHECK(f.j3(6 + t - 1, 6 + t - 1) == 1.0 / x.x[t]);

    TxBlock bad = x;
    bad.x[2] = 0.0;
    CHECK_THROWS_AS(jacobian_factors(a, plan, bad, cn(6, CounterRng(1))), Error);
}

TEST_CASE("J2 does not depend on x")
{
    const auto cfg = ChannelConfig::make(5, 3, 2);
    const auto a = make_random_covariance(5, 3, 4);
    const auto plan = build_index_plan(cfg);
    const CVector c = cn(6, CounterRng(8));
    const auto f1 = jacobian_factors(a, plan, sample_input_iid_gaussian(5, 1), c);
    const auto f2 = jacobian_factors(a, plan, sample_input_iid_gaussian(5, 2), c);
    CHECK(f1.j2 == f2.j2);
    CHECK(f1.j2 == j2_matrix(a, plan, c));
}

TEST_CASE("J columns match central finite differences of g")
{
    for (const auto& cfg : {ChannelConfig::make(2, 1, 2), ChannelConfig::make(3, 2, 2), ChannelConfig::make(4, 2, 3),
                            ChannelConfig::make(5, 3, 2), ChannelConfig::make(4, 1, 1)}) {
        const auto a = make_random_covariance(cfg.n, cfg.q, 6);
        const auto plan = build_index_plan(cfg);
        const int mq = cfg.mq();
        for (std::uint64_t i = 0; i < 10; ++i) {
            const CounterRng r = CounterRng(4).substream(i);
            const CVector c = cn(mq, r.substream("c"));
            const auto x = sample_input_iid_gaussian(cfg.n, r.substream("x"));
            const CVector xp = x.x.head(plan.alpha), xd = x.x.tail(cfg.n - plan.alpha);
            const auto f = jacobian_factors(a, plan, x, c);
            const double h = 1e-5;
            for (int col = 0; col < plan.size(); ++col) {
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
                    for (int row = 0; row < plan.size(); ++row)
                        CHECK(std::abs(fd[row] - f.j_full(row, col)) <= 1e-6 * (1.0 + std::abs(f.j_full(row, col))));
                }
            }
        }
    }
}

TEST_CASE("det J2 homogeneity")
{
    CHECK(det_j2_homogeneity_degree(build_index_plan(ChannelConfig::make(3, 2, 2))) == 2);
    CHECK(det_j2_homogeneity_degree(build_index_plan(ChannelConfig::make(4, 2, 3))) == 3);
    CHECK(det_j2_homogeneity_degree(build_index_plan(ChannelConfig::make(4, 4, 2))) == 0);
    for (const auto& cfg : sweep()) {
        const auto a = make_random_covariance(cfg.n, cfg.q, 31);
        const auto plan = build_index_plan(cfg);
        const int deg = det_j2_homogeneity_degree(plan);
        const CVector c = cn(cfg.mq(), CounterRng(5).substream(static_cast<std::uint64_t>(cfg.n * 100 + cfg.q * 10 + cfg.m)));
        const cplx base = oracle::det(j2_matrix(a, plan, c));
        for (const cplx lam : {cplx(2.0, 0.0), cplx(0.0, 1.0), cplx(-3.0, 0.0)}) {
            const cplx scaled = oracle::det(j2_matrix(a, plan, (lam * c).eval()));
            CHECK(std::abs(scaled - std::pow(lam, deg) * base) <= 1e-10 * std::abs(std::pow(lam, deg) * base));
        }
    }
}

TEST_CASE("witness sets")
{
    const auto cfg = ChannelConfig::make(3, 2, 2);
    const auto a = make_random_covariance(3, 2, 7);
    const auto plan = build_index_plan(cfg);
    const auto ws = witness_sets(a, plan, 1);
    REQUIRE(ws.k_sets.size() == 2);
    // zero-based {2} and {1}: the swap of K_1 = {2}, K_2 = {3}
    CHECK(ws.k_sets[0] == std::vector<int>{2});
    CHECK(ws.k_sets[1] == std::vector<int>{1});
    for (std::size_t i = 0; i < 2; ++i) {
        const CVector ci = ws.c.segment(static_cast<Eigen::Index>(i) * 2, 2);
        for (int j : ws.k_sets[i]) CHECK(std::abs((a.matrix().row(j) * ci)(0, 0)) < 1e-12);
        for (int j : ws.k_complements[i]) CHECK(std::abs((a.matrix().row(j) * ci)(0, 0)) > 1e-10);
    }
    CHECK(std::abs(oracle::det(j2_matrix(a, plan, ws.c))) > 1e-8);

    const auto one = witness_sets(make_random_covariance(3, 2, 2), build_index_plan(ChannelConfig::make(3, 2, 1)), 1);
    CHECK(one.k_sets[0].empty());
    CHECK(one.k_complements[0] == std::vector<int>{2});

    const auto p423 = build_index_plan(ChannelConfig::make(4, 2, 3));
    const auto w423 = witness_sets(make_random_covariance(4, 2, 3), p423, 2);
    std::size_t owned = 0;
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(w423.k_sets[i].size() == 1);
        owned += w423.k_complements[i].size();
    }
    CHECK(owned == 3);

    CHECK_THROWS_AS(witness_sets(make_dft_covariance(4, std::vector<int>{0, 2}),
                                 build_index_plan(ChannelConfig::make(4, 2, 2)), 1),
                    Error);
}

TEST_CASE("witness product identity")
{
    for (const auto& cfg : sweep()) {
        for (std::uint64_t seed = 0; seed < 3; ++seed) {
            const auto a = make_random_covariance(cfg.n, cfg.q, seed + 50);
            const auto plan = build_index_plan(cfg);
            const auto ws = witness_sets(a, plan, seed);
            const auto chk = verify_witness_factorization(a, plan, ws);
            INFO("N=" << cfg.n << " Q=" << cfg.q << " M=" << cfg.m);
            CHECK(chk.lhs > 1e-8);
            CHECK(std::abs(chk.lhs - chk.rhs) <= 1e-9 * chk.lhs);
            CHECK(std::abs(chk.lhs - std::abs(oracle::det(j2_matrix(a, plan, ws.c)))) <= 1e-9 * chk.lhs);
        }
    }
    const auto dft = make_dft_covariance(5, std::vector<int>{0, 1});
    const auto plan = build_index_plan(ChannelConfig::make(5, 2, 2));
    CHECK(verify_witness_factorization(dft, plan, witness_sets(dft, plan, 0)).lhs > 1e-8);
}

TEST_CASE("log-det Monte Carlo series")
{
    const auto a = make_random_covariance(3, 2, 7);
    const auto plan = build_index_plan(ChannelConfig::make(3, 2, 2));
    const auto s = mc_expected_log_abs_det_j2(a, plan, 2000, 4);
    CHECK(s.checkpoints.front().count == 10);
    CHECK(s.checkpoints.back().count == 2000);
    CHECK(s.zero_count == 0);
    CHECK(std::isfinite(s.final_mean));

    // independent recomputation of the final mean
    const CounterRng rng = CounterRng(4).substream("logdet-j2");
    double acc = 0.0;
    for (std::uint64_t k = 0; k < 2000; ++k) acc += std::log(std::abs(oracle::det(j2_matrix(a, plan, cn(4, rng.substream(k))))));
    CHECK(std::abs(s.final_mean - acc / 2000.0) < 1e-10);

    const auto s2 = mc_expected_log_abs_det_j2(a, plan, 2000, 4, 3);
    REQUIRE(s2.checkpoints.size() == s.checkpoints.size());
    for (std::size_t i = 0; i < s.checkpoints.size(); ++i) CHECK(s2.checkpoints[i].mean == s.checkpoints[i].mean);

    // all-pilot plan: J2 has no s-dependent column
    const auto full = make_random_covariance(3, 3, 1);
    const auto pf = build_index_plan(ChannelConfig::make(3, 3, 2));
    REQUIRE(pf.alpha == 3);
    const auto sf = mc_expected_log_abs_det_j2(full, pf, 1000, 1);
    for (const auto& cp : sf.checkpoints) CHECK(std::abs(cp.mean - sf.final_mean) < 1e-12);

    CHECK_THROWS_AS(mc_expected_log_abs_det_j2(a, plan, 999, 1), Error);
}
