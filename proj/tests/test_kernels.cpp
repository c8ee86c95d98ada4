// SPDX-License-Identifier: Apache-2.0
#include <catch_amalgamated.hpp>

#include <cmath>

#include "oracles.hpp"
#include "simolab/kernels.hpp"
#include "simolab/model.hpp"

using namespace simo;
using kernels::Backend;

namespace {

struct Case {
    int n, q, m;
    double rho;
};

kernels::SampleBuffer random_batch(int n, std::size_t count, std::uint64_t seed)
{
    kernels::SampleBuffer buf(n, count);
    const CounterRng r(seed);
    for (std::size_t k = 0; k < count; ++k) {
        CVector x(n);
        r.substream(k).fill_complex_normal(x);
        buf.set(k, x);
    }
    return buf;
}

CVector column(const kernels::SampleBuffer& buf, std::size_t k, int n)
{
    CVector x(n);
    for (int t = 0; t < n; ++t) x[t] = buf.get(k, t);
    return x;
}

} // namespace

TEST_CASE("scalar kernel matches the dense Gaussian density")
{
    for (const Case c : {Case{3, 2, 2, 1000.0}, Case{3, 2, 1, 0.5}, Case{5, 3, 3, 31.6}, Case{2, 1, 4, 1e4},
                         Case{4, 4, 2, 10.0}}) {
        const auto a = make_random_covariance(c.n, c.q, 17);
        const auto cfg = ChannelConfig::make(c.n, c.q, c.m);
        const auto st = sample_channel_state(cfg, 2);
        const auto x0 = sample_input_iid_gaussian(c.n, 3);
        const CVector y = channel_apply(a, st, x0, c.rho, std::uint64_t{4}).y;
        const kernels::GaussianModel model(a.matrix(), c.rho, c.m, y);
        const auto buf = random_batch(c.n, 13, 5);
        std::vector<double> lik(13), ld(13);
        model.log_likelihood(buf.batch(13), lik, ld, Backend::scalar);
        for (std::size_t k = 0; k < 13; ++k) {
            const CVector x = column(buf, k, c.n);
            const double ref = oracle::gaussian_loglik(a.matrix(), c.rho, c.m, x, y);
            CHECK(std::abs(lik[k] - ref) <= 1e-9 * (1.0 + std::abs(ref)));
            CHECK(std::abs(ld[k] - oracle::gram_logdet(a.matrix(), c.rho, x)) <= 1e-10 * (1.0 + std::abs(ld[k])));
        }
        // the true input scores through the single-sample entry point too
        CHECK(std::abs(model.log_likelihood(x0.x) - oracle::gaussian_loglik(a.matrix(), c.rho, c.m, x0.x, y)) < 1e-8);
    }
}

TEST_CASE("AVX2 kernel agrees with the scalar reference")
{
    if (!kernels::avx2_supported()) {
        SUCCEED("AVX2 kernel not available on this build or CPU");
        return;
    }
    for (const Case c : {Case{3, 2, 2, 1e4}, Case{3, 2, 1, 316.0}, Case{6, 5, 2, 3.0}, Case{9, 8, 1, 100.0},
                         Case{10, 9, 2, 100.0}, Case{2, 1, 3, 1e-3}, Case{7, 3, 4, 1e6}}) {
        const auto a = make_random_covariance(c.n, c.q, 23);
        const auto cfg = ChannelConfig::make(c.n, c.q, c.m);
        const CVector y =
            channel_apply(a, sample_channel_state(cfg, 1), sample_input_iid_gaussian(c.n, 2), c.rho, std::uint64_t{3}).y;
        const kernels::GaussianModel model(a.matrix(), c.rho, c.m, y);
        for (std::size_t count : {1u, 4u, 7u, 64u, 103u}) {
            const auto buf = random_batch(c.n, count, 40 + count);
            std::vector<double> ls(count), lv(count), ds(count), dv(count);
            model.log_likelihood(buf.batch(count), ls, ds, Backend::scalar);
            model.log_likelihood(buf.batch(count), lv, dv, Backend::avx2);
            for (std::size_t k = 0; k < count; ++k) {
                CHECK(std::abs(ls[k] - lv[k]) <= 1e-12 * (1.0 + std::abs(ls[k])));
                CHECK(std::abs(ds[k] - dv[k]) <= 1e-12 * (1.0 + std::abs(ds[k])));
            }
            std::vector<double> gs(count), gv(count);
            model.log_det(buf.batch(count), gs, Backend::scalar);
            model.log_det(buf.batch(count), gv, Backend::avx2);
            for (std::size_t k = 0; k < count; ++k) CHECK(std::abs(gs[k] - gv[k]) <= 1e-12 * (1.0 + std::abs(gs[k])));
        }
    }
}

TEST_CASE("backend selection")
{
    CHECK(kernels::resolve(Backend::scalar) == Backend::scalar);
    if (!kernels::avx2_supported()) CHECK(kernels::resolve(Backend::avx2) == Backend::scalar);
    const Backend before = kernels::default_backend();
    kernels::set_default_backend(Backend::scalar);
    CHECK(kernels::resolve(Backend::automatic) == Backend::scalar);
    kernels::set_default_backend(Backend::automatic);
    CHECK(kernels::default_backend() == before);
}

TEST_CASE("gram-only model rejects likelihood queries")
{
    const auto a = make_random_covariance(3, 2, 1);
    const kernels::GaussianModel g(a.matrix(), 10.0);
    CHECK_FALSE(g.has_observation());
    CHECK_THROWS(g.log_likelihood(CVector::Ones(3)));
    CHECK(g.log_det(CVector::Zero(3)) == 0.0);
}
