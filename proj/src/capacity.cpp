// SPDX-License-Identifier: Apache-2.0
#include "simolab/capacity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>

#include "simolab/errors.hpp"
#include "simolab/parallel.hpp"
#include "simolab/rng.hpp"

namespace simo {

namespace {

constexpr double kLog2e = std::numbers::log2e;
constexpr std::size_t kChunk = 1024;

double log_mean_exp(std::span<const double> v)
{
    const double mx = *std::max_element(v.begin(), v.end());
    if (!std::isfinite(mx)) return mx;
    std::vector<double> e(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) e[i] = std::exp(v[i] - mx);
    return mx + std::log(pairwise_sum(e) / static_cast<double>(v.size()));
}

double log_add_exp(double a, double b)
{
    if (a == -std::numeric_limits<double>::infinity()) return b;
    if (b == -std::numeric_limits<double>::infinity()) return a;
    const double mx = std::max(a, b);
    return mx + std::log1p(std::exp(-std::abs(a - b)));
}

double log_prior(const kernels::SampleBuffer& buf, std::size_t k, int n)
{
    double s = 0.0;
    for (int t = 0; t < n; ++t) s += std::norm(buf.get(k, t));
    return -n * std::log(std::numbers::pi) - s;
}

void fill_prior(kernels::SampleBuffer& buf, std::size_t k, int n, const CounterRng& rng)
{
    for (int t = 0; t < n; ++t) buf.set(k, t, rng.complex_normal(static_cast<std::uint64_t>(t)));
}

// Proposal over x in C^N built around a reference block x0. With pivot p the
// coordinates are a = x_p and v_t = x_p / x_t (t != p); the posterior is
// invariant to a common phase and nearly flat in |a| at high SNR, so a is drawn
// from a gridded profile in log|a| with uniform phase, and v from a
// multivariate t fitted to the curvature of the target at (|x0_p|, v0).
class PosteriorProposal {
public:
    // Fitted with the scalar kernel on every backend so the proposal itself is
    // backend-independent.
    PosteriorProposal(const kernels::GaussianModel& model, const CVector& x0)
        : n_(model.n()), d_(2 * (model.n() - 1))
    {
        p_ = 0;
        for (int t = 1; t < n_; ++t)
            if (std::abs(x0[t]) > std::abs(x0[p_])) p_ = t;
        r0_ = std::abs(x0[p_]);
        if (!(r0_ > 0.0)) fail(ErrorCode::degenerate_system, "reference input block is zero");
        w0_.resize(d_);
        for (int i = 0, t = 0; t < n_; ++t) {
            if (t == p_) continue;
            const cplx v = x0[p_] / x0[t];
            w0_[i] = v.real();
            w0_[i + n_ - 1] = v.imag();
            ++i;
        }
        fit_local(model, kernels::Backend::scalar);
        fit_radius(model, kernels::Backend::scalar);
    }

    void sample(const CounterRng& rng, kernels::SampleBuffer& buf, std::size_t k) const
    {
        RVector g(d_);
        for (int i = 0; i < d_ / 2; ++i) {
            const auto [z1, z2] = rng.normal_pair(static_cast<std::uint64_t>(i));
            g[2 * i] = z1;
            g[2 * i + 1] = z2;
        }
        const auto [u_cell, u_pos] = rng.uniform_pair(static_cast<std::uint64_t>(d_ / 2));
        const auto [u_phase, u_c1] = rng.uniform_pair(static_cast<std::uint64_t>(d_ / 2 + 1));
        const double u_c2 = rng.uniform(static_cast<std::uint64_t>(d_ / 2 + 2));
        const double chi2 = -2.0 * std::log(u_c1 * u_c2); // nu = 4
        const RVector w = w0_ + chol_ * g * std::sqrt(kNu / chi2);

        const std::size_t cell = static_cast<std::size_t>(
            std::upper_bound(cumulative_.begin(), cumulative_.end() - 1, u_cell) - cumulative_.begin());
        const double l = l0_ + (static_cast<double>(cell) + u_pos - 0.5) * dl_;
        const cplx a = std::polar(std::exp(l), 2.0 * std::numbers::pi * u_phase);
        buf.set(k, p_, a);
        for (int i = 0, t = 0; t < n_; ++t) {
            if (t == p_) continue;
            buf.set(k, t, a / cplx(w[i], w[i + n_ - 1]));
            ++i;
        }
    }

    double log_density(const kernels::SampleBuffer& buf, std::size_t k) const
    {
        const cplx a = buf.get(k, p_);
        const double r = std::abs(a);
        if (!(r > 0.0)) return -std::numeric_limits<double>::infinity();
        RVector w(d_);
        double log_v = 0.0;
        for (int i = 0, t = 0; t < n_; ++t) {
            if (t == p_) continue;
            const cplx xt = buf.get(k, t);
            if (xt == cplx(0.0, 0.0)) return -std::numeric_limits<double>::infinity();
            const cplx v = a / xt;
            w[i] = v.real() - w0_[i];
            w[i + n_ - 1] = v.imag() - w0_[i + n_ - 1];
            log_v += std::log(std::abs(v));
            ++i;
        }
        const RVector z = chol_.triangularView<Eigen::Lower>().solve(w);
        const double log_qv = log_t_const_ - 0.5 * (kNu + d_) * std::log1p(z.squaredNorm() / kNu);

        const double l = std::log(r);
        const double pos = (l - l0_) / dl_ + 0.5;
        if (!(pos >= 0.0 && pos < static_cast<double>(kGrid))) return -std::numeric_limits<double>::infinity();
        const double log_ql = log_cell_[static_cast<std::size_t>(pos)];
        const double log_qa = log_ql - 2.0 * l - std::log(2.0 * std::numbers::pi);
        return log_qa + log_qv - log_jacobian(l, log_v);
    }

private:
    static constexpr double kNu = 4.0;
    static constexpr int kGrid = 400;

    // log |d x / d(a, v)| for the real change of variables
    double log_jacobian(double log_r, double sum_log_abs_v) const
    {
        return 2.0 * (n_ - 1) * log_r - 4.0 * sum_log_abs_v;
    }

    void put(kernels::SampleBuffer& buf, std::size_t k, double r, const RVector& w) const
    {
        buf.set(k, p_, r);
        for (int i = 0, t = 0; t < n_; ++t) {
            if (t == p_) continue;
            buf.set(k, t, r / cplx(w[i], w[i + n_ - 1]));
            ++i;
        }
    }

    // log target in (a, v) coordinates for each buffered point at radius r_k
    std::vector<double> log_target(const kernels::GaussianModel& model, const kernels::SampleBuffer& buf,
                                   std::size_t count, const std::vector<double>& log_r, const std::vector<RVector>& ws,
                                   kernels::Backend backend) const
    {
        std::vector<double> lik(count);
        model.log_likelihood(buf.batch(count), lik, {}, backend);
        for (std::size_t k = 0; k < count; ++k) {
            double log_v = 0.0;
            for (int i = 0; i < n_ - 1; ++i) log_v += 0.5 * std::log(ws[k][i] * ws[k][i] + ws[k][i + n_ - 1] * ws[k][i + n_ - 1]);
            lik[k] += log_prior(buf, k, n_) + log_jacobian(log_r[k], log_v);
        }
        return lik;
    }

    void fit_local(const kernels::GaussianModel& model, kernels::Backend backend)
    {
        const double shrink = std::min(1.0, 1.0 / std::sqrt(model.rho()));
        RVector h(d_);
        for (int i = 0; i < d_; ++i) h[i] = 1e-3 * (1.0 + std::abs(w0_[i])) * shrink;

        std::vector<RVector> pts{w0_};
        for (int i = 0; i < d_; ++i) {
            RVector e = RVector::Zero(d_);
            e[i] = h[i];
            pts.push_back(w0_ + e);
            pts.push_back(w0_ - e);
        }
        for (int i = 0; i < d_; ++i)
            for (int j = i + 1; j < d_; ++j) {
                RVector ei = RVector::Zero(d_), ej = RVector::Zero(d_);
                ei[i] = h[i];
                ej[j] = h[j];
                pts.push_back(w0_ + ei + ej);
                pts.push_back(w0_ + ei - ej);
                pts.push_back(w0_ - ei + ej);
                pts.push_back(w0_ - ei - ej);
            }
        kernels::SampleBuffer buf(n_, pts.size());
        for (std::size_t k = 0; k < pts.size(); ++k) put(buf, k, r0_, pts[k]);
        const std::vector<double> lr(pts.size(), std::log(r0_));
        const std::vector<double> f = log_target(model, buf, pts.size(), lr, pts, backend);

        // Hessian of -log target
        RMatrix hess(d_, d_);
        std::size_t idx = 1;
        for (int i = 0; i < d_; ++i, idx += 2) hess(i, i) = -(f[idx] - 2.0 * f[0] + f[idx + 1]) / (h[i] * h[i]);
        for (int i = 0; i < d_; ++i)
            for (int j = i + 1; j < d_; ++j, idx += 4) {
                hess(i, j) = hess(j, i) = -(f[idx] - f[idx + 1] - f[idx + 2] + f[idx + 3]) / (4.0 * h[i] * h[j]);
            }

        double vmax = 0.0;
        for (int i = 0; i < n_ - 1; ++i) vmax = std::max(vmax, std::hypot(w0_[i], w0_[i + n_ - 1]));
        const double floor = 1e-2 / (1.0 + vmax * vmax);
        const Eigen::SelfAdjointEigenSolver<RMatrix> eig(hess);
        RVector lam = eig.eigenvalues();
        for (int i = 0; i < d_; ++i)
            if (!(lam[i] >= floor)) lam[i] = floor;
        // covariance inflated by 2 against curvature misfit away from the mode
        const RMatrix sigma = 2.0 * eig.eigenvectors() * lam.cwiseInverse().asDiagonal() * eig.eigenvectors().transpose();
        const Eigen::LLT<RMatrix> llt(sigma);
        chol_ = llt.matrixL();
        double log_det_sigma = 0.0;
        for (int i = 0; i < d_; ++i) log_det_sigma += 2.0 * std::log(chol_(i, i));
        log_t_const_ = std::lgamma(0.5 * (kNu + d_)) - std::lgamma(0.5 * kNu) - 0.5 * d_ * std::log(kNu * std::numbers::pi) -
                       0.5 * log_det_sigma;
    }

    void fit_radius(const kernels::GaussianModel& model, kernels::Backend backend)
    {
        l0_ = std::log(r0_) - 6.0;
        dl_ = 10.0 / (kGrid - 1);
        kernels::SampleBuffer buf(n_, kGrid);
        std::vector<double> lr(kGrid);
        const std::vector<RVector> ws(kGrid, w0_);
        for (int i = 0; i < kGrid; ++i) {
            lr[static_cast<std::size_t>(i)] = l0_ + i * dl_;
            put(buf, static_cast<std::size_t>(i), std::exp(lr[static_cast<std::size_t>(i)]), w0_);
        }
        std::vector<double> f = log_target(model, buf, kGrid, lr, ws, backend);
        // density in log r: r dr = r^2 d(log r)
        for (int i = 0; i < kGrid; ++i) f[static_cast<std::size_t>(i)] += 2.0 * lr[static_cast<std::size_t>(i)];
        const double mx = *std::max_element(f.begin(), f.end());
        std::vector<double> pr(kGrid);
        for (int i = 0; i < kGrid; ++i) pr[static_cast<std::size_t>(i)] = std::exp(f[static_cast<std::size_t>(i)] - mx);
        const double total = pairwise_sum(pr);
        cumulative_.resize(kGrid);
        log_cell_.resize(kGrid);
        double acc = 0.0;
        for (int i = 0; i < kGrid; ++i) {
            const double pi = 0.9 * pr[static_cast<std::size_t>(i)] / total + 0.1 / kGrid;
            acc += pi;
            cumulative_[static_cast<std::size_t>(i)] = acc;
            log_cell_[static_cast<std::size_t>(i)] = std::log(pi / dl_);
        }
    }

    int n_, d_, p_ = 0;
    double r0_ = 0.0;
    RVector w0_;
    RMatrix chol_;
    double log_t_const_ = 0.0;
    double l0_ = 0.0, dl_ = 0.0;
    std::vector<double> cumulative_, log_cell_;
};

} // namespace

const char* to_string(InnerSampler s) noexcept { return s == InnerSampler::prior ? "prior" : "posterior"; }

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

double cond_entropy_rate_mc(const CovarianceFactor& a, const ChannelConfig& cfg, double snr, std::uint64_t trials,
                            std::uint64_t seed, int workers)
{
    cfg.validate();
    if (a.n() != cfg.n || a.q() != cfg.q) fail(ErrorCode::dimension_mismatch, "covariance shape differs from config");
    if (!(snr > 0.0) || !std::isfinite(snr)) fail(ErrorCode::invalid_argument, "snr must be positive");
    if (trials < 100) fail(ErrorCode::invalid_argument, "trials must be at least 100");
    const kernels::GaussianModel model(a.matrix(), snr);
    const CounterRng rng = CounterRng(seed).substream("cond-entropy");
    std::vector<double> ld(static_cast<std::size_t>(trials));
    const std::size_t chunks = (ld.size() + kChunk - 1) / kChunk;
    parallel_for(chunks, workers, [&](std::size_t cb, std::size_t ce, int) {
        kernels::SampleBuffer buf(cfg.n, kChunk);
        for (std::size_t c = cb; c < ce; ++c) {
            const std::size_t first = c * kChunk;
            const std::size_t count = std::min(kChunk, ld.size() - first);
            for (std::size_t k = 0; k < count; ++k)
                fill_prior(buf, k, cfg.n, rng.substream(static_cast<std::uint64_t>(first + k)));
            model.log_det(buf.batch(count), std::span<double>(ld).subspan(first, count));
        }
    });
    const double mean_ld = pairwise_sum(ld) / static_cast<double>(ld.size());
    return cfg.mn() * std::log2(std::numbers::pi * std::numbers::e) + cfg.m * mean_ld * kLog2e;
}

double upper_bound_rate(const ChannelConfig& cfg, double snr)
{
    cfg.validate();
    if (!(snr > std::numbers::e)) fail(ErrorCode::invalid_argument, "snr must exceed e");
    const double l2 = std::log2(snr);
    return cfg.m * (1.0 - static_cast<double>(cfg.q) / cfg.n) * l2 + static_cast<double>(cfg.q) / cfg.n * std::log2(l2);
}

MiEstimate mi_rate_mc(const CovarianceFactor& a, const ChannelConfig& cfg, double snr_db, std::uint64_t outer,
                      std::uint64_t inner, std::uint64_t seed, const MiOptions& options)
{
    cfg.validate();
    if (a.n() != cfg.n || a.q() != cfg.q) fail(ErrorCode::dimension_mismatch, "covariance shape differs from config");
    if (!std::isfinite(snr_db)) fail(ErrorCode::invalid_argument, "snr_db must be finite");
    if (outer < 100) fail(ErrorCode::invalid_argument, "outer must be at least 100");
    if (inner < 1000) fail(ErrorCode::invalid_argument, "inner must be at least 1000");
    if (!(options.defensive_weight >= 0.0 && options.defensive_weight < 1.0))
        fail(ErrorCode::invalid_argument, "defensive weight must lie in [0, 1)");
    if (static_cast<double>(outer) * static_cast<double>(inner) > options.density_budget)
        fail(ErrorCode::budget_exceeded, "outer * inner exceeds the density-evaluation budget");

    const double rho = db_to_linear(snr_db);
    const int n = cfg.n;
    const CounterRng rng = CounterRng(seed).substream("mi");

    const std::size_t k_total = static_cast<std::size_t>(inner);
    std::size_t k_prior = k_total;
    if (options.sampler == InnerSampler::posterior)
        k_prior = static_cast<std::size_t>(std::llround(options.defensive_weight * static_cast<double>(k_total)));
    const std::size_t k_local = k_total - k_prior;
    const double eps = static_cast<double>(k_prior) / static_cast<double>(k_total);
    const double log_eps = std::log(eps), log_1m_eps = std::log1p(-eps);

    std::vector<double> rate(static_cast<std::size_t>(outer)), ess(static_cast<std::size_t>(outer));
    parallel_for(rate.size(), options.workers, [&](std::size_t jb, std::size_t je, int) {
        kernels::SampleBuffer buf(n, k_total);
        std::vector<double> lik(k_total), logw(k_total);
        for (std::size_t j = jb; j < je; ++j) {
            const CounterRng rj = rng.substream(static_cast<std::uint64_t>(j));
            const TxBlock x = sample_input_iid_gaussian(n, rj.substream("x"));
            const ChannelState st = sample_channel_state(cfg, rj.substream("s"));
            const RxBlock y = channel_apply(a, st, x, rho, rj.substream("w"));
            const kernels::GaussianModel model(a.matrix(), rho, cfg.m, y.y);
            const CounterRng ri = rj.substream("inner");

            if (options.sampler == InnerSampler::prior) {
                for (std::size_t k = 0; k < k_total; ++k) fill_prior(buf, k, n, ri.substream(static_cast<std::uint64_t>(k)));
                model.log_likelihood(buf.batch(k_total), lik, {}, options.backend);
                logw = lik;
            } else {
                const PosteriorProposal prop(model, x.x);
                for (std::size_t k = 0; k < k_local; ++k) prop.sample(ri.substream(static_cast<std::uint64_t>(k)), buf, k);
                for (std::size_t k = k_local; k < k_total; ++k)
                    fill_prior(buf, k, n, ri.substream(static_cast<std::uint64_t>(k)));
                model.log_likelihood(buf.batch(k_total), lik, {}, options.backend);
                for (std::size_t k = 0; k < k_total; ++k) {
                    const double lp = log_prior(buf, k, n);
                    const double lq = log_add_exp(k_prior ? log_eps + lp : -std::numeric_limits<double>::infinity(),
                                                  log_1m_eps + prop.log_density(buf, k));
                    logw[k] = lp + lik[k] - lq;
                }
            }
            // realized log-likelihood ratio; its mean is h(y) - h(y|x)
            const double log_py = log_mean_exp(logw);
            rate[j] = (model.log_likelihood(x.x) - log_py) * kLog2e / n;

            const double mx = *std::max_element(logw.begin(), logw.end());
            double s1 = 0.0, s2 = 0.0;
            for (double lw : logw) {
                const double w = std::exp(lw - mx);
                s1 += w;
                s2 += w * w;
            }
            ess[j] = s1 * s1 / s2;
        }
    });

    const MeanStd ms = mean_and_std_err(rate);
    std::vector<double> sorted_ess = ess;
    std::nth_element(sorted_ess.begin(), sorted_ess.begin() + static_cast<std::ptrdiff_t>(sorted_ess.size() / 2), sorted_ess.end());
    MiEstimate est;
    est.snr_db = snr_db;
    est.mi_bits_per_cu = ms.mean;
    est.std_err = ms.std_err;
    est.outer = outer;
    est.inner = inner;
    est.seed = seed;
    est.median_ess = sorted_ess[sorted_ess.size() / 2];
    return est;
}

SlopeFit prelog_slope_fit(std::span<const MiEstimate> points)
{
    if (points.size() < 3) fail(ErrorCode::invalid_argument, "slope fit needs at least 3 points");
    std::set<double> seen;
    for (const auto& p : points)
        if (!seen.insert(p.snr_db).second) fail(ErrorCode::invalid_argument, "duplicate snr_db in slope fit");
    const std::size_t n = points.size();
    std::vector<double> xs(n), ys(n);
    for (std::size_t i = 0; i < n; ++i) {
        xs[i] = std::log2(db_to_linear(points[i].snr_db));
        ys[i] = points[i].mi_bits_per_cu;
    }
    const double mx = pairwise_sum(xs) / static_cast<double>(n);
    const double my = pairwise_sum(ys) / static_cast<double>(n);
    std::vector<double> sxy(n), sxx(n);
    for (std::size_t i = 0; i < n; ++i) {
        sxy[i] = (xs[i] - mx) * (ys[i] - my);
        sxx[i] = (xs[i] - mx) * (xs[i] - mx);
    }
    SlopeFit fit;
    fit.slope = pairwise_sum(sxy) / pairwise_sum(sxx);
    fit.intercept = my - fit.slope * mx;
    std::vector<double> res(n), tot(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double e = ys[i] - (fit.intercept + fit.slope * xs[i]);
        res[i] = e * e;
        tot[i] = (ys[i] - my) * (ys[i] - my);
    }
    const double ss_tot = pairwise_sum(tot);
    fit.r_squared = ss_tot > 0.0 ? 1.0 - pairwise_sum(res) / ss_tot : 1.0;
    const auto [lo, hi] = std::minmax_element(points.begin(), points.end(),
                                              [](const MiEstimate& u, const MiEstimate& v) { return u.snr_db < v.snr_db; });
    fit.window_db = {lo->snr_db, hi->snr_db};
    return fit;
}

} // namespace simo
