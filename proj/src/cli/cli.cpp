// SPDX-License-Identifier: Apache-2.0
#include "simolab/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <sstream>

#include <CLI11.hpp>

#include "simolab/capacity.hpp"
#include "simolab/errors.hpp"
#include "simolab/io.hpp"
#include "simolab/jacobian.hpp"
#include "simolab/linalg.hpp"
#include "simolab/recovery.hpp"
#include "simolab/structure.hpp"

namespace simo::cli {

using nlohmann::json;
using io::format_double;

void ExperimentConfig::validate() const
{
    cfg.validate();
    for (std::size_t i = 1; i < snr_grid_db.size(); ++i)
        if (!(snr_grid_db[i] > snr_grid_db[i - 1])) fail(ErrorCode::invalid_argument, "snr grid must be strictly increasing");
    if (outer == 0 || inner == 0 || trials == 0) fail(ErrorCode::invalid_argument, "counts must be positive");
    if (workers < 1) fail(ErrorCode::invalid_argument, "workers must be positive");
    if (m_max < 1) fail(ErrorCode::invalid_argument, "m_max must be positive");
    if (sampler != "posterior" && sampler != "prior") fail(ErrorCode::invalid_argument, "sampler must be posterior or prior");
    if (backend != "automatic" && backend != "scalar" && backend != "avx2")
        fail(ErrorCode::invalid_argument, "backend must be automatic, scalar or avx2");
    if (covariance.kind == CovarianceSource::Kind::file && covariance.path.empty())
        fail(ErrorCode::invalid_argument, "file covariance needs a path");
}

ExperimentConfig config_from_json(const json& j, ExperimentConfig c)
{
    try {
        if (!j.is_object()) fail(ErrorCode::invalid_argument, "config must be a JSON object");
        if (j.contains("n")) c.cfg.n = j["n"].get<int>();
        if (j.contains("q")) c.cfg.q = j["q"].get<int>();
        if (j.contains("m")) c.cfg.m = j["m"].get<int>();
        if (j.contains("covariance")) {
            const json& cv = j["covariance"];
            const auto type = cv.at("type").get<std::string>();
            if (type == "dft") {
                c.covariance.kind = CovarianceSource::Kind::dft;
                c.covariance.keep_cols = cv.at("keep").get<std::vector<int>>();
            } else if (type == "random") {
                c.covariance.kind = CovarianceSource::Kind::random;
                if (cv.contains("seed")) c.covariance.seed = cv["seed"].get<std::uint64_t>();
            } else if (type == "file") {
                c.covariance.kind = CovarianceSource::Kind::file;
                c.covariance.path = cv.at("path").get<std::string>();
            } else {
                fail(ErrorCode::invalid_argument, "unknown covariance type '" + type + "'");
            }
        }
        if (j.contains("snr_grid_db")) c.snr_grid_db = j["snr_grid_db"].get<std::vector<double>>();
        if (j.contains("outer")) c.outer = j["outer"].get<std::uint64_t>();
        if (j.contains("inner")) c.inner = j["inner"].get<std::uint64_t>();
        if (j.contains("trials")) c.trials = j["trials"].get<std::uint64_t>();
        if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
        if (j.contains("out")) c.out_path = j["out"].get<std::string>();
        if (j.contains("workers")) c.workers = j["workers"].get<int>();
        if (j.contains("tol")) c.tol = j["tol"].get<double>();
        if (j.contains("m_max")) c.m_max = j["m_max"].get<int>();
        if (j.contains("noisy_snr_db")) c.noisy_snr_db = j["noisy_snr_db"].get<double>();
        if (j.contains("inject_zero_trial")) c.inject_zero_trial = j["inject_zero_trial"].get<std::uint64_t>();
        if (j.contains("sampler")) c.sampler = j["sampler"].get<std::string>();
        if (j.contains("backend")) c.backend = j["backend"].get<std::string>();
        if (j.contains("in")) c.in_path = j["in"].get<std::string>();
        if (j.contains("fit_out")) c.fit_out = j["fit_out"].get<std::string>();
        if (j.contains("prime")) c.prime = j["prime"].get<bool>();
        if (j.contains("fd_instances")) c.fd_instances = j["fd_instances"].get<std::uint64_t>();
    } catch (const json::exception& e) {
        fail(ErrorCode::invalid_argument, std::string("bad config value: ") + e.what());
    }
    return c;
}

json config_to_json(const ExperimentConfig& c)
{
    json cov;
    switch (c.covariance.kind) {
    case CovarianceSource::Kind::dft: cov = {{"type", "dft"}, {"keep", c.covariance.keep_cols}}; break;
    case CovarianceSource::Kind::random:
        cov = {{"type", "random"}, {"seed", c.covariance.seed.value_or(c.seed)}};
        break;
    case CovarianceSource::Kind::file: cov = {{"type", "file"}, {"path", c.covariance.path}}; break;
    }
    return json{{"n", c.cfg.n},         {"q", c.cfg.q},           {"m", c.cfg.m},
                {"covariance", cov},    {"snr_grid_db", c.snr_grid_db}, {"outer", c.outer},
                {"inner", c.inner},     {"trials", c.trials},     {"seed", c.seed},
                {"sampler", c.sampler}};
}

CovarianceFactor load_covariance(const ExperimentConfig& c)
{
    switch (c.covariance.kind) {
    case CovarianceSource::Kind::dft: {
        if (c.covariance.keep_cols.empty()) fail(ErrorCode::invalid_argument, "dft covariance needs keep columns");
        auto a = make_dft_covariance(c.cfg.n, c.covariance.keep_cols);
        return a;
    }
    case CovarianceSource::Kind::random:
        return make_random_covariance(c.cfg.n, c.cfg.q, c.covariance.seed.value_or(c.seed));
    case CovarianceSource::Kind::file: return io::read_covariance(c.covariance.path);
    }
    fail(ErrorCode::invalid_argument, "unknown covariance source");
}

namespace {

int exit_code_for(ErrorCode code)
{
    switch (code) {
    case ErrorCode::property_violation: return property_fails;
    case ErrorCode::singular_input:
    case ErrorCode::degenerate_system:
    case ErrorCode::near_zero_symbol:
    case ErrorCode::retry_exhausted: return numerical_degeneracy;
    default: return usage_error;
    }
}

// Emits to --out when given, otherwise to the command's output stream.
void emit(const ExperimentConfig& c, std::ostream& out, const std::string& text)
{
    if (c.out_path.empty())
        out << text;
    else
        io::write_text(c.out_path, text);
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

void check_shape(const CovarianceFactor& a, const ExperimentConfig& c)
{
    if (a.n() != c.cfg.n || a.q() != c.cfg.q)
        fail(ErrorCode::dimension_mismatch, "covariance is " + std::to_string(a.n()) + "x" + std::to_string(a.q()) +
                                                ", config expects " + std::to_string(c.cfg.n) + "x" +
                                                std::to_string(c.cfg.q));
}

// DFT covariances take Q from the kept columns.
ExperimentConfig normalized(ExperimentConfig c)
{
    if (c.covariance.kind == CovarianceSource::Kind::dft && !c.covariance.keep_cols.empty())
        c.cfg.q = static_cast<int>(c.covariance.keep_cols.size());
    c.validate();
    return c;
}

int cmd_prelog(const ExperimentConfig& c, std::ostream& out)
{
    std::ostringstream s;
    s << "M,prelog,prelog_decimal,regime,critical_m\n";
    for (int m = 1; m <= c.m_max; ++m) {
        const auto rep = prelog(ChannelConfig::make(c.cfg.n, c.cfg.q, m));
        s << m << ',' << format_rational(rep.prelog) << ','
          << format_double(static_cast<double>(rep.prelog.numerator()) / static_cast<double>(rep.prelog.denominator())) << ','
          << to_string(rep.regime) << ',' << (rep.critical_m ? std::to_string(*rep.critical_m) : std::string("none")) << '\n';
    }
    emit(c, out, s.str());
    return ok;
}

json plan_to_json(const IndexPlan& p)
{
    return json{{"n", p.cfg.n},
                {"q", p.cfg.q},
                {"m", p.cfg.m},
                {"indexing", "zero-based"},
                {"alpha", p.alpha},
                {"L", p.shortened},
                {"pilot_set", p.pilot_set},
                {"data_set", p.data_set},
                {"row_sets", p.row_sets},
                {"selected", p.selected},
                {"kept_times", p.kept_times},
                {"owned_data", p.owned_data}};
}

int cmd_plan(const ExperimentConfig& c, std::ostream& out)
{
    emit(c, out, dump(plan_to_json(build_index_plan(c.cfg))));
    return ok;
}

int cmd_check_a(const ExperimentConfig& c, std::ostream& out)
{
    // Files are checked as raw matrices so rank-deficient inputs can be reported.
    const CMatrix a = c.covariance.kind == CovarianceSource::Kind::file
                          ? io::matrix_from_json(io::read_json(c.covariance.path))
                          : load_covariance(c).matrix();
    const auto res = check_property_a(a, c.tol, c.workers);
    json rep{{"property", "A"},
             {"n", a.rows()},
             {"q", a.cols()},
             {"tol", c.tol},
             {"holds", res.holds},
             {"subsets_checked", res.subsets_checked},
             {"failing_rows", res.failing_rows ? json(*res.failing_rows) : json(nullptr)}};
    bool holds = res.holds;
    if (c.prime) {
        ChannelConfig cfg = c.cfg;
        cfg.n = static_cast<int>(a.rows());
        cfg.q = static_cast<int>(a.cols());
        const auto pr = check_property_a_prime(a, cfg, c.tol, c.seed);
        rep["prime"] = json{{"outcome", to_string(pr.outcome)},
                            {"cardinality", pr.cardinality},
                            {"exhaustive", pr.exhaustive},
                            {"sets_tried", pr.sets_tried},
                            {"witness_set", pr.witness_set ? json(*pr.witness_set) : json(nullptr)}};
        holds = pr.holds();
    }
    emit(c, out, dump(rep));
    return holds ? ok : property_fails;
}

int cmd_gen_cov(const ExperimentConfig& c, std::ostream& out)
{
    emit(c, out, dump(io::matrix_to_json(load_covariance(c).matrix())));
    return ok;
}

int cmd_recover(const ExperimentConfig& c, std::ostream& out)
{
    const CovarianceFactor a = load_covariance(c);
    check_shape(a, c);
    const IndexPlan plan = build_index_plan(c.cfg);
    const CounterRng rng = CounterRng(c.seed).substream("recover");
    const CVector pilots = CVector::Ones(plan.alpha);
    const double rho = c.noisy_snr_db ? db_to_linear(*c.noisy_snr_db) : 1.0;
    const std::string nan = "nan";

    std::ostringstream s;
    s << "trial,rel_err_s,rel_err_x,residual,condition,status\n";
    for (std::uint64_t trial = 0; trial < c.trials; ++trial) {
        const CounterRng r = rng.substream(trial);
        const ChannelState st = sample_channel_state(c.cfg, r.substream("s"));
        TxBlock x{CVector(c.cfg.n)};
        x.x.head(plan.alpha) = pilots;
        for (int t = plan.alpha; t < c.cfg.n; ++t) x.x[t] = r.substream("x").complex_normal(static_cast<std::uint64_t>(t));
        if (c.inject_zero_trial && *c.inject_zero_trial == trial && plan.alpha < c.cfg.n) x.x[plan.alpha] = 0.0;
        s << trial << ',';
        try {
            RecoveryResult res;
            if (c.noisy_snr_db) {
                const RxBlock y = channel_apply(a, st, x, rho, r.substream("w"));
                res = recover_least_squares(a, plan, pilots, y.y);
                res.s_hat /= std::sqrt(rho);
            } else {
                res = recover_noiseless(a, plan, pilots, select_rows(plan, noiseless_output(a, st, x)));
            }
            const CVector xd = x.x.tail(c.cfg.n - plan.alpha);
            const double ex = xd.size() ? (res.x_data_hat - xd).norm() / xd.norm() : 0.0;
            s << format_double((res.s_hat - st.s).norm() / st.s.norm()) << ',' << format_double(ex) << ','
              << format_double(res.residual) << ',' << format_double(res.condition) << ",ok\n";
        } catch (const Error& e) {
            if (e.code() == ErrorCode::invalid_argument || e.code() == ErrorCode::dimension_mismatch) throw;
            s << nan << ',' << nan << ',' << nan << ',' << nan << ',' << to_string(e.code()) << '\n';
        }
    }
    emit(c, out, s.str());
    return ok;
}

struct JacReport {
    double identity_err = 0.0;
    double fd_err = 0.0;
    double homogeneity_err = 0.0;
    int degree = 0;
};

JacReport verify_jacobian(const CovarianceFactor& a, const IndexPlan& plan, const ExperimentConfig& c)
{
    const CounterRng rng = CounterRng(c.seed).substream("jac-verify");
    const int mq = plan.cfg.mq(), n = plan.cfg.n;
    JacReport rep;
    rep.degree = det_j2_homogeneity_degree(plan);
    for (std::uint64_t i = 0; i < c.trials; ++i) {
        const CounterRng r = rng.substream(i);
        CVector cv(mq);
        r.substream("c").fill_complex_normal(cv);
        const TxBlock x = sample_input_iid_gaussian(n, r.substream("x"));
        const JacobianFactors f = jacobian_factors(a, plan, x, cv);
        const cplx dj = lu_determinant(f.j_full).value();
        const cplx prod = lu_determinant(f.j1).value() * lu_determinant(f.j2).value() * lu_determinant(f.j3).value();
        rep.identity_err = std::max(rep.identity_err, std::abs(dj - prod) / std::abs(dj));

        const cplx d2 = lu_determinant(f.j2).value();
        for (const cplx lam : {cplx(2.0, 0.0), cplx(0.0, 1.0), cplx(-3.0, 0.0)}) {
            const cplx scaled = lu_determinant(j2_matrix(a, plan, (lam * cv).eval())).value();
            const cplx expect = std::pow(lam, rep.degree) * d2;
            rep.homogeneity_err = std::max(rep.homogeneity_err, std::abs(scaled - expect) / std::abs(expect));
        }

        if (i >= c.fd_instances) continue;
        const CVector xp = x.x.head(plan.alpha);
        const CVector xd = x.x.tail(n - plan.alpha);
        constexpr double h = 1e-5;
        for (int col = 0; col < f.j_full.cols(); ++col) {
            for (const cplx step : {cplx(h, 0.0), cplx(0.0, h)}) {
                CVector cp = cv, cm = cv, dp = xd, dm = xd;
                if (col < mq) {
                    cp[col] += step;
                    cm[col] -= step;
                } else {
                    dp[col - mq] += step;
                    dm[col - mq] -= step;
                }
                const CVector fd = (map_g(a, plan, xp, cp, dp) - map_g(a, plan, xp, cm, dm)) / (2.0 * step);
                for (int row = 0; row < fd.size(); ++row)
                    rep.fd_err = std::max(rep.fd_err, std::abs(fd[row] - f.j_full(row, col)) / (1.0 + std::abs(f.j_full(row, col))));
            }
        }
    }
    return rep;
}

int cmd_jac_verify(const ExperimentConfig& c, std::ostream& out)
{
    const CovarianceFactor a = load_covariance(c);
    check_shape(a, c);
    const IndexPlan plan = build_index_plan(c.cfg);
    const JacReport r = verify_jacobian(a, plan, c);
    const bool pass = r.identity_err <= 1e-9 && r.fd_err <= 1e-6 && r.homogeneity_err <= 1e-10;
    emit(c, out,
         dump(json{{"n", c.cfg.n},
                   {"q", c.cfg.q},
                   {"m", c.cfg.m},
                   {"trials", c.trials},
                   {"fd_instances", std::min(c.fd_instances, c.trials)},
                   {"max_identity_rel_err", r.identity_err},
                   {"max_fd_err", r.fd_err},
                   {"homogeneity_degree", r.degree},
                   {"max_homogeneity_rel_err", r.homogeneity_err},
                   {"pass", pass}}));
    return pass ? ok : property_fails;
}

int cmd_witness(const ExperimentConfig& c, std::ostream& out)
{
    const CovarianceFactor a = load_covariance(c);
    check_shape(a, c);
    const IndexPlan plan = build_index_plan(c.cfg);
    const WitnessSets ws = witness_sets(a, plan, c.seed, c.tol);
    const WitnessCheck chk = verify_witness_factorization(a, plan, ws);
    const double rel = std::abs(chk.lhs - chk.rhs) / chk.lhs;
    const bool pass = chk.lhs > 1e-8 && rel <= 1e-9;
    emit(c, out,
         dump(json{{"n", c.cfg.n},
                   {"q", c.cfg.q},
                   {"m", c.cfg.m},
                   {"indexing", "zero-based"},
                   {"k_sets", ws.k_sets},
                   {"k_complements", ws.k_complements},
                   {"c", io::vector_to_json(ws.c)},
                   {"draws_used", ws.draws_used},
                   {"abs_det_j2", chk.lhs},
                   {"product_rhs", chk.rhs},
                   {"const_c", chk.const_c},
                   {"rel_err", rel},
                   {"pass", pass}}));
    return pass ? ok : property_fails;
}

int cmd_logdet_mc(const ExperimentConfig& c, std::ostream& out)
{
    const CovarianceFactor a = load_covariance(c);
    check_shape(a, c);
    const IndexPlan plan = build_index_plan(c.cfg);
    const LogDetSeries series = mc_expected_log_abs_det_j2(a, plan, c.trials, c.seed, c.workers);
    std::ostringstream s;
    s << "count,running_mean,zero_dets\n";
    for (const auto& cp : series.checkpoints) s << cp.count << ',' << format_double(cp.mean) << ',' << cp.zeros << '\n';
    emit(c, out, s.str());
    return ok;
}

json fit_to_json(const SlopeFit& f)
{
    return json{{"slope", f.slope},
                {"intercept", f.intercept},
                {"r_squared", f.r_squared},
                {"window_db", {f.window_db.first, f.window_db.second}}};
}

int cmd_mi_sweep(const ExperimentConfig& c, std::ostream& out, std::ostream& err)
{
    const CovarianceFactor a = load_covariance(c);
    check_shape(a, c);
    MiOptions opt;
    opt.sampler = c.sampler == "prior" ? InnerSampler::prior : InnerSampler::posterior;
    opt.workers = c.workers;
    std::vector<MiEstimate> pts;
    std::ostringstream s;
    s << "snr_db,mi_bits_per_cu,std_err,outer,inner,seed\n";
    for (double db : c.snr_grid_db) {
        const MiEstimate e = mi_rate_mc(a, c.cfg, db, c.outer, c.inner, c.seed, opt);
        pts.push_back(e);
        s << format_double(e.snr_db) << ',' << format_double(e.mi_bits_per_cu) << ',' << format_double(e.std_err) << ','
          << e.outer << ',' << e.inner << ',' << e.seed << '\n';
    }
    emit(c, out, s.str());
    json fit = config_to_json(c);
    if (pts.size() >= 3) fit["fit"] = fit_to_json(prelog_slope_fit(pts));
    else fit["fit"] = nullptr;
    const std::string text = dump(fit);
    if (!c.fit_out.empty())
        io::write_text(c.fit_out, text);
    else if (!c.out_path.empty())
        io::write_text(c.out_path + ".fit.json", text);
    else
        err << text;
    return ok;
}

std::vector<MiEstimate> read_sweep_csv(const std::string& path)
{
    std::ifstream in(path);
    if (!in) fail(ErrorCode::io, "cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) fail(ErrorCode::io, "empty CSV " + path);
    std::vector<std::string> header;
    {
        std::stringstream hs(line);
        std::string cell;
        while (std::getline(hs, cell, ',')) header.push_back(cell);
    }
    const auto col = [&](const std::string& name) {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) fail(ErrorCode::io, "CSV lacks column " + name);
        return static_cast<std::size_t>(it - header.begin());
    };
    const std::size_t c_snr = col("snr_db"), c_mi = col("mi_bits_per_cu");
    std::vector<MiEstimate> pts;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (cells.size() != header.size()) fail(ErrorCode::io, "ragged CSV row in " + path);
        MiEstimate e;
        try {
            e.snr_db = std::stod(cells[c_snr]);
            e.mi_bits_per_cu = std::stod(cells[c_mi]);
        } catch (const std::exception&) {
            fail(ErrorCode::io, "non-numeric CSV cell in " + path);
        }
        pts.push_back(e);
    }
    return pts;
}

int cmd_slope(const ExperimentConfig& c, std::ostream& out)
{
    if (c.in_path.empty()) fail(ErrorCode::invalid_argument, "slope needs --in");
    const auto pts = read_sweep_csv(c.in_path);
    emit(c, out, dump(fit_to_json(prelog_slope_fit(pts))));
    return ok;
}

struct Flags {
    int n = 0, q = 0, m = 0;
    std::vector<int> keep;
    std::uint64_t cov_seed = 0;
    std::string matrix;
    std::vector<double> snr;
    std::uint64_t outer = 0, inner = 0, trials = 0, seed = 0, inject = 0, fd_instances = 0;
    std::string out, config, sampler, backend, in, fit_out;
    int workers = 1, m_max = 0;
    double tol = 0.0, noisy = 0.0;
    bool prime = false;
};

void add_options(CLI::App* sub, Flags& f)
{
    sub->add_option("--config", f.config, "JSON config document (flags override it)");
    sub->add_option("--seed", f.seed, "top-level seed");
    sub->add_option("--out", f.out, "output path (default: stdout)");
    sub->add_option("--workers", f.workers, "worker threads");
    sub->add_option("--tol", f.tol, "relative rank tolerance");
    sub->add_option("--n", f.n, "block length N");
    sub->add_option("--q", f.q, "covariance rank Q");
    sub->add_option("--m", f.m, "receive antennas M");
    sub->add_option("--dft-keep", f.keep, "DFT covariance with these columns")->delimiter(',');
    sub->add_option("--random-seed", f.cov_seed, "random covariance with this seed");
    sub->add_option("--matrix", f.matrix, "covariance matrix JSON file");
    sub->add_option("--backend", f.backend, "kernel backend: automatic, scalar, avx2");
}

ExperimentConfig merge(const CLI::App* sub, const Flags& f)
{
    ExperimentConfig c;
    if (sub->count("--config")) c = config_from_json(io::read_json(f.config));
    const auto has = [&](const char* name) {
        try {
            return sub->count(name) > 0;
        } catch (const CLI::OptionNotFound&) {
            return false;
        }
    };
    if (has("--seed")) c.seed = f.seed;
    if (has("--out")) c.out_path = f.out;
    if (has("--workers")) c.workers = f.workers;
    if (has("--tol")) c.tol = f.tol;
    if (has("--n")) c.cfg.n = f.n;
    if (has("--q")) c.cfg.q = f.q;
    if (has("--m")) c.cfg.m = f.m;
    if (has("--dft-keep")) {
        c.covariance.kind = CovarianceSource::Kind::dft;
        c.covariance.keep_cols = f.keep;
    }
    if (has("--random-seed")) {
        c.covariance.kind = CovarianceSource::Kind::random;
        c.covariance.seed = f.cov_seed;
    }
    if (has("--matrix")) {
        c.covariance.kind = CovarianceSource::Kind::file;
        c.covariance.path = f.matrix;
    }
    if (has("--backend")) c.backend = f.backend;
    if (has("--snr-db")) c.snr_grid_db = f.snr;
    if (has("--outer")) c.outer = f.outer;
    if (has("--inner")) c.inner = f.inner;
    if (has("--trials")) c.trials = f.trials;
    if (has("--m-max")) c.m_max = f.m_max;
    if (has("--noisy-snr-db")) c.noisy_snr_db = f.noisy;
    if (has("--inject-zero-trial")) c.inject_zero_trial = f.inject;
    if (has("--sampler")) c.sampler = f.sampler;
    if (has("--in")) c.in_path = f.in;
    if (has("--fit-out")) c.fit_out = f.fit_out;
    if (has("--prime")) c.prime = f.prime;
    if (has("--fd-instances")) c.fd_instances = f.fd_instances;
    if (c.covariance.kind == CovarianceSource::Kind::file && sub->get_name() != "check-a") {
        // the file fixes N and Q
        const CovarianceFactor a = io::read_covariance(c.covariance.path);
        c.cfg.n = a.n();
        c.cfg.q = a.q();
    }
    return normalized(c);
}

} // namespace

int run(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Correlated block-fading SIMO channel laboratory", "simolab"};
    app.require_subcommand(1);
    Flags f;

    struct Command {
        const char* name;
        const char* help;
        std::function<int(const ExperimentConfig&)> body;
    };
    const std::vector<Command> commands{
        {"prelog", "pre-log staircase over M = 1..m_max", [&](const ExperimentConfig& c) { return cmd_prelog(c, out); }},
        {"plan", "pilot/data/row index plan", [&](const ExperimentConfig& c) { return cmd_plan(c, out); }},
        {"check-a", "every-Q-rows-independent check", [&](const ExperimentConfig& c) { return cmd_check_a(c, out); }},
        {"gen-cov", "write a covariance factor as JSON", [&](const ExperimentConfig& c) { return cmd_gen_cov(c, out); }},
        {"recover", "blind recovery round trips", [&](const ExperimentConfig& c) { return cmd_recover(c, out); }},
        {"jac-verify", "Jacobian factorization, finite-difference and homogeneity checks",
         [&](const ExperimentConfig& c) { return cmd_jac_verify(c, out); }},
        {"witness", "witness vectors and the det J2 product identity",
         [&](const ExperimentConfig& c) { return cmd_witness(c, out); }},
        {"logdet-mc", "running mean of ln|det J2(s)|", [&](const ExperimentConfig& c) { return cmd_logdet_mc(c, out); }},
        {"mi-sweep", "mutual information over an SNR grid with slope fit",
         [&](const ExperimentConfig& c) { return cmd_mi_sweep(c, out, err); }},
        {"slope", "slope fit of a mi-sweep CSV", [&](const ExperimentConfig& c) { return cmd_slope(c, out); }},
    };
    std::vector<CLI::App*> subs;
    for (const auto& cmd : commands) {
        CLI::App* sub = app.add_subcommand(cmd.name, cmd.help);
        add_options(sub, f);
        subs.push_back(sub);
    }
    const auto sub_named = [&](const char* name) { return app.get_subcommand(name); };
    sub_named("prelog")->add_option("--m-max", f.m_max, "largest antenna count");
    for (const char* name : {"mi-sweep"}) {
        CLI::App* s = sub_named(name);
        s->add_option("--snr-db", f.snr, "SNR grid in dB")->delimiter(',');
        s->add_option("--outer", f.outer, "outer Monte Carlo draws per SNR");
        s->add_option("--inner", f.inner, "inner draws per outer draw");
        s->add_option("--sampler", f.sampler, "inner sampler: posterior or prior");
        s->add_option("--fit-out", f.fit_out, "path of the JSON fit record");
    }
    for (const char* name : {"recover", "jac-verify", "logdet-mc"}) sub_named(name)->add_option("--trials", f.trials, "trial count");
    sub_named("recover")->add_option("--noisy-snr-db", f.noisy, "least-squares recovery from noisy outputs at this SNR");
    sub_named("recover")->add_option("--inject-zero-trial", f.inject, "zero the first data symbol of this trial");
    sub_named("jac-verify")->add_option("--fd-instances", f.fd_instances, "instances with finite-difference checks");
    sub_named("check-a")->add_flag("--prime", f.prime, "also search for a Property (A') row subset (needs --m >= 2)");
    sub_named("slope")->add_option("--in", f.in, "mi-sweep CSV");

    std::vector<const char*> cargv;
    for (const auto& a : argv) cargv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(cargv.size()), cargv.data());
    } catch (const CLI::ParseError& e) {
        std::ostringstream o, er;
        app.exit(e, o, er);
        err << o.str() << er.str();
        return e.get_exit_code() == 0 ? ok : usage_error;
    }

    for (std::size_t i = 0; i < commands.size(); ++i) {
        if (!subs[i]->parsed()) continue;
        try {
            const ExperimentConfig c = merge(subs[i], f);
            kernels::set_default_backend(c.backend == "scalar" ? kernels::Backend::scalar
                                         : c.backend == "avx2" ? kernels::Backend::avx2
                                                               : kernels::Backend::automatic);
            return commands[i].body(c);
        } catch (const Error& e) {
            err << "error: " << e.what() << '\n';
            return exit_code_for(e.code());
        } catch (const std::exception& e) {
            err << "error: " << e.what() << '\n';
            return usage_error;
        }
    }
    return usage_error;
}

} // namespace simo::cli
