// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "simolab/model.hpp"

namespace simo::cli {

enum ExitCode : int { ok = 0, property_fails = 1, usage_error = 2, numerical_degeneracy = 3 };

struct CovarianceSource {
    enum class Kind { dft, random, file };
    Kind kind = Kind::random;
    std::vector<int> keep_cols;          // dft
    std::optional<std::uint64_t> seed;   // random; defaults to the top-level seed
    std::string path;                    // file
};

struct ExperimentConfig {
    ChannelConfig cfg{3, 2, 2};
    CovarianceSource covariance;
    std::vector<double> snr_grid_db{25.0, 30.0, 35.0, 40.0};
    std::uint64_t outer = 2000;
    std::uint64_t inner = 10000;
    std::uint64_t trials = 1000;
    std::uint64_t seed = 1;
    std::string out_path;
    int workers = 1;
    double tol = 1e-10;

    int m_max = 6;
    std::optional<double> noisy_snr_db;
    std::optional<std::uint64_t> inject_zero_trial;
    std::string sampler = "posterior";
    std::string backend = "automatic";
    std::string in_path;
    std::string fit_out;
    bool prime = false;
    std::uint64_t fd_instances = 10;

    void validate() const;
};

// Missing keys keep their defaults.
ExperimentConfig config_from_json(const nlohmann::json& j, ExperimentConfig base = {});
nlohmann::json config_to_json(const ExperimentConfig& c);

CovarianceFactor load_covariance(const ExperimentConfig& c);

// Runs one subcommand; argv[0] is the program name.
int run(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err);

} // namespace simo::cli
