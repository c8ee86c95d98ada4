// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <boost/rational.hpp>

#include "simolab/model.hpp"

namespace simo {

using Rational = boost::rational<std::int64_t>;

enum class Regime { antenna_limited, block_limited };
const char* to_string(Regime r) noexcept;

// "p/q", or "p" for integers.
std::string format_rational(const Rational& r);

struct PrelogReport {
    Rational prelog;
    std::optional<int> critical_m; // empty when Q == N
    Regime regime = Regime::antenna_limited;
};

// min[1 - 1/N, M(1 - Q/N)]
PrelogReport prelog(const ChannelConfig& cfg);

// ceil((n-1)/(n-q)); requires q < n.
int critical_antennas(int n, int q);

// All indices are zero-based. Time t of antenna r sits at stacked position r*N + t.
struct IndexPlan {
    ChannelConfig cfg;
    int alpha = 0;
    int shortened = 0;                        // L
    std::vector<int> pilot_set;               // B = [0, alpha)
    std::vector<int> data_set;                // D = [alpha, N)
    std::vector<std::vector<int>> row_sets;   // I_r, stacked positions, ascending
    std::vector<int> selected;                // I, ascending
    std::vector<std::vector<int>> kept_times; // T_r: times observed at antenna r
    std::vector<std::vector<int>> owned_data; // data times whose a-column is carried by antenna r; partitions D

    int size() const { return static_cast<int>(selected.size()); }
    int time_of(int pos) const { return pos % cfg.n; }
    int antenna_of(int pos) const { return pos / cfg.n; }
    bool is_pilot_time(int t) const { return t < alpha; }
};

IndexPlan build_index_plan(const ChannelConfig& cfg);

// Saturates at UINT64_MAX.
std::uint64_t binomial(int n, int k) noexcept;

struct PropertyAResult {
    bool holds = false;
    std::optional<std::vector<int>> failing_rows; // zero-based row indices
    std::uint64_t subsets_checked = 0;
};

inline constexpr std::uint64_t property_a_subset_limit = 10'000'000;

// Every Q-row submatrix S must satisfy sigma_min(S) > tol * sigma_max(S).
// Reports the lexicographically first failing subset. Throws too_large when
// C(N,Q) exceeds property_a_subset_limit.
PropertyAResult check_property_a(const CMatrix& a, double tol = 1e-10, int workers = 1);
PropertyAResult check_property_a(const CovarianceFactor& a, double tol = 1e-10, int workers = 1);

enum class SearchOutcome { holds, fails, not_found_within_budget };
const char* to_string(SearchOutcome o) noexcept;

struct PropertyAPrimeResult {
    SearchOutcome outcome = SearchOutcome::fails;
    std::optional<std::vector<int>> witness_set; // K, zero-based
    int cardinality = 0;
    bool exhaustive = false;
    std::uint64_t sets_tried = 0;

    bool holds() const { return outcome == SearchOutcome::holds; }
};

inline constexpr std::uint64_t property_a_prime_exhaustive_limit = 1'000'000;

// |K| = min(ceil((MQ-1)/(M-1)), N). Exhaustive in lexicographic order when
// C(N,|K|) <= property_a_prime_exhaustive_limit, otherwise `budget` seeded
// random draws. A random search that finds nothing reports
// not_found_within_budget, never fails.
PropertyAPrimeResult check_property_a_prime(const CMatrix& a, const ChannelConfig& cfg, double tol = 1e-10,
                                            std::uint64_t seed = 0, std::uint64_t budget = 100'000);

// Whether every Q-subset of the given rows passes the rank test.
bool rows_satisfy_property_a(const CMatrix& a, const std::vector<int>& rows, double tol);

} // namespace simo
