// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace simo {

// Splits [0, count) into contiguous chunks, one per worker. The callback gets
// (begin, end, worker). workers <= 1 runs inline. Exceptions are rethrown.
void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t, std::size_t, int)>& body);

// Fixed-shape pairwise summation: same result for the same input no matter how
// the values were produced.
double pairwise_sum(std::span<const double> v) noexcept;

struct MeanStd {
    double mean;
    double std_err;
};

// Mean and standard error of the mean (sample variance with n-1).
MeanStd mean_and_std_err(std::span<const double> v);

} // namespace simo
