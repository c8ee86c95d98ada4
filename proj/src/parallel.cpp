// SPDX-License-Identifier: Apache-2.0
#include "simolab/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace simo {

void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t, std::size_t, int)>& body)
{
    if (count == 0) return;
    const std::size_t w = std::clamp<std::size_t>(workers < 1 ? 1 : static_cast<std::size_t>(workers), 1, count);
    if (w == 1) {
        body(0, count, 0);
        return;
    }
    std::vector<std::thread> pool;
    std::exception_ptr first_error;
    std::mutex mu;
    const std::size_t chunk = (count + w - 1) / w;
    for (std::size_t k = 0; k < w; ++k) {
        const std::size_t b = k * chunk;
        const std::size_t e = std::min(count, b + chunk);
        if (b >= e) break;
        pool.emplace_back([&, b, e, k] {
            try {
                body(b, e, static_cast<int>(k));
            } catch (...) {
                std::lock_guard<std::mutex> lock(mu);
                if (!first_error) first_error = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

double pairwise_sum(std::span<const double> v) noexcept
{
    constexpr std::size_t kLeaf = 64;
    if (v.size() <= kLeaf) {
        double s = 0.0;
        for (double x : v) s += x;
        return s;
    }
    const std::size_t half = v.size() / 2;
    return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

MeanStd mean_and_std_err(std::span<const double> v)
{
    const double n = static_cast<double>(v.size());
    if (v.empty()) return {0.0, 0.0};
    const double mean = pairwise_sum(v) / n;
    if (v.size() < 2) return {mean, 0.0};
    std::vector<double> dev(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) dev[i] = (v[i] - mean) * (v[i] - mean);
    const double var = pairwise_sum(dev) / (n - 1.0);
    return {mean, std::sqrt(var / n)};
}

} // namespace simo
