// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <string_view>
#include <utility>

#include "simolab/types.hpp"

namespace simo {

// Philox4x32-10 block function.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key) noexcept;

std::uint64_t splitmix64(std::uint64_t x) noexcept;

// Stateless counter-based stream. Draw `i` of a stream depends only on
// (seed, stream id, i), so evaluation order and worker count never matter.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0) noexcept : seed_(seed), stream_(stream) {}

    CounterRng substream(std::uint64_t id) const noexcept;
    CounterRng substream(std::string_view label) const noexcept;

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream() const noexcept { return stream_; }

    std::array<std::uint32_t, 4> block(std::uint64_t index) const noexcept;

    // Open interval (0,1), 53-bit resolution; two per block.
    std::pair<double, double> uniform_pair(std::uint64_t index) const noexcept;
    double uniform(std::uint64_t index) const noexcept { return uniform_pair(index).first; }

    // Two independent N(0,1) draws.
    std::pair<double, double> normal_pair(std::uint64_t index) const noexcept;

    // CN(0,1): E|z|^2 = 1.
    cplx complex_normal(std::uint64_t index) const noexcept;

    // Fills v with CN(0,1) entries using draws [first, first + v.size()).
    void fill_complex_normal(CVector& v, std::uint64_t first = 0) const;

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
};

} // namespace simo
