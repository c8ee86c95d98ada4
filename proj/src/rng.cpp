// SPDX-License-Identifier: Apache-2.0
#include "simolab/rng.hpp"

#include <cmath>
#include <numbers>

namespace simo {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) noexcept
{
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

inline double to_open_unit(std::uint32_t hi, std::uint32_t lo) noexcept
{
    const std::uint64_t bits = (static_cast<std::uint64_t>(hi) << 32 | lo) >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

std::uint64_t fnv1a(std::string_view s) noexcept
{
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

} // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key) noexcept
{
    for (int round = 0; round < 10; ++round) {
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kMul0, ctr[0], hi0, lo0);
        mulhilo(kMul1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kWeyl0;
        key[1] += kWeyl1;
    }
    return ctr;
}

std::uint64_t splitmix64(std::uint64_t x) noexcept
{
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

CounterRng CounterRng::substream(std::uint64_t id) const noexcept
{
    return CounterRng(seed_, splitmix64(stream_ ^ splitmix64(id ^ 0x5851F42D4C957F2Dull)));
}

CounterRng CounterRng::substream(std::string_view label) const noexcept { return substream(fnv1a(label)); }

std::array<std::uint32_t, 4> CounterRng::block(std::uint64_t index) const noexcept
{
    return philox4x32({static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                       static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)},
                      {static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32)});
}

std::pair<double, double> CounterRng::uniform_pair(std::uint64_t index) const noexcept
{
    const auto b = block(index);
    return {to_open_unit(b[0], b[1]), to_open_unit(b[2], b[3])};
}

std::pair<double, double> CounterRng::normal_pair(std::uint64_t index) const noexcept
{
    const auto [u1, u2] = uniform_pair(index);
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double th = 2.0 * std::numbers::pi * u2;
    return {r * std::cos(th), r * std::sin(th)};
}

cplx CounterRng::complex_normal(std::uint64_t index) const noexcept
{
    const auto [u1, u2] = uniform_pair(index);
    const double r = std::sqrt(-std::log(u1));
    const double th = 2.0 * std::numbers::pi * u2;
    return {r * std::cos(th), r * std::sin(th)};
}

void CounterRng::fill_complex_normal(CVector& v, std::uint64_t first) const
{
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = complex_normal(first + static_cast<std::uint64_t>(i));
}

} // namespace simo
