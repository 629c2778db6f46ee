// SPDX-License-Identifier: Apache-2.0
#include "rbis/rng.hpp"

#include <cmath>
#include <numbers>

namespace rbis {

namespace {

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

} // namespace

Rng Rng::sub_stream(std::uint64_t master_seed, std::uint64_t stream_id)
{
    return Rng(splitmix64(master_seed ^ ((stream_id + 1) * 0x9E3779B97F4A7C15ULL)));
}

double Rng::next_gauss()
{
    const double u1 = next_unit();
    const double u2 = next_unit();
    return std::sqrt(-2.0 * std::log(1.0 - u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
}

} // namespace rbis
