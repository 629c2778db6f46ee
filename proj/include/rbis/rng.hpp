// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <random>

namespace rbis {

/// Seedable generator with pinned transforms so traces replay exactly.
///
/// Engine: std::mt19937_64 (bit-exact output sequence mandated by the C++
/// standard). Transforms, fixed here rather than taken from <random>
/// distributions (whose sequences are implementation-defined):
///   uniform double in [0,1):  (x >> 11) * 2^-53
///   standard normal:          Box-Muller cosine branch,
///                             sqrt(-2 ln(1-u1)) * cos(2*pi*u2)
///                             (always exactly two uniform draws)
///   bernoulli(p):             next_unit() < p (one draw, also when p == 0)
/// Sub-streams are derived from a master seed with SplitMix64.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Deterministic per-purpose stream: seed' = splitmix64(master ^ (id+1)*PHI).
    static Rng sub_stream(std::uint64_t master_seed, std::uint64_t stream_id);

    std::uint64_t next_u64() { return engine_(); }

    double next_unit()
    {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    bool bernoulli(double p) { return next_unit() < p; }

    double next_gauss();

private:
    std::mt19937_64 engine_;
};

} // namespace rbis
