// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <compare>
#include <cstdint>

namespace rbis {

/// Nanoseconds since an arbitrary epoch. One instance per clock domain;
/// values from different domains only meet inside offset computations.
struct TimePointNs {
    std::uint64_t ns{0};

    friend auto operator<=>(const TimePointNs&, const TimePointNs&) = default;
};

/// Signed delta between two TimePointNs of the same domain.
constexpr std::int64_t operator-(TimePointNs a, TimePointNs b)
{
    return static_cast<std::int64_t>(a.ns - b.ns);
}

constexpr TimePointNs operator+(TimePointNs t, std::int64_t delta_ns)
{
    return TimePointNs{t.ns + static_cast<std::uint64_t>(delta_ns)};
}

/// 64-bit counter in microseconds, ticking at exactly 1 MHz relative to the
/// emitting clock. Wraparound exceeds 10^5 years and is not handled.
struct TsfTimestamp {
    std::uint64_t us{0};

    friend auto operator<=>(const TsfTimestamp&, const TsfTimestamp&) = default;
};

/// Round half away from zero, the one rounding rule applied to fractional
/// nanoseconds throughout.
std::int64_t round_half_away(double x);

} // namespace rbis
