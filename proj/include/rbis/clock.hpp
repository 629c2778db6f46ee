// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>

#include "rbis/time_types.hpp"

namespace rbis {

/// Drifting local clock evaluated piecewise-linearly against true time.
///
/// Within a segment, a read at true time t returns
///     base_value + (t - base_true) + round_half_away((t - base_true) * rate_dev_ppb * 1e-9)
/// where rate_dev_ppb = skew_ppm * 1e3 + freq_adj_ppb. Adjustments
/// (step / set_freq) close the current segment at the adjustment instant, so
/// past reads never change retroactively. True-time inputs must be
/// non-decreasing across reads and adjustments.
class SimulatedClock {
public:
    struct Params {
        std::int64_t offset_ns{0};   ///< clock-minus-true at base_true_ns
        double skew_ppm{0.0};        ///< oscillator frequency error, |skew| <= 1000
        std::int64_t freq_adj_ppb{0};///< initial servo correction
        TimePointNs base_true_ns{};  ///< segment origin in true time
        std::int64_t max_adj_ppb{500'000}; ///< set_freq saturation bound
    };

    SimulatedClock() : SimulatedClock(Params{}) {}
    explicit SimulatedClock(const Params& params);

    /// Read the clock at true time `true_now`. Throws std::invalid_argument
    /// if `true_now` precedes the last read or adjustment.
    TimePointNs read(TimePointNs true_now);

    /// TSF view of the same oscillator: floor(read / 1000), in microseconds.
    TsfTimestamp tsf(TimePointNs true_now);

    /// Shift all subsequent reads by exactly delta_ns. A negative step is
    /// rejected unless `allow_backward` is set (servo start-up only).
    void step(std::int64_t delta_ns, TimePointNs true_now, bool allow_backward = false);

    /// Replace the frequency correction from `true_now` forward; the clock
    /// value at `true_now` is continuous. Values beyond max_adj_ppb saturate
    /// and set the saturation flag. Returns the applied (possibly clamped)
    /// correction.
    std::int64_t set_freq(std::int64_t adj_ppb, TimePointNs true_now);

    /// True time at which the current segment reads `clock_value`
    /// (clock_value must not precede the segment base reading).
    TimePointNs true_time_at(std::uint64_t clock_value_ns) const;

    double skew_ppm() const { return skew_ppm_; }
    std::int64_t freq_adj_ppb() const { return freq_adj_ppb_; }
    bool last_adjustment_saturated() const { return saturated_; }

private:
    std::uint64_t value_at(TimePointNs t) const;
    void require_monotone(TimePointNs t) const;
    double rate_dev_ppb() const;

    double skew_ppm_;
    std::int64_t freq_adj_ppb_;
    std::int64_t max_adj_ppb_;
    TimePointNs base_true_;
    std::uint64_t base_value_;
    TimePointNs last_true_;
    bool saturated_{false};
};

} // namespace rbis
