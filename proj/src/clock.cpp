// SPDX-License-Identifier: Apache-2.0
#include "rbis/clock.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace rbis {

std::int64_t round_half_away(double x)
{
    return static_cast<std::int64_t>(x >= 0.0 ? std::floor(x + 0.5) : std::ceil(x - 0.5));
}

SimulatedClock::SimulatedClock(const Params& params)
    : skew_ppm_(params.skew_ppm),
      freq_adj_ppb_(params.freq_adj_ppb),
      max_adj_ppb_(params.max_adj_ppb),
      base_true_(params.base_true_ns),
      base_value_(static_cast<std::uint64_t>(
          static_cast<std::int64_t>(params.base_true_ns.ns) + params.offset_ns)),
      last_true_(params.base_true_ns)
{
    if (!(std::abs(params.skew_ppm) <= 1000.0))
        throw std::invalid_argument("SimulatedClock: |skew_ppm| must be <= 1000, got " +
                                    std::to_string(params.skew_ppm));
    if (params.max_adj_ppb < 0)
        throw std::invalid_argument("SimulatedClock: max_adj_ppb must be >= 0");
}

double SimulatedClock::rate_dev_ppb() const
{
    return skew_ppm_ * 1e3 + static_cast<double>(freq_adj_ppb_);
}

void SimulatedClock::require_monotone(TimePointNs t) const
{
    if (t < last_true_)
        throw std::invalid_argument("SimulatedClock: true time went backwards (" +
                                    std::to_string(t.ns) + " < " +
                                    std::to_string(last_true_.ns) + ")");
}

std::uint64_t SimulatedClock::value_at(TimePointNs t) const
{
    const std::int64_t delta = t - base_true_;
    const std::int64_t drift = round_half_away(static_cast<double>(delta) * rate_dev_ppb() * 1e-9);
    return base_value_ + static_cast<std::uint64_t>(delta + drift);
}

TimePointNs SimulatedClock::read(TimePointNs true_now)
{
    require_monotone(true_now);
    last_true_ = true_now;
    return TimePointNs{value_at(true_now)};
}

TsfTimestamp SimulatedClock::tsf(TimePointNs true_now)
{
    return TsfTimestamp{read(true_now).ns / 1000};
}

void SimulatedClock::step(std::int64_t delta_ns, TimePointNs true_now, bool allow_backward)
{
    require_monotone(true_now);
    if (delta_ns < 0 && !allow_backward)
        throw std::invalid_argument("SimulatedClock: backward step requires explicit permission");
    const std::uint64_t at_now = value_at(true_now);
    base_true_ = true_now;
    base_value_ = at_now + static_cast<std::uint64_t>(delta_ns);
    last_true_ = true_now;
}

std::int64_t SimulatedClock::set_freq(std::int64_t adj_ppb, TimePointNs true_now)
{
    require_monotone(true_now);
    std::int64_t applied = adj_ppb;
    saturated_ = false;
    if (applied > max_adj_ppb_) {
        applied = max_adj_ppb_;
        saturated_ = true;
    } else if (applied < -max_adj_ppb_) {
        applied = -max_adj_ppb_;
        saturated_ = true;
    }
    // Rebase so the value at true_now is continuous under the new rate.
    const std::uint64_t at_now = value_at(true_now);
    base_true_ = true_now;
    base_value_ = at_now;
    freq_adj_ppb_ = applied;
    last_true_ = true_now;
    return applied;
}

TimePointNs SimulatedClock::true_time_at(std::uint64_t clock_value_ns) const
{
    if (clock_value_ns < base_value_)
        throw std::invalid_argument("SimulatedClock: target reading precedes segment base");
    const double elapsed_clock = static_cast<double>(clock_value_ns - base_value_);
    const double rate = 1.0 + rate_dev_ppb() * 1e-9;
    return TimePointNs{base_true_.ns +
                       static_cast<std::uint64_t>(round_half_away(elapsed_clock / rate))};
}

} // namespace rbis
