// SPDX-License-Identifier: Apache-2.0
#include "rbis/servo.hpp"

#include <algorithm>
#include <cstdlib>
#include <stdexcept>

#include "rbis/time_types.hpp"

namespace rbis {

void ServoConfig::validate() const
{
    if (!(kp > 0.0))
        throw std::invalid_argument("ServoConfig: kp must be > 0");
    if (ki < 0.0)
        throw std::invalid_argument("ServoConfig: ki must be >= 0");
    if (lock_count < 1)
        throw std::invalid_argument("ServoConfig: lock_count must be >= 1");
    if (max_freq_ppb <= 0)
        throw std::invalid_argument("ServoConfig: max_freq_ppb must be > 0");
}

const char* to_string(ServoPhase phase)
{
    switch (phase) {
    case ServoPhase::Init:     return "init";
    case ServoPhase::Stepping: return "stepping";
    case ServoPhase::Tracking: return "tracking";
    case ServoPhase::Locked:   return "locked";
    }
    return "?";
}

PiServo::PiServo(const ServoConfig& config) : config_(config)
{
    config_.validate();
}

void PiServo::reset()
{
    phase_ = ServoPhase::Init;
    integral_ppb_ = 0.0;
    consecutive_in_lock_ = 0;
    last_output_ppb_ = 0;
}

ServoAction PiServo::sample(std::int64_t offset_ns, std::uint64_t interval_ns)
{
    if (interval_ns == 0)
        throw std::invalid_argument("PiServo: interval_ns must be > 0");

    const std::uint64_t magnitude = static_cast<std::uint64_t>(std::llabs(offset_ns));
    if (phase_ == ServoPhase::Init || magnitude > config_.step_threshold_ns) {
        integral_ppb_ = 0.0;
        consecutive_in_lock_ = 0;
        phase_ = ServoPhase::Stepping;
        return {ServoAction::Kind::Step, -offset_ns};
    }

    // Offset expressed as a rate over the sample interval, in ppb.
    const double offset_rate_ppb =
        static_cast<double>(offset_ns) * 1e9 / static_cast<double>(interval_ns);
    const double limit = static_cast<double>(config_.max_freq_ppb);
    integral_ppb_ = std::clamp(integral_ppb_ + config_.ki * offset_rate_ppb, -limit, limit);
    const double output = std::clamp(-(config_.kp * offset_rate_ppb + integral_ppb_),
                                     -limit, limit);
    last_output_ppb_ = round_half_away(output);

    if (phase_ == ServoPhase::Stepping)
        phase_ = ServoPhase::Tracking;

    if (magnitude <= config_.lock_threshold_ns) {
        if (consecutive_in_lock_ < config_.lock_count)
            ++consecutive_in_lock_;
        if (consecutive_in_lock_ >= config_.lock_count)
            phase_ = ServoPhase::Locked;
    } else {
        consecutive_in_lock_ = 0;
        if (phase_ == ServoPhase::Locked)
            phase_ = ServoPhase::Tracking;
    }

    return {ServoAction::Kind::SetFreq, last_output_ppb_};
}

} // namespace rbis
