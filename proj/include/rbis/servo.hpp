// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>

namespace rbis {

struct ServoConfig {
    double kp{0.7};
    double ki{0.3};
    std::uint64_t step_threshold_ns{10'000'000}; ///< beyond this, step instead of slewing
    std::int64_t max_freq_ppb{500'000};
    std::uint64_t lock_threshold_ns{50'000};
    std::uint32_t lock_count{5};

    /// Throws std::invalid_argument on kp <= 0, ki < 0 or lock_count < 1.
    void validate() const;
};

enum class ServoPhase : std::uint8_t { Init, Stepping, Tracking, Locked };

const char* to_string(ServoPhase phase);

/// What the servo wants done to the clock.
struct ServoAction {
    enum class Kind : std::uint8_t { Step, SetFreq };
    Kind kind{Kind::SetFreq};
    std::int64_t value{0}; ///< Step: delta_ns; SetFreq: absolute adj_ppb
};

/// Interface so alternative servo laws can slot in behind the same loop.
class ClockServo {
public:
    virtual ~ClockServo() = default;

    /// One offset sample (slave minus master, ns) observed over interval_ns.
    virtual ServoAction sample(std::int64_t offset_ns, std::uint64_t interval_ns) = 0;
    virtual void reset() = 0;
    virtual ServoPhase phase() const = 0;
};

/// PI servo: the first sample always steps; samples beyond step_threshold
/// step and reset the integral; everything else slews with
/// output = -(kp * offset_rate_ppb + integral), integral anti-windup clamped
/// at max_freq_ppb. Lock is declared after lock_count consecutive samples
/// inside lock_threshold and released on the first sample outside it.
class PiServo final : public ClockServo {
public:
    PiServo() : PiServo(ServoConfig{}) {}
    explicit PiServo(const ServoConfig& config);

    ServoAction sample(std::int64_t offset_ns, std::uint64_t interval_ns) override;
    void reset() override;
    ServoPhase phase() const override { return phase_; }

    double integral_ppb() const { return integral_ppb_; }
    std::int64_t last_output_ppb() const { return last_output_ppb_; }
    std::uint32_t consecutive_in_lock() const { return consecutive_in_lock_; }
    const ServoConfig& config() const { return config_; }

private:
    ServoConfig config_;
    ServoPhase phase_{ServoPhase::Init};
    double integral_ppb_{0.0};
    std::uint32_t consecutive_in_lock_{0};
    std::int64_t last_output_ppb_{0};
};

} // namespace rbis
