// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "rbis/rng.hpp"

namespace rbis {

enum class DelayDistribution : std::uint8_t { Gaussian, Uniform, Fixed };

std::string to_string(DelayDistribution d);

/// Delay + loss behaviour of one simulated link.
struct ChannelModel {
    std::uint64_t mean_delay_ns{1'000'000};
    std::uint64_t sigma_ns{0};
    DelayDistribution distribution{DelayDistribution::Fixed};
    double drop_prob{0.0};
    std::uint64_t min_delay_ns{1000}; ///< truncation floor

    void validate() const; ///< throws std::invalid_argument
};

/// One per-message draw. The RNG is advanced by a fixed number of draws for
/// a given distribution whether or not the message is dropped, so drop
/// decisions never shift later delays.
struct DelaySample {
    bool dropped{false};
    std::uint64_t delay_ns{0}; ///< clipped at min_delay_ns
};

DelaySample sample_delay(const ChannelModel& channel, Rng& rng);

/// Link presets by measured RTT statistics: "bss24" 3.19/1.80 ms,
/// "bss5" 2.67/0.64 ms, "adhoc" 0.87/0.93 ms, "ethernet" 0.45/0.05 ms.
/// halved=true maps the RTT stats to a one-way delay model (mean / 2,
/// sigma / sqrt(2)) so that two independent legs add back up to the measured
/// RTT distribution. Throws std::invalid_argument on an unknown name.
ChannelModel channel_preset(std::string_view name, bool halved);

const std::vector<std::string>& channel_preset_names();

} // namespace rbis
