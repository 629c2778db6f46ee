// SPDX-License-Identifier: Apache-2.0
#include "rbis/channel.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "rbis/time_types.hpp"

namespace rbis {

std::string to_string(DelayDistribution d)
{
    switch (d) {
    case DelayDistribution::Gaussian: return "gaussian";
    case DelayDistribution::Uniform: return "uniform";
    case DelayDistribution::Fixed: return "fixed";
    }
    return "?";
}

void ChannelModel::validate() const
{
    if (!(drop_prob >= 0.0 && drop_prob <= 1.0))
        throw std::invalid_argument("ChannelModel: drop_prob must be in [0,1]");
}

DelaySample sample_delay(const ChannelModel& channel, Rng& rng)
{
    DelaySample out;
    out.dropped = rng.bernoulli(channel.drop_prob);

    double delay = static_cast<double>(channel.mean_delay_ns);
    switch (channel.distribution) {
    case DelayDistribution::Gaussian:
        delay += static_cast<double>(channel.sigma_ns) * rng.next_gauss();
        break;
    case DelayDistribution::Uniform: {
        // Uniform with the configured sigma: half-width sqrt(3)*sigma.
        const double u = rng.next_unit();
        delay += (2.0 * u - 1.0) * std::sqrt(3.0) * static_cast<double>(channel.sigma_ns);
        break;
    }
    case DelayDistribution::Fixed:
        break;
    }

    const double floor_ns = static_cast<double>(channel.min_delay_ns);
    if (delay < floor_ns)
        delay = floor_ns;
    out.delay_ns = static_cast<std::uint64_t>(round_half_away(delay));
    return out;
}

namespace {

struct PresetRow {
    const char* name;
    std::uint64_t rtt_mean_ns;
    std::uint64_t rtt_sigma_ns;
};

constexpr PresetRow kPresets[] = {
    {"bss24", 3'190'000, 1'800'000},
    {"bss5", 2'670'000, 640'000},
    {"adhoc", 870'000, 930'000},
    {"ethernet", 450'000, 50'000},
};

} // namespace

ChannelModel channel_preset(std::string_view name, bool halved)
{
    for (const auto& row : kPresets) {
        if (name != row.name)
            continue;
        ChannelModel m;
        // One-way model from RTT stats: the sum of two independent legs must
        // give back the measured RTT mean and sigma, so mean/2 but sigma/sqrt(2).
        m.mean_delay_ns = halved ? row.rtt_mean_ns / 2 : row.rtt_mean_ns;
        m.sigma_ns = halved ? static_cast<std::uint64_t>(round_half_away(
                                  static_cast<double>(row.rtt_sigma_ns) / std::sqrt(2.0)))
                            : row.rtt_sigma_ns;
        m.distribution = DelayDistribution::Gaussian;
        m.drop_prob = 0.0;
        m.min_delay_ns = 1000;
        return m;
    }
    throw std::invalid_argument("unknown channel preset: " + std::string(name));
}

const std::vector<std::string>& channel_preset_names()
{
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v;
        for (const auto& row : kPresets)
            v.emplace_back(row.name);
        return v;
    }();
    return names;
}

} // namespace rbis
