// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rbis/channel.hpp"
#include "rbis/clock.hpp"
#include "rbis/servo.hpp"
#include "rbis/stats.hpp"
#include "rbis/trace.hpp"

namespace rbis {

enum class TimestampSource : std::uint8_t { Tsf, System };

std::string to_string(TimestampSource s);

struct SimConfig {
    std::uint64_t seed{1};
    double duration_s{300.0};
    std::uint64_t beacon_interval_ns{102'400'000};
    std::uint32_t follow_up_every{1};
    TimestampSource timestamp_source{TimestampSource::Tsf};
    SimulatedClock::Params master_clock{};
    SimulatedClock::Params slave_clock{};
    ChannelModel sync_channel{};
    ChannelModel followup_channel{};
    double sync_drop_prob{0.0}; ///< beacon-level loss, on top of sync_channel.drop_prob
    ServoConfig servo{};
    bool servo_enabled{false};
    std::size_t estimator_window{64};
    std::uint64_t pairing_timeout_ns{1'000'000'000};
    std::size_t pending_capacity{128};

    void validate() const; ///< throws std::invalid_argument
};

enum class SimEventKind : std::uint8_t { BeaconEmit, SyncDeliver, FollowUpDeliver, ServoTick };

/// Queue entry; ordering is (fire_at, insertion order), strictly
/// deterministic. Delivery events carry the encoded message bytes.
struct SimEvent {
    TimePointNs fire_at{};
    std::uint64_t order{0};
    SimEventKind kind{SimEventKind::BeaconEmit};
    std::vector<std::uint8_t> payload;
};

/// Per-run accounting. Every emitted beacon lands in exactly one of the four
/// fate buckets, so conservation_ok() must hold for any finished run.
struct RunCounters {
    std::uint64_t beacons_emitted{0};
    std::uint64_t tuples_formed{0};
    std::uint64_t sync_drops{0};        ///< SYNC lost (channel or beacon-level draw)
    std::uint64_t followup_losses{0};   ///< SYNC delivered, covering FOLLOW_UP lost
    std::uint64_t pairing_expiries{0};  ///< timed out, capacity-evicted, or left at end
    std::uint64_t followups_emitted{0};
    std::uint64_t followups_dropped{0};
    std::uint64_t estimator_discards{0};

    bool conservation_ok() const
    {
        return beacons_emitted ==
               tuples_formed + sync_drops + followup_losses + pairing_expiries;
    }
};

struct RunResult {
    TraceLog trace;
    RunCounters counters;
    std::optional<SummaryMetrics> offset_stats;      ///< over trace offset_ns
    std::optional<SummaryMetrics> window_skew_stats; ///< over trace window_skew_ppm
};

/// Execute one master/one slave experiment. Beacons are emitted at
/// master-clock multiples of beacon_interval_ns that fall inside duration_s;
/// in-flight messages then drain so every beacon's fate is accounted.
/// Identical (config, seed) gives a byte-identical trace.
RunResult run_simulation(const SimConfig& config);

struct BenchResult {
    SummaryMetrics rtt;              ///< nanoseconds, over surviving probes
    std::uint64_t probes_sent{0};
    std::uint64_t probes_dropped{0}; ///< either direction lost
};

/// Request/response delay benchmark: RTT = two independent one-way draws per
/// probe. Throws std::invalid_argument for probes < 2 and std::runtime_error
/// if drops leave fewer than two RTT samples.
BenchResult rtt_bench(const ChannelModel& channel, std::uint64_t probes, std::uint64_t seed);

} // namespace rbis
