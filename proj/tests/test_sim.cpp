// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "rbis/sim.hpp"

using namespace rbis;

namespace {

SimConfig quiet_config(double duration_s = 30.0)
{
    SimConfig cfg;
    cfg.duration_s = duration_s;
    cfg.slave_clock.skew_ppm = 3.96;
    cfg.sync_channel.distribution = DelayDistribution::Fixed;
    cfg.sync_channel.mean_delay_ns = 1'000'000;
    cfg.followup_channel = cfg.sync_channel;
    return cfg;
}

} // namespace

TEST_CASE("identical config and seed reproduce the identical run")
{
    auto cfg = quiet_config(20.0);
    cfg.sync_channel.distribution = DelayDistribution::Gaussian;
    cfg.sync_channel.sigma_ns = 200'000;
    cfg.sync_drop_prob = 0.05;
    cfg.seed = 321;

    const auto a = run_simulation(cfg);
    const auto b = run_simulation(cfg);
    CHECK(a.trace == b.trace);
    CHECK(a.counters.beacons_emitted == b.counters.beacons_emitted);
    CHECK(a.counters.tuples_formed == b.counters.tuples_formed);
    CHECK(a.counters.sync_drops == b.counters.sync_drops);

    cfg.seed = 322;
    const auto c = run_simulation(cfg);
    CHECK(a.trace != c.trace);
}

TEST_CASE("a 300 s run emits one beacon per interval")
{
    auto cfg = quiet_config(300.0);
    const auto result = run_simulation(cfg);
    CHECK(result.counters.beacons_emitted >= 2929);
    CHECK(result.counters.beacons_emitted <= 2931);
    CHECK(result.counters.tuples_formed == result.counters.beacons_emitted);
    CHECK(result.counters.conservation_ok());
}

TEST_CASE("noise-free skewed pair recovers the skew through the window fit")
{
    auto cfg = quiet_config(120.0);
    cfg.timestamp_source = TimestampSource::System;
    const auto result = run_simulation(cfg);
    REQUIRE(!result.trace.empty());
    const auto& last = result.trace.back();
    CHECK(last.window_skew_ppm == doctest::Approx(3.96).epsilon(0.0026));
    CHECK(last.skew_ppm == doctest::Approx(3.96).epsilon(0.0026));
    CHECK(last.dropped_since_last == 0);
    // Raw oscillator runs undisciplined: offsets grow by ~405.5 ns per beacon.
    CHECK(result.trace[10].offset_ns > result.trace[0].offset_ns);
}

TEST_CASE("beacon-level drops thin the tuple stream binomially")
{
    auto cfg = quiet_config(300.0);
    cfg.sync_drop_prob = 0.1;
    cfg.seed = 5;
    const auto result = run_simulation(cfg);
    const auto n = static_cast<double>(result.counters.beacons_emitted);
    const double expected = 0.9 * n;
    const double three_sigma = 3.0 * std::sqrt(n * 0.1 * 0.9);
    CHECK(static_cast<double>(result.counters.tuples_formed) >= expected - three_sigma);
    CHECK(static_cast<double>(result.counters.tuples_formed) <= expected + three_sigma);
    CHECK(result.counters.sync_drops ==
          result.counters.beacons_emitted - result.counters.tuples_formed);
    CHECK(result.counters.conservation_ok());

    // Gap rows must exist and carry the multiple-increment signature.
    bool saw_gap = false;
    for (std::size_t i = 1; i < result.trace.size(); ++i)
        saw_gap = saw_gap || result.trace[i].dropped_since_last > 0;
    CHECK(saw_gap);
}

TEST_CASE("conservation holds across randomized configurations")
{
    for (std::uint64_t i = 0; i < 25; ++i) {
        SimConfig cfg;
        cfg.seed = 1000 + i;
        cfg.duration_s = 5.0 + static_cast<double>(i % 7);
        cfg.beacon_interval_ns = 30'000'000 + 7'000'000 * (i % 5);
        cfg.follow_up_every = 1 + i % 4;
        cfg.slave_clock.skew_ppm = static_cast<double>(i % 11) - 5.0;
        cfg.slave_clock.offset_ns = static_cast<std::int64_t>(i * 1'000'000);
        cfg.sync_channel.distribution = DelayDistribution::Gaussian;
        cfg.sync_channel.mean_delay_ns = 1'000'000 + 300'000 * (i % 3);
        cfg.sync_channel.sigma_ns = 400'000;
        cfg.sync_channel.drop_prob = 0.05 * static_cast<double>(i % 4);
        cfg.followup_channel = cfg.sync_channel;
        cfg.followup_channel.drop_prob = 0.04 * static_cast<double>(i % 5);
        cfg.sync_drop_prob = i % 2 == 0 ? 0.08 : 0.0;
        cfg.pairing_timeout_ns = i % 3 == 0 ? 40'000'000 : 1'000'000'000;
        cfg.pending_capacity = i % 4 == 0 ? 2 : 128;
        cfg.servo_enabled = i % 2 == 1;

        CAPTURE(i);
        const auto result = run_simulation(cfg);
        CHECK(result.counters.conservation_ok());
        CHECK(result.counters.beacons_emitted > 0);
    }
}

TEST_CASE("followup losses are classified separately from sync drops")
{
    auto cfg = quiet_config(100.0);
    cfg.followup_channel.drop_prob = 0.2;
    cfg.seed = 17;
    const auto result = run_simulation(cfg);
    CHECK(result.counters.followup_losses > 0);
    CHECK(result.counters.followups_dropped > 0);
    CHECK(result.counters.sync_drops == 0);
    CHECK(result.counters.conservation_ok());
    CHECK(result.counters.tuples_formed ==
          result.counters.beacons_emitted - result.counters.followup_losses);
}

TEST_CASE("batched followups pair every covered beacon")
{
    auto cfg = quiet_config(50.0);
    cfg.follow_up_every = 5;
    const auto result = run_simulation(cfg);
    CHECK(result.counters.conservation_ok());
    CHECK(result.counters.followups_emitted ==
          result.counters.beacons_emitted / 5);
    // Beacons batched but never covered by an emitted FOLLOW_UP drain at end.
    CHECK(result.counters.tuples_formed ==
          result.counters.followups_emitted * 5);
    CHECK(result.counters.pairing_expiries ==
          result.counters.beacons_emitted % 5);
}

TEST_CASE("a short pairing timeout expires pending syncs")
{
    auto cfg = quiet_config(60.0);
    cfg.followup_channel.mean_delay_ns = 80'000'000;
    cfg.pairing_timeout_ns = 50'000'000;
    const auto result = run_simulation(cfg);
    CHECK(result.counters.tuples_formed == 0);
    CHECK(result.counters.pairing_expiries == result.counters.beacons_emitted);
    CHECK(result.counters.conservation_ok());
}

TEST_CASE("servo run converges and reports locked rows")
{
    auto cfg = quiet_config(120.0);
    cfg.servo_enabled = true;
    cfg.slave_clock.skew_ppm = 10.0;
    cfg.slave_clock.offset_ns = 50'000'000;
    cfg.sync_channel.distribution = DelayDistribution::Gaussian;
    cfg.sync_channel.sigma_ns = 5'000;
    cfg.seed = 99;
    const auto result = run_simulation(cfg);
    REQUIRE(result.trace.size() > 100);
    CHECK(result.trace.back().servo_phase == "locked");
    // Post-lock disciplined clock stays well inside the lock threshold.
    for (std::size_t i = result.trace.size() - 50; i < result.trace.size(); ++i)
        CHECK(std::llabs(result.trace[i].disciplined_offset_ns) <= 50'000);
}

TEST_CASE("validation rejects out-of-range simulation parameters")
{
    SimConfig cfg;
    cfg.duration_s = 0.0;
    CHECK_THROWS_AS(run_simulation(cfg), std::invalid_argument);

    cfg = SimConfig{};
    cfg.beacon_interval_ns = 0;
    CHECK_THROWS_AS(run_simulation(cfg), std::invalid_argument);

    cfg = SimConfig{};
    cfg.slave_clock.offset_ns = -1;
    CHECK_THROWS_AS(run_simulation(cfg), std::invalid_argument);

    cfg = SimConfig{};
    cfg.sync_drop_prob = -0.5;
    CHECK_THROWS_AS(run_simulation(cfg), std::invalid_argument);
}

TEST_CASE("rtt_bench doubles a fixed one-way delay exactly")
{
    ChannelModel c;
    c.distribution = DelayDistribution::Fixed;
    c.mean_delay_ns = 450'000;
    const auto result = rtt_bench(c, 100, 1);
    CHECK(result.probes_sent == 100);
    CHECK(result.probes_dropped == 0);
    CHECK(result.rtt.mean == doctest::Approx(900'000.0));
    CHECK(result.rtt.sample_sigma == 0.0);
}

TEST_CASE("rtt_bench counts drops in either direction")
{
    ChannelModel c;
    c.distribution = DelayDistribution::Fixed;
    c.mean_delay_ns = 1000;
    c.drop_prob = 0.5;
    const auto result = rtt_bench(c, 4000, 7);
    // Probe survives only if both legs survive: expect ~75% dropped.
    const double p_drop = 0.75;
    const double sigma = std::sqrt(4000.0 * p_drop * (1 - p_drop));
    CHECK(std::abs(static_cast<double>(result.probes_dropped) - 3000.0) < 4.0 * sigma);
}

TEST_CASE("rtt_bench rejects degenerate inputs")
{
    ChannelModel c;
    CHECK_THROWS_AS(rtt_bench(c, 1, 1), std::invalid_argument);
    c.drop_prob = 1.0;
    CHECK_THROWS_AS(rtt_bench(c, 100, 1), std::runtime_error);
}

TEST_CASE("rtt_bench is deterministic for a fixed seed")
{
    const auto c = channel_preset("adhoc", true);
    const auto a = rtt_bench(c, 500, 42);
    const auto b = rtt_bench(c, 500, 42);
    CHECK(a.rtt.mean == b.rtt.mean);
    CHECK(a.rtt.sample_sigma == b.rtt.sample_sigma);
    CHECK(a.probes_dropped == b.probes_dropped);
}
