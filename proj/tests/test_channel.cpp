// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "rbis/channel.hpp"
#include "rbis/rng.hpp"
#include "rbis/stats.hpp"

using namespace rbis;

namespace {

ChannelModel gaussian_channel(std::uint64_t mean, std::uint64_t sigma,
                              double drop_prob = 0.0)
{
    ChannelModel c;
    c.mean_delay_ns = mean;
    c.sigma_ns = sigma;
    c.distribution = DelayDistribution::Gaussian;
    c.drop_prob = drop_prob;
    return c;
}

} // namespace

TEST_CASE("fixed channel always returns the configured mean")
{
    ChannelModel c;
    c.mean_delay_ns = 1'000'000;
    Rng rng(1);
    for (int i = 0; i < 100; ++i) {
        const auto s = sample_delay(c, rng);
        CHECK_FALSE(s.dropped);
        CHECK(s.delay_ns == 1'000'000);
    }
}

TEST_CASE("drop probability one drops every message")
{
    auto c = gaussian_channel(1'000'000, 10'000, 1.0);
    Rng rng(2);
    for (int i = 0; i < 100; ++i)
        CHECK(sample_delay(c, rng).dropped);
}

TEST_CASE("gaussian sampling reproduces the configured moments")
{
    const auto c = gaussian_channel(450'000, 50'000);
    Rng rng(3);
    std::vector<double> draws;
    draws.reserve(6000);
    for (int i = 0; i < 6000; ++i)
        draws.push_back(static_cast<double>(sample_delay(c, rng).delay_ns));
    const auto stats = compute_stats(draws);
    CHECK(stats.mean == doctest::Approx(450'000).epsilon(0.02));
    CHECK(stats.sample_sigma == doctest::Approx(50'000).epsilon(0.05));
}

TEST_CASE("uniform sampling stays inside the sqrt(3)-sigma band")
{
    ChannelModel c;
    c.mean_delay_ns = 500'000;
    c.sigma_ns = 40'000;
    c.distribution = DelayDistribution::Uniform;
    const double half_width = std::sqrt(3.0) * 40'000.0;

    Rng rng(4);
    std::vector<double> draws;
    for (int i = 0; i < 6000; ++i) {
        const auto s = sample_delay(c, rng);
        CHECK(static_cast<double>(s.delay_ns) >= 500'000.0 - half_width - 1.0);
        CHECK(static_cast<double>(s.delay_ns) <= 500'000.0 + half_width + 1.0);
        draws.push_back(static_cast<double>(s.delay_ns));
    }
    const auto stats = compute_stats(draws);
    CHECK(stats.mean == doctest::Approx(500'000).epsilon(0.02));
    CHECK(stats.sample_sigma == doctest::Approx(40'000).epsilon(0.05));
}

TEST_CASE("delays are clipped at the floor")
{
    auto c = gaussian_channel(2'000, 50'000);
    c.min_delay_ns = 1'000;
    Rng rng(5);
    bool clipped = false;
    for (int i = 0; i < 2000; ++i) {
        const auto s = sample_delay(c, rng);
        CHECK(s.delay_ns >= 1'000);
        clipped = clipped || s.delay_ns == 1'000;
    }
    CHECK(clipped);
}

TEST_CASE("drop decisions never shift later delay draws")
{
    auto keep = gaussian_channel(1'000'000, 20'000, 0.0);
    auto drop = gaussian_channel(1'000'000, 20'000, 1.0);

    Rng a(99);
    Rng b(99);
    sample_delay(keep, a);
    sample_delay(drop, b);
    // Both consumed one bernoulli and two gauss draws; streams stay aligned.
    CHECK(a.next_u64() == b.next_u64());

    ChannelModel fixed_keep; // fixed: bernoulli only
    ChannelModel fixed_drop;
    fixed_drop.drop_prob = 1.0;
    Rng c1(7);
    Rng c2(7);
    sample_delay(fixed_keep, c1);
    sample_delay(fixed_drop, c2);
    CHECK(c1.next_u64() == c2.next_u64());
}

TEST_CASE("presets carry the documented RTT statistics")
{
    const auto raw = channel_preset("bss24", false);
    CHECK(raw.mean_delay_ns == 3'190'000);
    CHECK(raw.sigma_ns == 1'800'000);
    CHECK(raw.distribution == DelayDistribution::Gaussian);

    const auto halved = channel_preset("bss24", true);
    CHECK(halved.mean_delay_ns == 1'595'000);
    CHECK(halved.sigma_ns == 1'272'792); // 1.8e6 / sqrt(2), rounded

    CHECK(channel_preset("bss5", true).mean_delay_ns == 1'335'000);
    CHECK(channel_preset("bss5", true).sigma_ns == 452'548);
    CHECK(channel_preset("adhoc", true).mean_delay_ns == 435'000);
    CHECK(channel_preset("adhoc", true).sigma_ns == 657'609);
    CHECK(channel_preset("ethernet", true).mean_delay_ns == 225'000);
    CHECK(channel_preset("ethernet", true).sigma_ns == 35'355);
}

TEST_CASE("unknown preset names are rejected")
{
    CHECK_THROWS_AS(channel_preset("dsl", true), std::invalid_argument);
    CHECK(channel_preset_names().size() == 4);
}

TEST_CASE("invalid drop probability fails validation")
{
    ChannelModel c;
    c.drop_prob = 1.5;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c.drop_prob = -0.1;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c.drop_prob = std::nan("");
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("rng sub-streams are deterministic and distinct")
{
    auto a = Rng::sub_stream(1234, 0);
    auto b = Rng::sub_stream(1234, 0);
    auto c = Rng::sub_stream(1234, 1);
    const auto va = a.next_u64();
    CHECK(va == b.next_u64());
    CHECK(va != c.next_u64());
}

TEST_CASE("rng uniform transform stays in the unit interval")
{
    Rng rng(55);
    for (int i = 0; i < 10'000; ++i) {
        const double u = rng.next_unit();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
}

TEST_CASE("bernoulli(0) is false yet still consumes one draw")
{
    Rng a(8);
    Rng b(8);
    CHECK_FALSE(a.bernoulli(0.0));
    b.next_u64();
    CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("gaussian transform has roughly standard moments")
{
    Rng rng(9);
    std::vector<double> draws;
    draws.reserve(20'000);
    for (int i = 0; i < 20'000; ++i)
        draws.push_back(rng.next_gauss());
    const auto stats = compute_stats(draws);
    CHECK(std::abs(stats.mean) < 0.02);
    CHECK(stats.sample_sigma == doctest::Approx(1.0).epsilon(0.02));
}
