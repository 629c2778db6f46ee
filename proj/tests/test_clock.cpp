// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <stdexcept>

#include "rbis/clock.hpp"
#include "rbis/rng.hpp"

using namespace rbis;

namespace {

SimulatedClock make_clock(std::int64_t offset_ns, double skew_ppm,
                          std::int64_t freq_adj_ppb = 0, std::uint64_t base_true = 0)
{
    SimulatedClock::Params p;
    p.offset_ns = offset_ns;
    p.skew_ppm = skew_ppm;
    p.freq_adj_ppb = freq_adj_ppb;
    p.base_true_ns = TimePointNs{base_true};
    return SimulatedClock(p);
}

} // namespace

TEST_CASE("round_half_away rounds symmetrically")
{
    CHECK(round_half_away(0.0) == 0);
    CHECK(round_half_away(0.5) == 1);
    CHECK(round_half_away(-0.5) == -1);
    CHECK(round_half_away(1.4) == 1);
    CHECK(round_half_away(2.5) == 3);
    CHECK(round_half_away(-2.5) == -3);
    CHECK(round_half_away(404.504) == 405);
}

TEST_CASE("identity clock returns true time")
{
    auto c = make_clock(0, 0.0);
    CHECK(c.read(TimePointNs{1'000'000'000}).ns == 1'000'000'000);
}

TEST_CASE("skewed clock gains 3960 ns per second")
{
    auto c = make_clock(0, 3.96);
    CHECK(c.read(TimePointNs{1'000'000'000}).ns == 1'000'003'960);
}

TEST_CASE("pure offset shifts reads")
{
    auto c = make_clock(500, 0.0);
    CHECK(c.read(TimePointNs{1000}).ns == 1500);
}

TEST_CASE("reads reject non-monotone true time")
{
    auto c = make_clock(0, 0.0);
    c.read(TimePointNs{2000});
    CHECK_THROWS_AS(c.read(TimePointNs{1999}), std::invalid_argument);
    CHECK_NOTHROW(c.read(TimePointNs{2000}));
}

TEST_CASE("tsf view truncates to microseconds")
{
    auto c = make_clock(0, 3.96);
    CHECK(c.tsf(TimePointNs{1'000'000'000}).us == 1'000'003);

    auto tiny = make_clock(999, 0.0);
    CHECK(tiny.tsf(TimePointNs{0}).us == 0);

    auto beacon = make_clock(0, 0.0);
    CHECK(beacon.tsf(TimePointNs{102'400'000}).us == 102'400);
}

TEST_CASE("tsf equals floor of read for random clocks")
{
    Rng rng(42);
    for (int i = 0; i < 200; ++i) {
        const double skew = (rng.next_unit() - 0.5) * 200.0;
        const auto offset = static_cast<std::int64_t>(rng.next_unit() * 1e9);
        auto a = make_clock(offset, skew);
        auto b = make_clock(offset, skew);
        std::uint64_t t = 0;
        for (int j = 0; j < 5; ++j) {
            t += static_cast<std::uint64_t>(rng.next_unit() * 1e9);
            const auto value = a.read(TimePointNs{t});
            CHECK(b.tsf(TimePointNs{t}).us == value.ns / 1000);
        }
    }
}

TEST_CASE("step shifts subsequent reads exactly")
{
    auto c = make_clock(0, 0.0);
    const auto before = c.read(TimePointNs{5000});
    c.step(600, TimePointNs{5000});
    CHECK(c.read(TimePointNs{5000}).ns == before.ns + 600);

    c.step(0, TimePointNs{6000});
    CHECK(c.read(TimePointNs{6000}).ns == before.ns + 600 + 1000);
}

TEST_CASE("backward step needs the permission flag")
{
    auto c = make_clock(0, 0.0, 0, 2'000'000'000);
    c.read(TimePointNs{3'000'000'000});
    CHECK_THROWS_AS(c.step(-1'000'000'000, TimePointNs{3'000'000'000}),
                    std::invalid_argument);
    c.step(-1'000'000'000, TimePointNs{3'000'000'000}, true);
    CHECK(c.read(TimePointNs{3'000'000'000}).ns == 2'000'000'000);
}

TEST_CASE("set_freq cancels a known skew")
{
    auto c = make_clock(0, 3.96);
    c.set_freq(-3960, TimePointNs{1'000'000'000});
    const auto at_adjust = c.read(TimePointNs{1'000'000'000});
    const auto later = c.read(TimePointNs{2'000'000'000});
    CHECK(later.ns - at_adjust.ns == 1'000'000'000);
}

TEST_CASE("set_freq is continuous at the adjustment instant")
{
    auto c = make_clock(123, 50.0);
    const auto before = c.read(TimePointNs{777'000'000});
    c.set_freq(-250'000, TimePointNs{777'000'000});
    CHECK(c.read(TimePointNs{777'000'000}).ns == before.ns);
}

TEST_CASE("set_freq saturates at the clamp and flags it")
{
    auto c = make_clock(0, 0.0);
    const auto applied = c.set_freq(1'000'000, TimePointNs{100});
    CHECK(applied == 500'000);
    CHECK(c.last_adjustment_saturated());
    CHECK(c.freq_adj_ppb() == 500'000);

    const auto ok = c.set_freq(400'000, TimePointNs{200});
    CHECK(ok == 400'000);
    CHECK_FALSE(c.last_adjustment_saturated());
}

TEST_CASE("composition: post-adjustment reads follow the new rate exactly")
{
    auto c = make_clock(0, 10.0);
    c.set_freq(7000, TimePointNs{500'000'000});
    const auto v0 = c.read(TimePointNs{500'000'000});
    const std::int64_t dt = 321'000'000;
    const auto v1 = c.read(TimePointNs{500'000'000 + dt});
    const double rate_dev_ppb = 10.0 * 1e3 + 7000.0;
    const std::int64_t expected =
        static_cast<std::int64_t>(v0.ns) + dt + round_half_away(dt * rate_dev_ppb * 1e-9);
    CHECK(static_cast<std::int64_t>(v1.ns) == expected);
}

TEST_CASE("true_time_at inverts reads on the current segment")
{
    auto c = make_clock(1000, 100.0);
    const auto value = c.read(TimePointNs{250'000'000});
    const auto t = c.true_time_at(value.ns);
    CHECK(t.ns >= 249'999'999);
    CHECK(t.ns <= 250'000'001);
}

TEST_CASE("excessive skew is rejected")
{
    SimulatedClock::Params p;
    p.skew_ppm = 1500.0;
    CHECK_THROWS_AS(SimulatedClock{p}, std::invalid_argument);
    p.skew_ppm = -1500.0;
    CHECK_THROWS_AS(SimulatedClock{p}, std::invalid_argument);
    p.skew_ppm = 1000.0;
    CHECK_NOTHROW(SimulatedClock{p});
}
