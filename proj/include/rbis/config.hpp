// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <set>
#include <string>

#include "rbis/servo.hpp"
#include "rbis/sim.hpp"

namespace rbis {

/// Flat key=value file: '#' starts a comment, blank lines are skipped,
/// whitespace around keys and values is trimmed. Duplicate keys are errors
/// at parse time; keys nobody consumed are errors at finish() (all keys are
/// documented, unknown ones rejected).
class ConfigFile {
public:
    static ConfigFile parse_file(const std::string& path);
    static ConfigFile parse(std::istream& in, const std::string& origin);

    bool has(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_real(const std::string& key, double fallback) const;
    std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
    std::uint64_t get_uint(const std::string& key, std::uint64_t fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;

    /// Throws std::invalid_argument listing any keys never consumed.
    void finish() const;

    const std::string& origin() const { return origin_; }

private:
    std::string origin_;
    std::map<std::string, std::string> values_;
    mutable std::set<std::string> consumed_;
};

/// Build a SimConfig from a config file; `trace_file_out`, when non-null,
/// receives the `trace_file` key (default "trace.csv").
SimConfig sim_config_from_file(const std::string& path, std::string* trace_file_out = nullptr);

struct BenchConfig {
    ChannelModel channel{};
    std::uint64_t probes{6000};
    std::uint64_t seed{1};
};

BenchConfig bench_config_from_file(const std::string& path);

struct DaemonConfig {
    std::string bind_host{"0.0.0.0"};
    std::string target_host{"255.255.255.255"}; ///< master's SYNC destination
    std::uint16_t sync_port{5819};
    std::uint16_t followup_port{5820};
    std::uint64_t beacon_interval_ns{102'400'000};
    std::uint32_t follow_up_every{1};
    double run_s{0.0}; ///< 0 = run until interrupted
    std::string trace_file;
    ServoConfig servo{};
    bool servo_enabled{true};
    std::size_t estimator_window{64};
    std::uint64_t pairing_timeout_ns{1'000'000'000};
    std::size_t pending_capacity{128};
    bool steer_host{false}; ///< never read from file, only the guarded CLI flag
};

DaemonConfig daemon_config_from_file(const std::string& path);

} // namespace rbis
