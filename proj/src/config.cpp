// SPDX-License-Identifier: Apache-2.0
#include "rbis/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace rbis {

namespace {

std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

[[noreturn]] void key_error(const std::string& origin, const std::string& key,
                            const std::string& what)
{
    throw std::invalid_argument(origin + ": key '" + key + "': " + what);
}

} // namespace

ConfigFile ConfigFile::parse(std::istream& in, const std::string& origin)
{
    ConfigFile cfg;
    cfg.origin_ = origin;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view view = line;
        if (const auto hash = view.find('#'); hash != std::string_view::npos)
            view = view.substr(0, hash);
        view = trim(view);
        if (view.empty())
            continue;
        const auto eq = view.find('=');
        if (eq == std::string_view::npos)
            throw std::invalid_argument(origin + ": line " + std::to_string(line_no) +
                                        ": expected key=value");
        const std::string key{trim(view.substr(0, eq))};
        const std::string value{trim(view.substr(eq + 1))};
        if (key.empty())
            throw std::invalid_argument(origin + ": line " + std::to_string(line_no) +
                                        ": empty key");
        if (!cfg.values_.emplace(key, value).second)
            throw std::invalid_argument(origin + ": line " + std::to_string(line_no) +
                                        ": duplicate key '" + key + "'");
    }
    return cfg;
}

ConfigFile ConfigFile::parse_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::invalid_argument("config: cannot open " + path);
    return parse(in, path);
}

bool ConfigFile::has(const std::string& key) const
{
    return values_.contains(key);
}

std::string ConfigFile::get_string(const std::string& key, const std::string& fallback) const
{
    consumed_.insert(key);
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
}

double ConfigFile::get_real(const std::string& key, double fallback) const
{
    consumed_.insert(key);
    const auto it = values_.find(key);
    if (it == values_.end())
        return fallback;
    const std::string& s = it->second;
    double value{};
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, value);
    if (ec != std::errc{} || ptr != end)
        key_error(origin_, key, "bad real value '" + s + "'");
    return value;
}

std::int64_t ConfigFile::get_int(const std::string& key, std::int64_t fallback) const
{
    consumed_.insert(key);
    const auto it = values_.find(key);
    if (it == values_.end())
        return fallback;
    const std::string& s = it->second;
    std::int64_t value{};
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, value);
    if (ec != std::errc{} || ptr != end)
        key_error(origin_, key, "bad integer value '" + s + "'");
    return value;
}

std::uint64_t ConfigFile::get_uint(const std::string& key, std::uint64_t fallback) const
{
    consumed_.insert(key);
    const auto it = values_.find(key);
    if (it == values_.end())
        return fallback;
    const std::string& s = it->second;
    std::uint64_t value{};
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, value);
    if (ec != std::errc{} || ptr != end)
        key_error(origin_, key, "bad unsigned value '" + s + "'");
    return value;
}

bool ConfigFile::get_bool(const std::string& key, bool fallback) const
{
    consumed_.insert(key);
    const auto it = values_.find(key);
    if (it == values_.end())
        return fallback;
    const std::string& s = it->second;
    if (s == "1" || s == "true" || s == "yes" || s == "on")
        return true;
    if (s == "0" || s == "false" || s == "no" || s == "off")
        return false;
    key_error(origin_, key, "bad boolean value '" + s + "'");
}

void ConfigFile::finish() const
{
    std::string unknown;
    for (const auto& [key, value] : values_) {
        if (consumed_.contains(key)) {
            continue;
        }
        if (!unknown.empty())
            unknown += ", ";
        unknown += key;
    }
    if (!unknown.empty())
        throw std::invalid_argument(origin_ + ": unknown keys: " + unknown);
}

namespace {

DelayDistribution parse_distribution(const ConfigFile& cfg, const std::string& key,
                                     DelayDistribution fallback)
{
    const std::string s = cfg.get_string(key, to_string(fallback));
    if (s == "gaussian")
        return DelayDistribution::Gaussian;
    if (s == "uniform")
        return DelayDistribution::Uniform;
    if (s == "fixed")
        return DelayDistribution::Fixed;
    throw std::invalid_argument(cfg.origin() + ": key '" + key + "': unknown distribution '" +
                                s + "'");
}

/// Channel keys under a prefix: <p>_preset (name, or name:raw for the
/// RTT-level variant), then individual overrides <p>_mean_delay_ns,
/// <p>_sigma_ns, <p>_distribution, <p>_drop_prob, <p>_min_delay_ns.
ChannelModel load_channel(const ConfigFile& cfg, const std::string& prefix,
                          const ChannelModel& fallback)
{
    ChannelModel model = fallback;
    const std::string preset = cfg.get_string(prefix + "_preset", "");
    if (!preset.empty()) {
        std::string name = preset;
        bool halved = true;
        if (const auto colon = name.find(':'); colon != std::string::npos) {
            const std::string variant = name.substr(colon + 1);
            name = name.substr(0, colon);
            if (variant == "raw")
                halved = false;
            else if (variant != "halved")
                throw std::invalid_argument(cfg.origin() + ": key '" + prefix +
                                            "_preset': unknown variant '" + variant + "'");
        }
        model = channel_preset(name, halved);
    }
    model.mean_delay_ns = cfg.get_uint(prefix + "_mean_delay_ns", model.mean_delay_ns);
    model.sigma_ns = cfg.get_uint(prefix + "_sigma_ns", model.sigma_ns);
    model.distribution = parse_distribution(cfg, prefix + "_distribution", model.distribution);
    model.drop_prob = cfg.get_real(prefix + "_drop_prob", model.drop_prob);
    model.min_delay_ns = cfg.get_uint(prefix + "_min_delay_ns", model.min_delay_ns);
    return model;
}

ServoConfig load_servo(const ConfigFile& cfg)
{
    ServoConfig servo;
    servo.kp = cfg.get_real("servo_kp", servo.kp);
    servo.ki = cfg.get_real("servo_ki", servo.ki);
    servo.step_threshold_ns = cfg.get_uint("servo_step_threshold_ns", servo.step_threshold_ns);
    servo.max_freq_ppb = cfg.get_int("servo_max_freq_ppb", servo.max_freq_ppb);
    servo.lock_threshold_ns = cfg.get_uint("servo_lock_threshold_ns", servo.lock_threshold_ns);
    servo.lock_count =
        static_cast<std::uint32_t>(cfg.get_uint("servo_lock_count", servo.lock_count));
    return servo;
}

std::uint64_t interval_ns_from_ms(const ConfigFile& cfg, const std::string& key,
                                  std::uint64_t fallback_ns)
{
    const double ms = cfg.get_real(key, static_cast<double>(fallback_ns) / 1e6);
    if (!(ms > 0.0))
        throw std::invalid_argument(cfg.origin() + ": key '" + key + "': must be > 0");
    return static_cast<std::uint64_t>(std::llround(ms * 1e6));
}

TimestampSource parse_source(const ConfigFile& cfg)
{
    const std::string s = cfg.get_string("timestamp_source", "tsf");
    if (s == "tsf")
        return TimestampSource::Tsf;
    if (s == "system")
        return TimestampSource::System;
    throw std::invalid_argument(cfg.origin() +
                                ": key 'timestamp_source': expected tsf or system, got '" + s +
                                "'");
}

} // namespace

SimConfig sim_config_from_file(const std::string& path, std::string* trace_file_out)
{
    const ConfigFile cfg = ConfigFile::parse_file(path);
    SimConfig sim;
    sim.seed = cfg.get_uint("seed", sim.seed);
    sim.duration_s = cfg.get_real("duration_s", sim.duration_s);
    sim.beacon_interval_ns = interval_ns_from_ms(cfg, "beacon_interval_ms", sim.beacon_interval_ns);
    sim.follow_up_every =
        static_cast<std::uint32_t>(cfg.get_uint("follow_up_every", sim.follow_up_every));
    sim.timestamp_source = parse_source(cfg);

    sim.master_clock.offset_ns = cfg.get_int("master_offset_ns", 0);
    sim.master_clock.skew_ppm = cfg.get_real("master_skew_ppm", 0.0);
    sim.master_clock.base_true_ns = TimePointNs{cfg.get_uint("master_epoch_ns", 0)};
    sim.slave_clock.offset_ns = cfg.get_int("slave_offset_ns", 0);
    sim.slave_clock.skew_ppm = cfg.get_real("slave_skew_ppm", 0.0);
    sim.slave_clock.base_true_ns = TimePointNs{cfg.get_uint("slave_epoch_ns", 0)};

    ChannelModel sync_default;
    sync_default.distribution = DelayDistribution::Fixed;
    sync_default.mean_delay_ns = 1'000'000;
    sim.sync_channel = load_channel(cfg, "sync", sync_default);
    sim.followup_channel = load_channel(cfg, "followup", sync_default);
    sim.sync_drop_prob = cfg.get_real("sync_drop_prob", sim.sync_drop_prob);

    sim.servo = load_servo(cfg);
    sim.servo_enabled = cfg.get_bool("servo_enabled", sim.servo_enabled);
    sim.estimator_window =
        static_cast<std::size_t>(cfg.get_uint("estimator_window", sim.estimator_window));
    sim.pairing_timeout_ns = cfg.get_uint("pairing_timeout_ns", sim.pairing_timeout_ns);
    sim.pending_capacity =
        static_cast<std::size_t>(cfg.get_uint("pending_capacity", sim.pending_capacity));

    const std::string trace_file = cfg.get_string("trace_file", "trace.csv");
    if (trace_file_out)
        *trace_file_out = trace_file;

    cfg.finish();
    sim.validate();
    return sim;
}

BenchConfig bench_config_from_file(const std::string& path)
{
    const ConfigFile cfg = ConfigFile::parse_file(path);
    BenchConfig bench;
    ChannelModel fallback = channel_preset("ethernet", true);
    bench.channel = load_channel(cfg, "channel", fallback);
    bench.probes = cfg.get_uint("probes", bench.probes);
    bench.seed = cfg.get_uint("seed", bench.seed);
    cfg.finish();
    if (bench.probes < 2)
        throw std::invalid_argument(path + ": key 'probes': must be >= 2");
    bench.channel.validate();
    return bench;
}

DaemonConfig daemon_config_from_file(const std::string& path)
{
    const ConfigFile cfg = ConfigFile::parse_file(path);
    DaemonConfig d;
    d.bind_host = cfg.get_string("bind_host", d.bind_host);
    d.target_host = cfg.get_string("target_host", d.target_host);
    d.sync_port = static_cast<std::uint16_t>(cfg.get_uint("sync_port", d.sync_port));
    d.followup_port =
        static_cast<std::uint16_t>(cfg.get_uint("followup_port", d.sync_port + 1));
    d.beacon_interval_ns = interval_ns_from_ms(cfg, "beacon_interval_ms", d.beacon_interval_ns);
    d.follow_up_every =
        static_cast<std::uint32_t>(cfg.get_uint("follow_up_every", d.follow_up_every));
    d.run_s = cfg.get_real("run_s", d.run_s);
    d.trace_file = cfg.get_string("trace_file", d.trace_file);
    d.servo = load_servo(cfg);
    d.servo_enabled = cfg.get_bool("servo_enabled", d.servo_enabled);
    d.estimator_window =
        static_cast<std::size_t>(cfg.get_uint("estimator_window", d.estimator_window));
    d.pairing_timeout_ns = cfg.get_uint("pairing_timeout_ns", d.pairing_timeout_ns);
    d.pending_capacity =
        static_cast<std::size_t>(cfg.get_uint("pending_capacity", d.pending_capacity));
    cfg.finish();
    d.servo.validate();
    return d;
}

} // namespace rbis
