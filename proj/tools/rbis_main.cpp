// SPDX-License-Identifier: Apache-2.0
#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "rbis/config.hpp"
#include "rbis/daemon.hpp"
#include "rbis/sim.hpp"
#include "rbis/trace.hpp"

namespace {

void print_ms_line(const char* label, double ns)
{
    std::printf("%s %.4f ms\n", label, ns / 1e6);
}

int cmd_simulate(const std::string& config_path, const std::string& out_override)
{
    std::string trace_file;
    const rbis::SimConfig config = rbis::sim_config_from_file(config_path, &trace_file);
    if (!out_override.empty())
        trace_file = out_override;

    const rbis::RunResult result = rbis::run_simulation(config);
    rbis::write_trace_file(result.trace, trace_file);

    const auto& c = result.counters;
    std::printf("beacons=%llu tuples=%llu sync_drops=%llu followup_losses=%llu "
                "expiries=%llu conservation=%s\n",
                static_cast<unsigned long long>(c.beacons_emitted),
                static_cast<unsigned long long>(c.tuples_formed),
                static_cast<unsigned long long>(c.sync_drops),
                static_cast<unsigned long long>(c.followup_losses),
                static_cast<unsigned long long>(c.pairing_expiries),
                c.conservation_ok() ? "ok" : "BROKEN");
    if (result.offset_stats)
        std::printf("offset_ns: %s\n", result.offset_stats->to_string().c_str());
    if (result.window_skew_stats)
        std::printf("window_skew_ppm: %s\n", result.window_skew_stats->to_string().c_str());
    std::printf("trace: %s (%zu rows)\n", trace_file.c_str(), result.trace.size());
    return c.conservation_ok() ? 0 : 1;
}

int cmd_analyze(const std::string& trace_path)
{
    const rbis::TraceLog log = rbis::read_trace_file(trace_path);
    const rbis::AnalysisReport report = rbis::analyze_trace(log);
    std::fputs(report.to_string().c_str(), stdout);
    return 0;
}

int cmd_bench(const std::string& config_path)
{
    const rbis::BenchConfig bench = rbis::bench_config_from_file(config_path);
    const rbis::BenchResult result = rbis::rtt_bench(bench.channel, bench.probes, bench.seed);

    std::printf("channel: %s mean=%llu ns sigma=%llu ns drop=%g floor=%llu ns\n",
                rbis::to_string(bench.channel.distribution).c_str(),
                static_cast<unsigned long long>(bench.channel.mean_delay_ns),
                static_cast<unsigned long long>(bench.channel.sigma_ns),
                bench.channel.drop_prob,
                static_cast<unsigned long long>(bench.channel.min_delay_ns));
    std::printf("probes: %llu sent, %llu dropped\n",
                static_cast<unsigned long long>(result.probes_sent),
                static_cast<unsigned long long>(result.probes_dropped));
    print_ms_line("rtt mean:", result.rtt.mean);
    print_ms_line("rtt sigma:", result.rtt.sample_sigma);
    std::printf("rtt bands: +/-%.4f +/-%.4f +/-%.4f ms\n", result.rtt.sigma_bands[0] / 1e6,
                result.rtt.sigma_bands[1] / 1e6, result.rtt.sigma_bands[2] / 1e6);
    print_ms_line("rtt min:", result.rtt.min);
    print_ms_line("rtt p50:", result.rtt.p50);
    print_ms_line("rtt p95:", result.rtt.p95);
    print_ms_line("rtt p99:", result.rtt.p99);
    print_ms_line("rtt max:", result.rtt.max);
    std::printf("rtt raw: %s\n", result.rtt.to_string().c_str());
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"reference-broadcast infrastructure synchronization toolkit"};
    app.require_subcommand(1);

    std::string sim_config;
    std::string sim_out;
    auto* simulate = app.add_subcommand("simulate", "run a simulated experiment");
    simulate->add_option("config", sim_config, "key=value config file")->required();
    simulate->add_option("--out", sim_out, "trace output path (overrides trace_file)");

    std::string trace_path;
    auto* analyze = app.add_subcommand("analyze", "summarize a trace CSV");
    analyze->add_option("trace", trace_path, "trace CSV path")->required();

    std::string bench_config;
    auto* bench = app.add_subcommand("bench-channel", "request/response delay benchmark");
    bench->add_option("config", bench_config, "key=value config file")->required();

    std::string master_config;
    auto* master = app.add_subcommand("master", "run the live UDP master daemon");
    master->add_option("config", master_config, "key=value config file")->required();

    std::string slave_config;
    bool steer_host = false;
    auto* slave = app.add_subcommand("slave", "run the live UDP slave daemon");
    slave->add_option("config", slave_config, "key=value config file")->required();
    slave->add_flag("--steer-host", steer_host,
                    "apply frequency corrections to the host clock (privileged)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (simulate->parsed())
            return cmd_simulate(sim_config, sim_out);
        if (analyze->parsed())
            return cmd_analyze(trace_path);
        if (bench->parsed())
            return cmd_bench(bench_config);
        if (master->parsed())
            return rbis::run_master_daemon(rbis::daemon_config_from_file(master_config),
                                           std::cerr);
        if (slave->parsed()) {
            rbis::DaemonConfig config = rbis::daemon_config_from_file(slave_config);
            config.steer_host = steer_host;
            return rbis::run_slave_daemon(config, std::cerr);
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
