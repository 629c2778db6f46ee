// SPDX-License-Identifier: Apache-2.0
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "rbis/channel.hpp"
#include "rbis/clock.hpp"
#include "rbis/config.hpp"
#include "rbis/estimator.hpp"
#include "rbis/servo.hpp"
#include "rbis/sim.hpp"
#include "rbis/stats.hpp"
#include "rbis/trace.hpp"
#include "rbis/wire.hpp"

namespace py = pybind11;

using namespace rbis;

PYBIND11_MODULE(rbis, m)
{
    m.doc() = "broadcast-timestamp clock synchronization: protocol, estimator, "
              "servo and deterministic simulator";

    py::class_<TimePointNs>(m, "TimePointNs")
        .def(py::init([](std::uint64_t ns) { return TimePointNs{ns}; }), py::arg("ns") = 0)
        .def_readwrite("ns", &TimePointNs::ns)
        .def("__repr__",
             [](const TimePointNs& t) { return "TimePointNs(" + std::to_string(t.ns) + ")"; });
    py::implicitly_convertible<py::int_, TimePointNs>();

    py::class_<TsfTimestamp>(m, "TsfTimestamp")
        .def(py::init([](std::uint64_t us) { return TsfTimestamp{us}; }), py::arg("us") = 0)
        .def_readwrite("us", &TsfTimestamp::us)
        .def("__repr__",
             [](const TsfTimestamp& t) { return "TsfTimestamp(" + std::to_string(t.us) + ")"; });
    py::implicitly_convertible<py::int_, TsfTimestamp>();

    py::class_<SimulatedClock::Params>(m, "ClockParams")
        .def(py::init<>())
        .def_readwrite("offset_ns", &SimulatedClock::Params::offset_ns)
        .def_readwrite("skew_ppm", &SimulatedClock::Params::skew_ppm)
        .def_readwrite("freq_adj_ppb", &SimulatedClock::Params::freq_adj_ppb)
        .def_readwrite("base_true_ns", &SimulatedClock::Params::base_true_ns)
        .def_readwrite("max_adj_ppb", &SimulatedClock::Params::max_adj_ppb);

    py::class_<SimulatedClock>(m, "SimulatedClock")
        .def(py::init<>())
        .def(py::init<const SimulatedClock::Params&>(), py::arg("params"))
        .def("read", &SimulatedClock::read, py::arg("true_now"))
        .def("tsf", &SimulatedClock::tsf, py::arg("true_now"))
        .def("step", &SimulatedClock::step, py::arg("delta_ns"), py::arg("true_now"),
             py::arg("allow_backward") = false)
        .def("set_freq", &SimulatedClock::set_freq, py::arg("adj_ppb"), py::arg("true_now"))
        .def("true_time_at", &SimulatedClock::true_time_at, py::arg("clock_value_ns"))
        .def_property_readonly("skew_ppm", &SimulatedClock::skew_ppm)
        .def_property_readonly("freq_adj_ppb", &SimulatedClock::freq_adj_ppb)
        .def_property_readonly("last_adjustment_saturated",
                               &SimulatedClock::last_adjustment_saturated);

    py::class_<TimestampTuple>(m, "TimestampTuple")
        .def(py::init([](std::uint32_t seq, std::uint64_t t_master_ns, std::uint64_t t_slave_ns) {
                 return TimestampTuple{seq, TimePointNs{t_master_ns}, TimePointNs{t_slave_ns}};
             }),
             py::arg("seq"), py::arg("t_master_ns"), py::arg("t_slave_ns"))
        .def_readwrite("seq", &TimestampTuple::seq)
        .def_readwrite("t_master_ns", &TimestampTuple::t_master_ns)
        .def_readwrite("t_slave_ns", &TimestampTuple::t_slave_ns)
        .def(py::self == py::self);

    py::class_<SyncEstimate>(m, "SyncEstimate")
        .def_readonly("offset_ns", &SyncEstimate::offset_ns)
        .def_readonly("skew_ppm", &SyncEstimate::skew_ppm)
        .def_readonly("seq", &SyncEstimate::seq)
        .def_readonly("dropped_since_last", &SyncEstimate::dropped_since_last)
        .def_readonly("window_skew_ppm", &SyncEstimate::window_skew_ppm)
        .def_readonly("valid_skew", &SyncEstimate::valid_skew);

    m.def("compute_offset", &compute_offset, py::arg("tuple"));
    m.def(
        "compute_skew_ppm",
        [](std::int64_t prev_offset_ns, std::int64_t curr_offset_ns,
           std::uint64_t prev_t_master_ns, std::uint64_t curr_t_master_ns) {
            return compute_skew_ppm(prev_offset_ns, curr_offset_ns,
                                    TimePointNs{prev_t_master_ns},
                                    TimePointNs{curr_t_master_ns});
        },
        py::arg("prev_offset_ns"), py::arg("curr_offset_ns"), py::arg("prev_t_master_ns"),
        py::arg("curr_t_master_ns"));

    py::class_<Estimator>(m, "Estimator")
        .def(py::init<std::size_t>(), py::arg("window") = 64)
        .def("update", &Estimator::update, py::arg("tuple"))
        .def_property_readonly("accepted", &Estimator::accepted)
        .def_property_readonly("discarded", &Estimator::discarded)
        .def("reset", &Estimator::reset);

    py::class_<ServoConfig>(m, "ServoConfig")
        .def(py::init<>())
        .def_readwrite("kp", &ServoConfig::kp)
        .def_readwrite("ki", &ServoConfig::ki)
        .def_readwrite("step_threshold_ns", &ServoConfig::step_threshold_ns)
        .def_readwrite("max_freq_ppb", &ServoConfig::max_freq_ppb)
        .def_readwrite("lock_threshold_ns", &ServoConfig::lock_threshold_ns)
        .def_readwrite("lock_count", &ServoConfig::lock_count);

    py::enum_<ServoPhase>(m, "ServoPhase")
        .value("Init", ServoPhase::Init)
        .value("Stepping", ServoPhase::Stepping)
        .value("Tracking", ServoPhase::Tracking)
        .value("Locked", ServoPhase::Locked);

    py::enum_<ServoAction::Kind>(m, "ServoActionKind")
        .value("Step", ServoAction::Kind::Step)
        .value("SetFreq", ServoAction::Kind::SetFreq);

    py::class_<ServoAction>(m, "ServoAction")
        .def_readonly("kind", &ServoAction::kind)
        .def_readonly("value", &ServoAction::value);

    py::class_<PiServo>(m, "PiServo")
        .def(py::init<>())
        .def(py::init<const ServoConfig&>(), py::arg("config"))
        .def("sample", &PiServo::sample, py::arg("offset_ns"), py::arg("interval_ns"))
        .def("reset", &PiServo::reset)
        .def_property_readonly("phase", &PiServo::phase)
        .def_property_readonly("integral_ppb", &PiServo::integral_ppb)
        .def_property_readonly("last_output_ppb", &PiServo::last_output_ppb);

    py::class_<SyncMessage>(m, "SyncMessage")
        .def(py::init([](std::uint32_t seq, std::uint64_t tsf_us) {
                 return SyncMessage{seq, TsfTimestamp{tsf_us}};
             }),
             py::arg("seq") = 0, py::arg("tsf_us") = 0)
        .def_readwrite("seq", &SyncMessage::seq)
        .def_readwrite("tsf_us", &SyncMessage::tsf_us)
        .def(py::self == py::self);

    py::class_<FollowUpEntry>(m, "FollowUpEntry")
        .def(py::init([](std::uint32_t seq, std::uint64_t master_time_ns) {
                 return FollowUpEntry{seq, master_time_ns};
             }),
             py::arg("seq") = 0, py::arg("master_time_ns") = 0)
        .def_readwrite("seq", &FollowUpEntry::seq)
        .def_readwrite("master_time_ns", &FollowUpEntry::master_time_ns)
        .def(py::self == py::self);

    py::class_<FollowUpMessage>(m, "FollowUpMessage")
        .def(py::init([](std::uint32_t seq, std::uint64_t tsf_us, std::uint64_t master_time_ns) {
                 return FollowUpMessage{seq, TsfTimestamp{tsf_us}, master_time_ns, {}};
             }),
             py::arg("seq") = 0, py::arg("tsf_us") = 0, py::arg("master_time_ns") = 0)
        .def_readwrite("seq", &FollowUpMessage::seq)
        .def_readwrite("tsf_us", &FollowUpMessage::tsf_us)
        .def_readwrite("master_time_ns", &FollowUpMessage::master_time_ns)
        .def_readwrite("extra", &FollowUpMessage::extra)
        .def(py::self == py::self);

    m.def("encode", [](const SyncMessage& msg) {
        const auto bytes = encode(msg);
        return py::bytes(reinterpret_cast<const char*>(bytes.data()), bytes.size());
    });
    m.def("encode", [](const FollowUpMessage& msg) {
        const auto bytes = encode(msg);
        return py::bytes(reinterpret_cast<const char*>(bytes.data()), bytes.size());
    });
    m.def("decode", [](const py::bytes& raw) -> py::object {
        std::string_view view = raw;
        const auto result = decode(std::span<const std::uint8_t>(
            reinterpret_cast<const std::uint8_t*>(view.data()), view.size()));
        if (const auto* err = std::get_if<DecodeError>(&result))
            throw py::value_error(std::string("decode failed: ") + to_string(*err));
        if (const auto* sync = std::get_if<SyncMessage>(&result))
            return py::cast(*sync);
        return py::cast(std::get<FollowUpMessage>(result));
    });

    py::enum_<DelayDistribution>(m, "DelayDistribution")
        .value("Gaussian", DelayDistribution::Gaussian)
        .value("Uniform", DelayDistribution::Uniform)
        .value("Fixed", DelayDistribution::Fixed);

    py::class_<ChannelModel>(m, "ChannelModel")
        .def(py::init<>())
        .def_readwrite("mean_delay_ns", &ChannelModel::mean_delay_ns)
        .def_readwrite("sigma_ns", &ChannelModel::sigma_ns)
        .def_readwrite("distribution", &ChannelModel::distribution)
        .def_readwrite("drop_prob", &ChannelModel::drop_prob)
        .def_readwrite("min_delay_ns", &ChannelModel::min_delay_ns);

    m.def("channel_preset", &channel_preset, py::arg("name"), py::arg("halved") = true);
    m.def("channel_preset_names", [] { return channel_preset_names(); });

    py::enum_<TimestampSource>(m, "TimestampSource")
        .value("Tsf", TimestampSource::Tsf)
        .value("System", TimestampSource::System);

    py::class_<SimConfig>(m, "SimConfig")
        .def(py::init<>())
        .def_readwrite("seed", &SimConfig::seed)
        .def_readwrite("duration_s", &SimConfig::duration_s)
        .def_readwrite("beacon_interval_ns", &SimConfig::beacon_interval_ns)
        .def_readwrite("follow_up_every", &SimConfig::follow_up_every)
        .def_readwrite("timestamp_source", &SimConfig::timestamp_source)
        .def_readwrite("master_clock", &SimConfig::master_clock)
        .def_readwrite("slave_clock", &SimConfig::slave_clock)
        .def_readwrite("sync_channel", &SimConfig::sync_channel)
        .def_readwrite("followup_channel", &SimConfig::followup_channel)
        .def_readwrite("sync_drop_prob", &SimConfig::sync_drop_prob)
        .def_readwrite("servo", &SimConfig::servo)
        .def_readwrite("servo_enabled", &SimConfig::servo_enabled)
        .def_readwrite("estimator_window", &SimConfig::estimator_window)
        .def_readwrite("pairing_timeout_ns", &SimConfig::pairing_timeout_ns)
        .def_readwrite("pending_capacity", &SimConfig::pending_capacity);

    py::class_<TraceRecord>(m, "TraceRecord")
        .def(py::init<>())
        .def_readwrite("true_time_ns", &TraceRecord::true_time_ns)
        .def_readwrite("seq", &TraceRecord::seq)
        .def_readwrite("t_master_ns", &TraceRecord::t_master_ns)
        .def_readwrite("t_slave_ns", &TraceRecord::t_slave_ns)
        .def_readwrite("offset_ns", &TraceRecord::offset_ns)
        .def_readwrite("skew_ppm", &TraceRecord::skew_ppm)
        .def_readwrite("window_skew_ppm", &TraceRecord::window_skew_ppm)
        .def_readwrite("dropped_since_last", &TraceRecord::dropped_since_last)
        .def_readwrite("servo_phase", &TraceRecord::servo_phase)
        .def_readwrite("servo_output_ppb", &TraceRecord::servo_output_ppb)
        .def_readwrite("disciplined_offset_ns", &TraceRecord::disciplined_offset_ns)
        .def(py::self == py::self);

    py::class_<RunCounters>(m, "RunCounters")
        .def_readonly("beacons_emitted", &RunCounters::beacons_emitted)
        .def_readonly("tuples_formed", &RunCounters::tuples_formed)
        .def_readonly("sync_drops", &RunCounters::sync_drops)
        .def_readonly("followup_losses", &RunCounters::followup_losses)
        .def_readonly("pairing_expiries", &RunCounters::pairing_expiries)
        .def_readonly("followups_emitted", &RunCounters::followups_emitted)
        .def_readonly("followups_dropped", &RunCounters::followups_dropped)
        .def_readonly("estimator_discards", &RunCounters::estimator_discards)
        .def("conservation_ok", &RunCounters::conservation_ok);

    py::class_<SummaryMetrics>(m, "SummaryMetrics")
        .def_readonly("count", &SummaryMetrics::count)
        .def_readonly("mean", &SummaryMetrics::mean)
        .def_readonly("sample_sigma", &SummaryMetrics::sample_sigma)
        .def_readonly("sigma_bands", &SummaryMetrics::sigma_bands)
        .def_readonly("min", &SummaryMetrics::min)
        .def_readonly("max", &SummaryMetrics::max)
        .def_readonly("p50", &SummaryMetrics::p50)
        .def_readonly("p95", &SummaryMetrics::p95)
        .def_readonly("p99", &SummaryMetrics::p99)
        .def("__repr__", [](const SummaryMetrics& s) { return s.to_string(); });

    py::class_<RunResult>(m, "RunResult")
        .def_readonly("trace", &RunResult::trace)
        .def_readonly("counters", &RunResult::counters)
        .def_readonly("offset_stats", &RunResult::offset_stats)
        .def_readonly("window_skew_stats", &RunResult::window_skew_stats);

    m.def("run_simulation", &run_simulation, py::arg("config"),
          py::call_guard<py::gil_scoped_release>());

    py::class_<BenchResult>(m, "BenchResult")
        .def_readonly("rtt", &BenchResult::rtt)
        .def_readonly("probes_sent", &BenchResult::probes_sent)
        .def_readonly("probes_dropped", &BenchResult::probes_dropped);

    m.def("rtt_bench", &rtt_bench, py::arg("channel"), py::arg("probes") = 6000,
          py::arg("seed") = 1);

    m.def("compute_stats", [](const std::vector<double>& samples) {
        return compute_stats(std::span<const double>(samples.data(), samples.size()));
    });

    m.def("write_trace_file", &write_trace_file, py::arg("log"), py::arg("path"));
    m.def("read_trace_file", &read_trace_file, py::arg("path"));
    m.def("analyze_trace", [](const TraceLog& log) { return analyze_trace(log).to_string(); });
}
