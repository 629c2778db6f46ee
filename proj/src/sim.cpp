// SPDX-License-Identifier: Apache-2.0
#include "rbis/sim.hpp"

#include <cmath>
#include <deque>
#include <map>
#include <queue>
#include <set>
#include <stdexcept>
#include <utility>
#include <variant>

#include "rbis/estimator.hpp"
#include "rbis/session.hpp"
#include "rbis/wire.hpp"

namespace rbis {

std::string to_string(TimestampSource s)
{
    return s == TimestampSource::Tsf ? "tsf" : "system";
}

void SimConfig::validate() const
{
    if (!(duration_s > 0.0) || duration_s > 1e7)
        throw std::invalid_argument("SimConfig: duration_s must be in (0, 1e7]");
    if (beacon_interval_ns == 0)
        throw std::invalid_argument("SimConfig: beacon_interval_ns must be > 0");
    if (follow_up_every < 1 || follow_up_every > 256)
        throw std::invalid_argument("SimConfig: follow_up_every must be in 1..256");
    sync_channel.validate();
    followup_channel.validate();
    if (!(sync_drop_prob >= 0.0 && sync_drop_prob <= 1.0))
        throw std::invalid_argument("SimConfig: sync_drop_prob must be in [0,1]");
    servo.validate();
    if (estimator_window < 2)
        throw std::invalid_argument("SimConfig: estimator_window must be >= 2");
    if (pairing_timeout_ns == 0)
        throw std::invalid_argument("SimConfig: pairing_timeout_ns must be > 0");
    if (pending_capacity < 1)
        throw std::invalid_argument("SimConfig: pending_capacity must be >= 1");
    auto check_clock = [](const SimulatedClock::Params& p, const char* which) {
        const auto base = static_cast<std::int64_t>(p.base_true_ns.ns);
        if (base + p.offset_ns < 0)
            throw std::invalid_argument(std::string("SimConfig: ") + which +
                                        " clock reads negative at its epoch; raise the epoch");
    };
    check_clock(master_clock, "master");
    check_clock(slave_clock, "slave");
}

namespace {

struct EventAfter {
    bool operator()(const SimEvent& a, const SimEvent& b) const
    {
        if (a.fire_at.ns != b.fire_at.ns)
            return a.fire_at.ns > b.fire_at.ns;
        return a.order > b.order;
    }
};

/// Single-run state machine around the event queue. RNG sub-streams:
/// 0 beacon-level SYNC loss, 1 SYNC channel, 2 FOLLOW_UP channel (3 is
/// reserved for rtt_bench), so changing one channel's parameters never
/// perturbs another's draws.
class Runner {
public:
    explicit Runner(const SimConfig& cfg)
        : cfg_(cfg),
          master_clock_(cfg.master_clock),
          slave_raw_(cfg.slave_clock),
          slave_disciplined_(cfg.slave_clock),
          beacon_drop_rng_(Rng::sub_stream(cfg.seed, 0)),
          sync_rng_(Rng::sub_stream(cfg.seed, 1)),
          fu_rng_(Rng::sub_stream(cfg.seed, 2)),
          master_session_(MasterSession::Config{cfg.follow_up_every}),
          slave_session_(SlaveSession::Config{cfg.pairing_timeout_ns, cfg.pending_capacity}),
          estimator_(cfg.estimator_window),
          servo_(cfg.servo)
    {
    }

    RunResult run()
    {
        end_true_ns_ = static_cast<std::uint64_t>(std::llround(cfg_.duration_s * 1e9)) +
                       cfg_.master_clock.base_true_ns.ns;
        schedule_beacon(first_beacon_index());

        while (!queue_.empty()) {
            const SimEvent ev = queue_.top();
            queue_.pop();
            switch (ev.kind) {
            case SimEventKind::BeaconEmit: on_beacon_emit(ev); break;
            case SimEventKind::SyncDeliver: on_sync_deliver(ev); break;
            case SimEventKind::FollowUpDeliver: on_followup_deliver(ev); break;
            case SimEventKind::ServoTick: on_servo_tick(ev); break;
            }
        }
        classify_lost(slave_session_.drain_pending());

        RunResult result;
        result.trace = std::move(trace_);
        result.counters = counters_;
        if (result.trace.size() >= 2) {
            std::vector<double> offsets;
            std::vector<double> wskews;
            offsets.reserve(result.trace.size());
            wskews.reserve(result.trace.size());
            for (const auto& r : result.trace) {
                offsets.push_back(static_cast<double>(r.offset_ns));
                wskews.push_back(r.window_skew_ppm);
            }
            result.offset_stats = compute_stats(offsets);
            result.window_skew_stats = compute_stats(wskews);
        }
        return result;
    }

private:
    struct PendingSample {
        SlaveSession::PairedTuple pair;
        std::uint64_t t_sync_true_ns{0};
    };

    void schedule(TimePointNs at, SimEventKind kind, std::vector<std::uint8_t> payload = {})
    {
        queue_.push(SimEvent{at, next_order_++, kind, std::move(payload)});
    }

    std::uint64_t first_beacon_index()
    {
        const std::uint64_t start_reading = master_clock_.read(cfg_.master_clock.base_true_ns).ns;
        return start_reading / cfg_.beacon_interval_ns + 1;
    }

    void schedule_beacon(std::uint64_t k)
    {
        const std::uint64_t clock_value = k * cfg_.beacon_interval_ns;
        const TimePointNs fire_at = master_clock_.true_time_at(clock_value);
        if (fire_at.ns > end_true_ns_)
            return;
        beacon_index_ = k;
        schedule(fire_at, SimEventKind::BeaconEmit);
    }

    std::uint64_t source_read(SimulatedClock& clock, TimePointNs now)
    {
        if (cfg_.timestamp_source == TimestampSource::Tsf)
            return clock.tsf(now).us * 1000;
        return clock.read(now).ns;
    }

    void on_beacon_emit(const SimEvent& ev)
    {
        const TimePointNs now = ev.fire_at;
        ++counters_.beacons_emitted;

        const TsfTimestamp tsf = master_clock_.tsf(now);
        const std::uint64_t master_time = source_read(master_clock_, now);
        auto out = master_session_.on_beacon(tsf, TimePointNs{master_time});

        const bool beacon_lost = beacon_drop_rng_.bernoulli(cfg_.sync_drop_prob);
        const DelaySample sync_draw = sample_delay(cfg_.sync_channel, sync_rng_);
        if (beacon_lost || sync_draw.dropped) {
            ++counters_.sync_drops;
            counted_.insert(out.sync.seq);
        } else {
            schedule(now + static_cast<std::int64_t>(sync_draw.delay_ns),
                     SimEventKind::SyncDeliver, encode(out.sync));
        }

        if (out.follow_up) {
            ++counters_.followups_emitted;
            const DelaySample fu_draw = sample_delay(cfg_.followup_channel, fu_rng_);
            if (fu_draw.dropped) {
                ++counters_.followups_dropped;
                mark_followup_lost(*out.follow_up);
            } else {
                schedule(now + static_cast<std::int64_t>(fu_draw.delay_ns),
                         SimEventKind::FollowUpDeliver, encode(*out.follow_up));
            }
        }

        schedule_beacon(beacon_index_ + 1);
    }

    void mark_followup_lost(const FollowUpMessage& msg)
    {
        auto mark = [this](std::uint32_t seq) {
            if (!counted_.contains(seq))
                fu_dropped_.insert(seq);
        };
        mark(msg.seq);
        for (const auto& entry : msg.extra)
            mark(entry.seq);
    }

    void on_sync_deliver(const SimEvent& ev)
    {
        const TimePointNs now = ev.fire_at;
        const auto decoded = decode(ev.payload);
        const auto& msg = std::get<SyncMessage>(decoded);

        const std::uint64_t t_slave = source_read(slave_raw_, now);
        const std::uint64_t aux = slave_disciplined_.read(now).ns;
        sync_true_[msg.seq] = now.ns;

        auto result = slave_session_.on_sync(msg, TimePointNs{t_slave}, aux);
        classify_lost(result.evicted);
        if (result.paired)
            enqueue_sample(*result.paired, now);
    }

    void on_followup_deliver(const SimEvent& ev)
    {
        const TimePointNs now = ev.fire_at;
        const auto decoded = decode(ev.payload);
        const auto& msg = std::get<FollowUpMessage>(decoded);

        const std::uint64_t t_local = source_read(slave_raw_, now);
        std::vector<std::uint32_t> expired;
        auto pairs = slave_session_.on_followup(msg, TimePointNs{t_local}, &expired);
        classify_lost(expired);
        for (const auto& pair : pairs)
            enqueue_sample(pair, now);
    }

    void enqueue_sample(const SlaveSession::PairedTuple& pair, TimePointNs now)
    {
        ++counters_.tuples_formed;
        counted_.insert(pair.tuple.seq);

        PendingSample sample;
        sample.pair = pair;
        if (auto it = sync_true_.find(pair.tuple.seq); it != sync_true_.end()) {
            sample.t_sync_true_ns = it->second;
            sync_true_.erase(it);
        }
        pending_samples_.push_back(std::move(sample));
        schedule(now, SimEventKind::ServoTick);
    }

    void on_servo_tick(const SimEvent& ev)
    {
        const TimePointNs now = ev.fire_at;
        const PendingSample sample = std::move(pending_samples_.front());
        pending_samples_.pop_front();

        const auto est = estimator_.update(sample.pair.tuple);
        if (!est) {
            ++counters_.estimator_discards;
            return;
        }

        TraceRecord r;
        r.true_time_ns = sample.t_sync_true_ns;
        r.seq = est->seq;
        r.t_master_ns = sample.pair.tuple.t_master_ns.ns;
        r.t_slave_ns = sample.pair.tuple.t_slave_ns.ns;
        r.offset_ns = est->offset_ns;
        r.skew_ppm = quantize_ppm(est->skew_ppm);
        r.window_skew_ppm = quantize_ppm(est->window_skew_ppm);
        r.dropped_since_last = est->dropped_since_last;
        // Same observable the live slave logs: the tuple offset formula
        // applied to the disciplined clock's SYNC-arrival reading.
        r.disciplined_offset_ns = static_cast<std::int64_t>(sample.pair.aux_slave_time_ns -
                                                            sample.pair.tuple.t_master_ns.ns);

        if (cfg_.servo_enabled) {
            const std::uint64_t interval =
                have_prev_tm_ ? sample.pair.tuple.t_master_ns.ns - prev_tm_ns_
                              : cfg_.beacon_interval_ns;
            const ServoAction action = servo_.sample(r.disciplined_offset_ns, interval);
            if (action.kind == ServoAction::Kind::Step) {
                slave_disciplined_.step(action.value, now, true);
                r.servo_output_ppb = 0;
            } else {
                r.servo_output_ppb = slave_disciplined_.set_freq(action.value, now);
            }
        }
        r.servo_phase = to_string(servo_.phase());

        prev_tm_ns_ = sample.pair.tuple.t_master_ns.ns;
        have_prev_tm_ = true;
        trace_.push_back(std::move(r));
    }

    void classify_lost(const std::vector<std::uint32_t>& seqs)
    {
        for (const std::uint32_t seq : seqs) {
            if (counted_.contains(seq))
                continue;
            counted_.insert(seq);
            sync_true_.erase(seq);
            if (fu_dropped_.contains(seq))
                ++counters_.followup_losses;
            else
                ++counters_.pairing_expiries;
        }
    }

    SimConfig cfg_;
    SimulatedClock master_clock_;
    SimulatedClock slave_raw_;
    SimulatedClock slave_disciplined_;
    Rng beacon_drop_rng_;
    Rng sync_rng_;
    Rng fu_rng_;
    MasterSession master_session_;
    SlaveSession slave_session_;
    Estimator estimator_;
    PiServo servo_;

    std::priority_queue<SimEvent, std::vector<SimEvent>, EventAfter> queue_;
    std::uint64_t next_order_{0};
    std::uint64_t beacon_index_{0};
    std::uint64_t end_true_ns_{0};
    std::deque<PendingSample> pending_samples_;
    std::map<std::uint32_t, std::uint64_t> sync_true_; ///< seq -> SYNC delivery true time
    std::set<std::uint32_t> counted_;    ///< seqs attributed to a fate bucket
    std::set<std::uint32_t> fu_dropped_; ///< covering FOLLOW_UP lost in transit
    std::uint64_t prev_tm_ns_{0};
    bool have_prev_tm_{false};
    RunCounters counters_;
    TraceLog trace_;
};

} // namespace

RunResult run_simulation(const SimConfig& config)
{
    config.validate();
    Runner runner(config);
    return runner.run();
}

BenchResult rtt_bench(const ChannelModel& channel, std::uint64_t probes, std::uint64_t seed)
{
    if (probes < 2)
        throw std::invalid_argument("rtt_bench: probe count must be >= 2");
    channel.validate();

    Rng rng = Rng::sub_stream(seed, 3);
    BenchResult out;
    out.probes_sent = probes;
    std::vector<double> rtts;
    rtts.reserve(probes);
    for (std::uint64_t i = 0; i < probes; ++i) {
        const DelaySample request = sample_delay(channel, rng);
        const DelaySample response = sample_delay(channel, rng);
        if (request.dropped || response.dropped) {
            ++out.probes_dropped;
            continue;
        }
        rtts.push_back(static_cast<double>(request.delay_ns + response.delay_ns));
    }
    if (rtts.size() < 2)
        throw std::runtime_error("rtt_bench: fewer than two probes survived the channel");
    out.rtt = compute_stats(rtts);
    return out;
}

} // namespace rbis
