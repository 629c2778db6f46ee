// SPDX-License-Identifier: Apache-2.0
#include "rbis/daemon.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <sys/timex.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <chrono>
#include <condition_variable>
#include <csignal>
#include <cstring>
#include <deque>
#include <mutex>
#include <optional>
#include <ostream>
#include <thread>
#include <vector>

#include "rbis/clock.hpp"
#include "rbis/estimator.hpp"
#include "rbis/session.hpp"
#include "rbis/trace.hpp"
#include "rbis/wire.hpp"

namespace rbis {

namespace {

std::atomic<bool> g_interrupted{false};

void on_signal(int)
{
    g_interrupted.store(true);
}

void install_signal_handlers()
{
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
}

std::uint64_t monotonic_ns()
{
    timespec ts{};
    clock_gettime(CLOCK_MONOTONIC, &ts);
    return static_cast<std::uint64_t>(ts.tv_sec) * 1'000'000'000ull +
           static_cast<std::uint64_t>(ts.tv_nsec);
}

class Socket {
public:
    Socket() = default;
    ~Socket()
    {
        if (fd_ >= 0)
            ::close(fd_);
    }
    Socket(const Socket&) = delete;
    Socket& operator=(const Socket&) = delete;

    bool open_udp(std::ostream& log)
    {
        fd_ = ::socket(AF_INET, SOCK_DGRAM, 0);
        if (fd_ < 0) {
            log << "error: socket(): " << std::strerror(errno) << "\n";
            return false;
        }
        return true;
    }

    bool enable_broadcast(std::ostream& log)
    {
        const int one = 1;
        if (::setsockopt(fd_, SOL_SOCKET, SO_BROADCAST, &one, sizeof(one)) != 0) {
            log << "error: setsockopt(SO_BROADCAST): " << std::strerror(errno) << "\n";
            return false;
        }
        return true;
    }

    bool bind_to(const std::string& host, std::uint16_t port, std::ostream& log)
    {
        const int one = 1;
        ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
        sockaddr_in addr{};
        addr.sin_family = AF_INET;
        addr.sin_port = htons(port);
        if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
            log << "error: bad bind address '" << host << "'\n";
            return false;
        }
        if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
            log << "error: bind(" << host << ":" << port << "): " << std::strerror(errno)
                << "\n";
            return false;
        }
        return true;
    }

    int fd() const { return fd_; }

private:
    int fd_{-1};
};

bool resolve(const std::string& host, std::uint16_t port, sockaddr_in& out, std::ostream& log)
{
    out = sockaddr_in{};
    out.sin_family = AF_INET;
    out.sin_port = htons(port);
    if (::inet_pton(AF_INET, host.c_str(), &out.sin_addr) == 1)
        return true;
    addrinfo hints{};
    hints.ai_family = AF_INET;
    hints.ai_socktype = SOCK_DGRAM;
    addrinfo* result = nullptr;
    if (::getaddrinfo(host.c_str(), nullptr, &hints, &result) != 0 || result == nullptr) {
        log << "error: cannot resolve '" << host << "'\n";
        return false;
    }
    out.sin_addr = reinterpret_cast<sockaddr_in*>(result->ai_addr)->sin_addr;
    ::freeaddrinfo(result);
    return true;
}

struct RxMessage {
    std::vector<std::uint8_t> bytes;
    std::uint64_t rx_ns{0};
};

/// Receiver-to-processor handoff preserving reception order.
class RxQueue {
public:
    void push(RxMessage msg)
    {
        {
            std::lock_guard lock(mutex_);
            queue_.push_back(std::move(msg));
        }
        ready_.notify_one();
    }

    std::optional<RxMessage> pop_wait(std::chrono::milliseconds timeout)
    {
        std::unique_lock lock(mutex_);
        if (!ready_.wait_for(lock, timeout, [this] { return !queue_.empty() || closed_; }))
            return std::nullopt;
        if (queue_.empty())
            return std::nullopt;
        RxMessage msg = std::move(queue_.front());
        queue_.pop_front();
        return msg;
    }

    void close()
    {
        {
            std::lock_guard lock(mutex_);
            closed_ = true;
        }
        ready_.notify_all();
    }

private:
    std::mutex mutex_;
    std::condition_variable ready_;
    std::deque<RxMessage> queue_;
    bool closed_{false};
};

bool send_to(int fd, const std::vector<std::uint8_t>& bytes, const sockaddr_in& dst)
{
    const auto sent = ::sendto(fd, bytes.data(), bytes.size(), 0,
                               reinterpret_cast<const sockaddr*>(&dst), sizeof(dst));
    return sent == static_cast<ssize_t>(bytes.size());
}

/// Slew the host clock by adj_ppb; needs CAP_SYS_TIME. Returns false (and
/// logs once) when the kernel refuses.
bool steer_host_freq(std::int64_t adj_ppb, std::ostream& log, bool& warned)
{
    timex tx{};
    tx.modes = ADJ_FREQUENCY;
    // struct timex frequency is in ppm with a 16-bit fractional part.
    tx.freq = static_cast<long>((adj_ppb << 16) / 1000);
    if (::clock_adjtime(CLOCK_REALTIME, &tx) < 0) {
        if (!warned) {
            log << "warning: clock_adjtime failed (" << std::strerror(errno)
                << "); host steering disabled\n";
            warned = true;
        }
        return false;
    }
    return true;
}

} // namespace

int run_master_daemon(const DaemonConfig& config, std::ostream& log)
{
    install_signal_handlers();

    Socket sock;
    if (!sock.open_udp(log))
        return 1;
    if (config.target_host == "255.255.255.255" ||
        config.target_host.ends_with(".255")) {
        if (!sock.enable_broadcast(log))
            return 1;
    }
    sockaddr_in sync_dst{};
    sockaddr_in fu_dst{};
    if (!resolve(config.target_host, config.sync_port, sync_dst, log) ||
        !resolve(config.target_host, config.followup_port, fu_dst, log))
        return 1;

    MasterSession session(MasterSession::Config{config.follow_up_every});
    const auto start = std::chrono::steady_clock::now();
    const auto interval = std::chrono::nanoseconds(config.beacon_interval_ns);
    const bool bounded = config.run_s > 0.0;
    const auto deadline =
        start + std::chrono::nanoseconds(static_cast<std::int64_t>(config.run_s * 1e9));

    log << "master: SYNC to " << config.target_host << ":" << config.sync_port
        << ", FOLLOW_UP to :" << config.followup_port << ", interval "
        << config.beacon_interval_ns << " ns\n";

    std::uint64_t beacons = 0;
    for (std::uint64_t k = 1; !g_interrupted.load(); ++k) {
        const auto emit_at = start + k * interval;
        if (bounded && emit_at > deadline)
            break;
        std::this_thread::sleep_until(emit_at);
        if (g_interrupted.load())
            break;

        const std::uint64_t now_ns = monotonic_ns();
        const auto out =
            session.on_beacon(TsfTimestamp{now_ns / 1000}, TimePointNs{now_ns});
        if (!send_to(sock.fd(), encode(out.sync), sync_dst)) {
            log << "error: sendto(SYNC): " << std::strerror(errno) << "\n";
            return 1;
        }
        ++beacons;
        if (out.follow_up && !send_to(sock.fd(), encode(*out.follow_up), fu_dst)) {
            log << "error: sendto(FOLLOW_UP): " << std::strerror(errno) << "\n";
            return 1;
        }
    }
    log << "master: sent " << beacons << " beacons\n";
    return 0;
}

int run_slave_daemon(const DaemonConfig& config, std::ostream& log)
{
    install_signal_handlers();

    Socket sync_sock;
    Socket fu_sock;
    if (!sync_sock.open_udp(log) || !fu_sock.open_udp(log))
        return 1;
    if (!sync_sock.bind_to(config.bind_host, config.sync_port, log) ||
        !fu_sock.bind_to(config.bind_host, config.followup_port, log))
        return 1;

    log << "slave: listening on " << config.bind_host << ":" << config.sync_port << "/"
        << config.followup_port << "\n";

    RxQueue queue;
    std::atomic<bool> stop{false};
    std::thread receiver([&] {
        pollfd fds[2] = {{sync_sock.fd(), POLLIN, 0}, {fu_sock.fd(), POLLIN, 0}};
        std::vector<std::uint8_t> buf(65536);
        while (!stop.load() && !g_interrupted.load()) {
            const int n = ::poll(fds, 2, 100);
            if (n <= 0)
                continue;
            for (auto& pfd : fds) {
                if (!(pfd.revents & POLLIN))
                    continue;
                const auto got = ::recv(pfd.fd, buf.data(), buf.size(), 0);
                const std::uint64_t rx_ns = monotonic_ns();
                if (got <= 0)
                    continue;
                queue.push(RxMessage{{buf.begin(), buf.begin() + got}, rx_ns});
            }
        }
        queue.close();
    });

    SlaveSession session(
        SlaveSession::Config{config.pairing_timeout_ns, config.pending_capacity});
    Estimator estimator(config.estimator_window);
    PiServo servo(config.servo);

    // Logical disciplined clock layered over the local monotonic clock. All
    // overlay operations use reception timestamps, which arrive in order, so
    // the overlay's monotone-time requirement holds.
    const std::uint64_t epoch_ns = monotonic_ns();
    SimulatedClock overlay(SimulatedClock::Params{0, 0.0, 0, TimePointNs{epoch_ns}});

    TraceLog trace;
    const bool bounded = config.run_s > 0.0;
    const std::uint64_t deadline_ns =
        epoch_ns + static_cast<std::uint64_t>(config.run_s * 1e9);
    bool steer_warned = false;
    std::uint64_t prev_tm_ns = 0;
    bool have_prev_tm = false;
    std::uint64_t tuples = 0;

    // applied_at is the pairing-completion reception time; using it (rather
    // than the SYNC reception time) keeps overlay inputs non-decreasing when
    // a later SYNC arrives before the pairing FOLLOW_UP.
    auto process_pair = [&](const SlaveSession::PairedTuple& pair, TimePointNs applied_at) {
        const auto est = estimator.update(pair.tuple);
        if (!est)
            return;
        ++tuples;

        TraceRecord r;
        r.seq = est->seq;
        r.t_master_ns = pair.tuple.t_master_ns.ns;
        r.t_slave_ns = pair.tuple.t_slave_ns.ns;
        r.offset_ns = est->offset_ns;
        r.skew_ppm = quantize_ppm(est->skew_ppm);
        r.window_skew_ppm = quantize_ppm(est->window_skew_ppm);
        r.dropped_since_last = est->dropped_since_last;
        const std::int64_t overlay_offset = static_cast<std::int64_t>(
            pair.aux_slave_time_ns - pair.tuple.t_master_ns.ns);
        r.disciplined_offset_ns = overlay_offset;

        if (config.servo_enabled) {
            const std::uint64_t interval = have_prev_tm
                                               ? pair.tuple.t_master_ns.ns - prev_tm_ns
                                               : config.beacon_interval_ns;
            const ServoAction action = servo.sample(overlay_offset, interval);
            if (action.kind == ServoAction::Kind::Step) {
                overlay.step(action.value, applied_at, true);
            } else {
                r.servo_output_ppb = overlay.set_freq(action.value, applied_at);
                if (config.steer_host)
                    steer_host_freq(action.value, log, steer_warned);
            }
        }
        r.servo_phase = to_string(servo.phase());
        prev_tm_ns = pair.tuple.t_master_ns.ns;
        have_prev_tm = true;
        trace.push_back(r);

        log << "tuple seq=" << r.seq << " offset_ns=" << r.offset_ns
            << " skew_ppm=" << r.skew_ppm << " window_skew_ppm=" << r.window_skew_ppm
            << " phase=" << r.servo_phase << "\n";
    };

    while (!g_interrupted.load()) {
        if (bounded && monotonic_ns() >= deadline_ns)
            break;
        auto msg = queue.pop_wait(std::chrono::milliseconds(100));
        if (!msg)
            continue;
        const auto decoded = decode(msg->bytes);
        if (const auto* err = std::get_if<DecodeError>(&decoded)) {
            log << "warning: dropped datagram: " << to_string(*err) << "\n";
            continue;
        }
        const TimePointNs rx{msg->rx_ns};
        if (const auto* sync = std::get_if<SyncMessage>(&decoded)) {
            const std::uint64_t aux = overlay.read(rx).ns;
            auto result = session.on_sync(*sync, rx, aux);
            if (result.paired)
                process_pair(*result.paired, rx);
        } else if (const auto* fu = std::get_if<FollowUpMessage>(&decoded)) {
            for (const auto& pair : session.on_followup(*fu, rx))
                process_pair(pair, rx);
        }
    }

    stop.store(true);
    receiver.join();

    log << "slave: " << tuples << " tuples, " << session.expired_total() << " expired, "
        << session.unmatched_followups() << " unmatched follow-ups\n";
    if (!config.trace_file.empty()) {
        write_trace_file(trace, config.trace_file);
        log << "slave: trace written to " << config.trace_file << "\n";
    }
    return 0;
}

} // namespace rbis
