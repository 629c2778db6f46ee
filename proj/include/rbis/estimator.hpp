// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <stdexcept>
#include <vector>

#include "rbis/time_types.hpp"

namespace rbis {

/// Unrecoverable per-session protocol violation (master time running
/// backwards, TSF regression). Distinct from per-message discards, which are
/// counted and ignored.
class SessionFault : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// One paired broadcast observation: the master's timestamp for SYNC k and
/// the slave's local reception timestamp for the same SYNC.
struct TimestampTuple {
    std::uint32_t seq{0};
    TimePointNs t_master_ns{};
    TimePointNs t_slave_ns{};

    friend bool operator==(const TimestampTuple&, const TimestampTuple&) = default;
};

/// Offset/skew estimate emitted per accepted tuple.
struct SyncEstimate {
    std::int64_t offset_ns{0};    ///< slave minus master at this SYNC
    double skew_ppm{0.0};         ///< instantaneous, from the previous tuple
    std::uint32_t seq{0};
    std::uint16_t dropped_since_last{0};
    double window_skew_ppm{0.0};  ///< least-squares fit over the window
    bool valid_skew{false};       ///< false for the first tuple of a session
};

/// Per-tuple offset increment with its sequence gap; the drop-signature raw
/// material (a gap of g carries about g times the per-beacon drift).
struct IncrementRecord {
    std::uint32_t seq{0};
    std::uint32_t seq_gap{0};
    std::int64_t delta_offset_ns{0};
};

/// Offset: slave timestamp minus master timestamp, exact in signed 64-bit.
std::int64_t compute_offset(const TimestampTuple& tuple);

/// Instantaneous skew in ppm between two offset samples. Throws
/// std::invalid_argument unless curr_t_master_ns > prev_t_master_ns.
double compute_skew_ppm(std::int64_t prev_offset_ns, std::int64_t curr_offset_ns,
                        TimePointNs prev_t_master_ns, TimePointNs curr_t_master_ns);

/// Streaming offset/skew estimator. Strict sequence order: duplicates and
/// out-of-order tuples are discarded and counted; a master-time regression on
/// an otherwise acceptable tuple throws SessionFault.
class Estimator {
public:
    explicit Estimator(std::size_t window = 64);

    /// Feed one tuple; returns the estimate, or nullopt for a discard.
    std::optional<SyncEstimate> update(const TimestampTuple& tuple);

    /// Offset increments per accepted tuple (empty until two tuples accepted).
    const std::vector<IncrementRecord>& raw_increment_series() const { return increments_; }

    std::uint64_t accepted() const { return accepted_; }
    std::uint64_t discarded() const { return discarded_; }
    std::size_t window() const { return window_; }

    void reset();

private:
    double window_slope_ppm() const;

    std::size_t window_;
    std::uint64_t accepted_{0};
    std::uint64_t discarded_{0};
    std::uint32_t last_seq_{0};
    TimePointNs last_t_master_{};
    std::int64_t last_offset_{0};
    std::deque<std::pair<std::uint64_t, std::int64_t>> samples_; ///< (t_master, offset)
    std::vector<IncrementRecord> increments_;
};

} // namespace rbis
