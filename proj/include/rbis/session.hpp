// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <vector>

#include "rbis/estimator.hpp"
#include "rbis/time_types.hpp"
#include "rbis/wire.hpp"

namespace rbis {

/// Master side of the broadcast exchange: assigns sequence numbers and
/// batches (seq, master timestamp) pairs into FOLLOW_UPs every
/// follow_up_every beacons, so SYNC and FOLLOW_UP intervals stay decoupled.
class MasterSession {
public:
    struct Config {
        std::uint32_t follow_up_every{1}; ///< 1..256
    };

    struct BeaconOutput {
        SyncMessage sync;
        std::optional<FollowUpMessage> follow_up;
    };

    MasterSession() : MasterSession(Config{}) {}
    explicit MasterSession(const Config& config);

    /// Called at each beacon with the emitter's TSF and timestamp-source
    /// reading. TSF must be non-decreasing (equal values are accepted).
    BeaconOutput on_beacon(TsfTimestamp tsf_us, TimePointNs master_time_ns);

    std::uint32_t next_seq() const { return next_seq_; }

private:
    struct BatchEntry {
        std::uint32_t seq;
        TsfTimestamp tsf_us;
        std::uint64_t master_time_ns;
    };

    Config config_;
    std::uint32_t next_seq_{1};
    bool have_tsf_{false};
    TsfTimestamp last_tsf_{};
    std::vector<BatchEntry> batch_;
};

/// Slave side: records SYNC reception timestamps keyed by seq and pairs them
/// with FOLLOW_UP timestamps. Either side may arrive first: a FOLLOW_UP entry
/// with no pending SYNC is buffered and pairs the moment the SYNC lands.
/// First reception wins on duplicate seq; entries expire after
/// pairing_timeout or fall off when capacity overflows (oldest first).
class SlaveSession {
public:
    struct Config {
        std::uint64_t pairing_timeout_ns{1'000'000'000};
        std::size_t pending_capacity{128};
    };

    /// Pairing result: the estimator tuple plus the auxiliary local reading
    /// sampled at the same SYNC reception (the disciplined clock in the
    /// simulator, the overlay clock in a live daemon).
    struct PairedTuple {
        TimestampTuple tuple;
        std::uint64_t aux_slave_time_ns{0};
    };

    struct SyncResult {
        std::vector<std::uint32_t> evicted; ///< seqs dropped by timeout or capacity
        std::optional<PairedTuple> paired;  ///< set when a buffered FOLLOW_UP was waiting
    };

    SlaveSession() : SlaveSession(Config{}) {}
    explicit SlaveSession(const Config& config);

    /// Record a SYNC reception at local_time_ns (the estimator timestamp
    /// source); aux_time_ns rides along for the servo path.
    SyncResult on_sync(const SyncMessage& msg, TimePointNs local_time_ns,
                       std::uint64_t aux_time_ns = 0);

    /// Pair a FOLLOW_UP (header plus batched extras) against pending SYNCs.
    /// Entries with no pending SYNC are buffered until one arrives or the
    /// pairing timeout passes; expiries are counted, never errors. The
    /// out-parameter, when given, collects SYNC seqs expired during this
    /// call.
    std::vector<PairedTuple> on_followup(const FollowUpMessage& msg, TimePointNs local_time_ns,
                                         std::vector<std::uint32_t>* expired_out = nullptr);

    /// Remove one pending entry (simulator accounting when the covering
    /// FOLLOW_UP is lost in transit). Returns whether it existed.
    bool remove_pending(std::uint32_t seq);

    /// Evict everything still pending (end of run); returns the seqs.
    std::vector<std::uint32_t> drain_pending();

    std::size_t pending_count() const { return pending_.size(); }
    std::size_t orphan_count() const { return orphans_.size(); }
    std::uint64_t duplicates_ignored() const { return duplicates_ignored_; }
    std::uint64_t unmatched_followups() const { return unmatched_followups_; }
    std::uint64_t expired_total() const { return expired_total_; }

private:
    struct Pending {
        std::uint64_t t_slave_ns;
        std::uint64_t aux_time_ns;
        std::uint64_t expiry_ns;
    };

    struct Orphan {
        std::uint64_t master_time_ns;
        std::uint64_t expiry_ns;
    };

    std::vector<std::uint32_t> purge_expired(std::uint64_t now_ns);

    Config config_;
    std::map<std::uint32_t, Pending> pending_;
    std::map<std::uint32_t, Orphan> orphans_; ///< FOLLOW_UP entries seen before their SYNC
    std::deque<std::uint32_t> insertion_order_;
    std::uint64_t duplicates_ignored_{0};
    std::uint64_t unmatched_followups_{0};
    std::uint64_t expired_total_{0};
};

} // namespace rbis
