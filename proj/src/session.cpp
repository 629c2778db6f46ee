// SPDX-License-Identifier: Apache-2.0
#include "rbis/session.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace rbis {

MasterSession::MasterSession(const Config& config) : config_(config)
{
    if (config_.follow_up_every < 1 || config_.follow_up_every > 256)
        throw std::invalid_argument("MasterSession: follow_up_every must be in 1..256");
}

MasterSession::BeaconOutput MasterSession::on_beacon(TsfTimestamp tsf_us,
                                                     TimePointNs master_time_ns)
{
    if (have_tsf_ && tsf_us < last_tsf_)
        throw SessionFault("master: TSF regressed from " + std::to_string(last_tsf_.us) +
                           " to " + std::to_string(tsf_us.us));
    last_tsf_ = tsf_us;
    have_tsf_ = true;

    const std::uint32_t seq = next_seq_++;
    batch_.push_back({seq, tsf_us, master_time_ns.ns});

    BeaconOutput out;
    out.sync = SyncMessage{seq, tsf_us};
    if (batch_.size() >= config_.follow_up_every) {
        FollowUpMessage fu;
        fu.seq = batch_.front().seq;
        fu.tsf_us = batch_.front().tsf_us;
        fu.master_time_ns = batch_.front().master_time_ns;
        for (std::size_t i = 1; i < batch_.size(); ++i)
            fu.extra.push_back({batch_[i].seq, batch_[i].master_time_ns});
        batch_.clear();
        out.follow_up = std::move(fu);
    }
    return out;
}

SlaveSession::SlaveSession(const Config& config) : config_(config)
{
    if (config_.pending_capacity < 1)
        throw std::invalid_argument("SlaveSession: pending_capacity must be >= 1");
}

std::vector<std::uint32_t> SlaveSession::purge_expired(std::uint64_t now_ns)
{
    std::vector<std::uint32_t> expired;
    for (auto it = pending_.begin(); it != pending_.end();) {
        if (it->second.expiry_ns < now_ns) {
            expired.push_back(it->first);
            it = pending_.erase(it);
        } else {
            ++it;
        }
    }
    expired_total_ += expired.size();

    for (auto it = orphans_.begin(); it != orphans_.end();) {
        if (it->second.expiry_ns < now_ns) {
            ++unmatched_followups_;
            it = orphans_.erase(it);
        } else {
            ++it;
        }
    }
    return expired;
}

SlaveSession::SyncResult SlaveSession::on_sync(const SyncMessage& msg,
                                               TimePointNs local_time_ns,
                                               std::uint64_t aux_time_ns)
{
    SyncResult result;
    result.evicted = purge_expired(local_time_ns.ns);

    if (pending_.contains(msg.seq)) {
        ++duplicates_ignored_; // first reception wins
        return result;
    }

    if (auto it = orphans_.find(msg.seq); it != orphans_.end()) {
        PairedTuple pt;
        pt.tuple = TimestampTuple{msg.seq, TimePointNs{it->second.master_time_ns},
                                  local_time_ns};
        pt.aux_slave_time_ns = aux_time_ns;
        orphans_.erase(it);
        result.paired = pt;
        return result;
    }

    while (pending_.size() >= config_.pending_capacity) {
        // insertion_order_ may lead with seqs already paired or expired.
        const std::uint32_t oldest = insertion_order_.front();
        insertion_order_.pop_front();
        if (pending_.erase(oldest) > 0) {
            ++expired_total_;
            result.evicted.push_back(oldest);
        }
    }

    pending_[msg.seq] = Pending{local_time_ns.ns, aux_time_ns,
                                local_time_ns.ns + config_.pairing_timeout_ns};
    insertion_order_.push_back(msg.seq);
    return result;
}

std::vector<SlaveSession::PairedTuple> SlaveSession::on_followup(
    const FollowUpMessage& msg, TimePointNs local_time_ns,
    std::vector<std::uint32_t>* expired_out)
{
    auto expired = purge_expired(local_time_ns.ns);
    if (expired_out)
        *expired_out = std::move(expired);

    // Header entry first, then extras; emit in ascending seq order.
    std::vector<FollowUpEntry> entries;
    entries.reserve(1 + msg.extra.size());
    entries.push_back({msg.seq, msg.master_time_ns});
    entries.insert(entries.end(), msg.extra.begin(), msg.extra.end());
    std::sort(entries.begin(), entries.end(),
              [](const FollowUpEntry& a, const FollowUpEntry& b) { return a.seq < b.seq; });

    std::vector<PairedTuple> paired;
    for (const auto& entry : entries) {
        auto it = pending_.find(entry.seq);
        if (it == pending_.end()) {
            // SYNC not here yet (or lost): buffer and wait, first entry wins.
            if (!orphans_.contains(entry.seq)) {
                if (orphans_.size() >= config_.pending_capacity) {
                    orphans_.erase(orphans_.begin());
                    ++unmatched_followups_;
                }
                orphans_[entry.seq] = Orphan{entry.master_time_ns,
                                             local_time_ns.ns + config_.pairing_timeout_ns};
            }
            continue;
        }
        PairedTuple pt;
        pt.tuple = TimestampTuple{entry.seq, TimePointNs{entry.master_time_ns},
                                  TimePointNs{it->second.t_slave_ns}};
        pt.aux_slave_time_ns = it->second.aux_time_ns;
        paired.push_back(pt);
        pending_.erase(it);
    }
    return paired;
}

bool SlaveSession::remove_pending(std::uint32_t seq)
{
    return pending_.erase(seq) > 0;
}

std::vector<std::uint32_t> SlaveSession::drain_pending()
{
    std::vector<std::uint32_t> seqs;
    seqs.reserve(pending_.size());
    for (const auto& [seq, entry] : pending_)
        seqs.push_back(seq);
    expired_total_ += seqs.size();
    unmatched_followups_ += orphans_.size();
    pending_.clear();
    orphans_.clear();
    insertion_order_.clear();
    return seqs;
}

} // namespace rbis
