// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "rbis/time_types.hpp"

namespace rbis {

// Wire layout, all integers big-endian:
//
//   offset  size  field
//   0       4     magic "RBIS" (0x52 0x42 0x49 0x53)
//   4       1     version, 0x01
//   5       1     type: 0x01 SYNC, 0x02 FOLLOW_UP
//   6       4     seq
//   10      8     tsf_us
//   [FOLLOW_UP only]
//   18      8     master_time_ns
//   [FOLLOW_UP with batched timestamps only]
//   26      1     extra count k
//   27      12*k  k groups of (seq u32, master_time_ns u64)
//
// SYNC is 18 bytes; a FOLLOW_UP without extras is 26 bytes exactly.

inline constexpr std::uint8_t kWireVersion = 0x01;
inline constexpr std::size_t kSyncWireSize = 18;
inline constexpr std::size_t kFollowUpWireSize = 26;

struct SyncMessage {
    std::uint32_t seq{0};
    TsfTimestamp tsf_us{};

    friend bool operator==(const SyncMessage&, const SyncMessage&) = default;
};

struct FollowUpEntry {
    std::uint32_t seq{0};
    std::uint64_t master_time_ns{0};

    friend bool operator==(const FollowUpEntry&, const FollowUpEntry&) = default;
};

struct FollowUpMessage {
    std::uint32_t seq{0};
    TsfTimestamp tsf_us{};
    std::uint64_t master_time_ns{0};
    std::vector<FollowUpEntry> extra; ///< batched timestamps beyond the first

    friend bool operator==(const FollowUpMessage&, const FollowUpMessage&) = default;
};

enum class DecodeError : std::uint8_t {
    BadMagic,
    BadVersion,
    BadType,
    Truncated,
    TrailingBytes,
};

const char* to_string(DecodeError err);

using DecodeResult = std::variant<SyncMessage, FollowUpMessage, DecodeError>;

std::vector<std::uint8_t> encode(const SyncMessage& msg);
std::vector<std::uint8_t> encode(const FollowUpMessage& msg);
DecodeResult decode(std::span<const std::uint8_t> bytes);

} // namespace rbis
