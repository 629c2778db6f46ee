// SPDX-License-Identifier: Apache-2.0
#include "rbis/wire.hpp"

#include <array>

namespace rbis {

namespace {

constexpr std::array<std::uint8_t, 4> kMagic{0x52, 0x42, 0x49, 0x53}; // "RBIS"
constexpr std::uint8_t kTypeSync = 0x01;
constexpr std::uint8_t kTypeFollowUp = 0x02;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v)
{
    out.push_back(static_cast<std::uint8_t>(v >> 24));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v)
{
    for (int shift = 56; shift >= 0; shift -= 8)
        out.push_back(static_cast<std::uint8_t>(v >> shift));
}

std::uint32_t get_u32(std::span<const std::uint8_t> in, std::size_t at)
{
    return (std::uint32_t{in[at]} << 24) | (std::uint32_t{in[at + 1]} << 16) |
           (std::uint32_t{in[at + 2]} << 8) | std::uint32_t{in[at + 3]};
}

std::uint64_t get_u64(std::span<const std::uint8_t> in, std::size_t at)
{
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < 8; ++i)
        v = (v << 8) | in[at + i];
    return v;
}

void put_header(std::vector<std::uint8_t>& out, std::uint8_t type,
                std::uint32_t seq, std::uint64_t tsf_us)
{
    out.insert(out.end(), kMagic.begin(), kMagic.end());
    out.push_back(kWireVersion);
    out.push_back(type);
    put_u32(out, seq);
    put_u64(out, tsf_us);
}

} // namespace

const char* to_string(DecodeError err)
{
    switch (err) {
    case DecodeError::BadMagic:      return "bad magic";
    case DecodeError::BadVersion:    return "unknown version";
    case DecodeError::BadType:       return "unknown message type";
    case DecodeError::Truncated:     return "truncated message";
    case DecodeError::TrailingBytes: return "trailing bytes";
    }
    return "?";
}

std::vector<std::uint8_t> encode(const SyncMessage& msg)
{
    std::vector<std::uint8_t> out;
    out.reserve(kSyncWireSize);
    put_header(out, kTypeSync, msg.seq, msg.tsf_us.us);
    return out;
}

std::vector<std::uint8_t> encode(const FollowUpMessage& msg)
{
    std::vector<std::uint8_t> out;
    out.reserve(kFollowUpWireSize + (msg.extra.empty() ? 0 : 1 + 12 * msg.extra.size()));
    put_header(out, kTypeFollowUp, msg.seq, msg.tsf_us.us);
    put_u64(out, msg.master_time_ns);
    if (!msg.extra.empty()) {
        out.push_back(static_cast<std::uint8_t>(msg.extra.size()));
        for (const auto& entry : msg.extra) {
            put_u32(out, entry.seq);
            put_u64(out, entry.master_time_ns);
        }
    }
    return out;
}

DecodeResult decode(std::span<const std::uint8_t> bytes)
{
    if (bytes.size() < kMagic.size())
        return DecodeError::Truncated;
    for (std::size_t i = 0; i < kMagic.size(); ++i)
        if (bytes[i] != kMagic[i])
            return DecodeError::BadMagic;
    if (bytes.size() < 6)
        return DecodeError::Truncated;
    if (bytes[4] != kWireVersion)
        return DecodeError::BadVersion;
    const std::uint8_t type = bytes[5];
    if (type != kTypeSync && type != kTypeFollowUp)
        return DecodeError::BadType;

    if (type == kTypeSync) {
        if (bytes.size() < kSyncWireSize)
            return DecodeError::Truncated;
        if (bytes.size() > kSyncWireSize)
            return DecodeError::TrailingBytes;
        return SyncMessage{get_u32(bytes, 6), TsfTimestamp{get_u64(bytes, 10)}};
    }

    if (bytes.size() < kFollowUpWireSize)
        return DecodeError::Truncated;
    FollowUpMessage msg{get_u32(bytes, 6), TsfTimestamp{get_u64(bytes, 10)},
                        get_u64(bytes, 18), {}};
    if (bytes.size() == kFollowUpWireSize)
        return msg;

    const std::size_t count = bytes[kFollowUpWireSize];
    const std::size_t expected = kFollowUpWireSize + 1 + 12 * count;
    if (bytes.size() < expected)
        return DecodeError::Truncated;
    if (bytes.size() > expected)
        return DecodeError::TrailingBytes;
    msg.extra.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t at = kFollowUpWireSize + 1 + 12 * i;
        msg.extra.push_back({get_u32(bytes, at), get_u64(bytes, at + 4)});
    }
    return msg;
}

} // namespace rbis
