// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rbis/stats.hpp"

namespace rbis {

/// One row per formed tuple. true_time_ns is the SYNC delivery instant in
/// simulation and 0 in live mode; ppm fields are quantized to 6 decimals at
/// record creation so the CSV round-trips exactly.
struct TraceRecord {
    std::uint64_t true_time_ns{0};
    std::uint32_t seq{0};
    std::uint64_t t_master_ns{0};
    std::uint64_t t_slave_ns{0};
    std::int64_t offset_ns{0};
    double skew_ppm{0.0};
    double window_skew_ppm{0.0};
    std::uint16_t dropped_since_last{0};
    std::string servo_phase{"init"};
    std::int64_t servo_output_ppb{0};
    std::int64_t disciplined_offset_ns{0};

    friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

using TraceLog = std::vector<TraceRecord>;

inline constexpr const char* kTraceVersionLine = "rbis-trace-v1";

class TraceFormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Round a ppm value to the 6-decimal grid used by the CSV encoding.
double quantize_ppm(double ppm);

void write_trace(const TraceLog& log, std::ostream& out);
void write_trace_file(const TraceLog& log, const std::string& path);

/// Throws TraceFormatError citing the 1-based file line of the offending
/// row (line 1 is the version line, line 2 the header).
TraceLog read_trace(std::istream& in);
TraceLog read_trace_file(const std::string& path);

/// Offset-increment population grouped by the seq gap to the previous row;
/// gap 1 means no beacon was missed in between.
struct DropSignatureRow {
    std::uint32_t seq_gap{1};
    std::uint64_t count{0};
    double mean_delta_offset_ns{0.0};
    double mean_delta_per_gap_ns{0.0};
};

struct AnalysisReport {
    std::size_t rows{0};
    std::optional<SummaryMetrics> offset_stats;
    std::optional<SummaryMetrics> window_skew_stats;
    std::optional<SummaryMetrics> instant_skew_stats;
    std::vector<DropSignatureRow> drop_signature;
    std::size_t locked_rows{0};
    std::optional<SummaryMetrics> locked_disciplined_stats;

    std::string to_string() const;
};

AnalysisReport analyze_trace(const TraceLog& log);

} // namespace rbis
