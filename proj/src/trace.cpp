// SPDX-License-Identifier: Apache-2.0
#include "rbis/trace.hpp"

#include <array>
#include <charconv>
#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <ostream>
#include <string_view>

namespace rbis {

namespace {

constexpr const char* kHeaderLine =
    "true_time_ns,seq,t_master_ns,t_slave_ns,offset_ns,skew_ppm,window_skew_ppm,"
    "dropped_since_last,servo_phase,servo_output_ppb,disciplined_offset_ns";

constexpr std::size_t kFieldCount = 11;

bool known_phase(std::string_view phase)
{
    return phase == "init" || phase == "stepping" || phase == "tracking" || phase == "locked";
}

[[noreturn]] void fail(std::size_t line, const std::string& what)
{
    throw TraceFormatError("trace: line " + std::to_string(line) + ": " + what);
}

template <typename T>
T parse_int(std::string_view s, std::size_t line, const char* field)
{
    T value{};
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, value);
    if (ec != std::errc{} || ptr != end)
        fail(line, std::string("bad ") + field + " value '" + std::string(s) + "'");
    return value;
}

double parse_real(std::string_view s, std::size_t line, const char* field)
{
    double value{};
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, value);
    if (ec != std::errc{} || ptr != end)
        fail(line, std::string("bad ") + field + " value '" + std::string(s) + "'");
    return value;
}

std::size_t split_fields(std::string_view row, std::array<std::string_view, kFieldCount>& out)
{
    std::size_t count = 0;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = row.find(',', start);
        const std::string_view piece =
            comma == std::string_view::npos ? row.substr(start) : row.substr(start, comma - start);
        if (count < kFieldCount)
            out[count] = piece;
        ++count;
        if (comma == std::string_view::npos)
            break;
        start = comma + 1;
    }
    return count;
}

void format_ppm(char* buf, std::size_t cap, double ppm)
{
    std::snprintf(buf, cap, "%.6f", ppm);
}

} // namespace

double quantize_ppm(double ppm)
{
    char buf[64];
    format_ppm(buf, sizeof(buf), ppm);
    return std::strtod(buf, nullptr);
}

void write_trace(const TraceLog& log, std::ostream& out)
{
    out << kTraceVersionLine << '\n' << kHeaderLine << '\n';
    char buf[256];
    for (const auto& r : log) {
        char skew[64];
        char wskew[64];
        format_ppm(skew, sizeof(skew), r.skew_ppm);
        format_ppm(wskew, sizeof(wskew), r.window_skew_ppm);
        std::snprintf(buf, sizeof(buf),
                      "%" PRIu64 ",%" PRIu32 ",%" PRIu64 ",%" PRIu64 ",%" PRId64
                      ",%s,%s,%u,%s,%" PRId64 ",%" PRId64 "\n",
                      r.true_time_ns, r.seq, r.t_master_ns, r.t_slave_ns, r.offset_ns, skew,
                      wskew, static_cast<unsigned>(r.dropped_since_last), r.servo_phase.c_str(),
                      r.servo_output_ppb, r.disciplined_offset_ns);
        out << buf;
    }
}

void write_trace_file(const TraceLog& log, const std::string& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("trace: cannot open for writing: " + path);
    write_trace(log, out);
    out.flush();
    if (!out)
        throw std::runtime_error("trace: write failed: " + path);
}

TraceLog read_trace(std::istream& in)
{
    std::string line;
    std::size_t line_no = 0;

    auto next_line = [&](std::string& dst) {
        if (!std::getline(in, dst))
            return false;
        ++line_no;
        if (!dst.empty() && dst.back() == '\r')
            dst.pop_back();
        return true;
    };

    if (!next_line(line) || line != kTraceVersionLine)
        fail(1, std::string("expected version line '") + kTraceVersionLine + "'");
    if (!next_line(line) || line != kHeaderLine)
        fail(2, "header row does not match the expected column list");

    TraceLog log;
    while (next_line(line)) {
        if (line.empty())
            fail(line_no, "empty row");
        std::array<std::string_view, kFieldCount> f;
        if (split_fields(line, f) != kFieldCount)
            fail(line_no, "expected " + std::to_string(kFieldCount) + " fields");

        TraceRecord r;
        r.true_time_ns = parse_int<std::uint64_t>(f[0], line_no, "true_time_ns");
        r.seq = parse_int<std::uint32_t>(f[1], line_no, "seq");
        r.t_master_ns = parse_int<std::uint64_t>(f[2], line_no, "t_master_ns");
        r.t_slave_ns = parse_int<std::uint64_t>(f[3], line_no, "t_slave_ns");
        r.offset_ns = parse_int<std::int64_t>(f[4], line_no, "offset_ns");
        r.skew_ppm = parse_real(f[5], line_no, "skew_ppm");
        r.window_skew_ppm = parse_real(f[6], line_no, "window_skew_ppm");
        r.dropped_since_last = parse_int<std::uint16_t>(f[7], line_no, "dropped_since_last");
        if (!known_phase(f[8]))
            fail(line_no, "unknown servo_phase '" + std::string(f[8]) + "'");
        r.servo_phase = std::string(f[8]);
        r.servo_output_ppb = parse_int<std::int64_t>(f[9], line_no, "servo_output_ppb");
        r.disciplined_offset_ns = parse_int<std::int64_t>(f[10], line_no, "disciplined_offset_ns");
        log.push_back(std::move(r));
    }
    return log;
}

TraceLog read_trace_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("trace: cannot open for reading: " + path);
    return read_trace(in);
}

AnalysisReport analyze_trace(const TraceLog& log)
{
    AnalysisReport report;
    report.rows = log.size();

    auto stats_over = [](const std::vector<double>& v) -> std::optional<SummaryMetrics> {
        if (v.size() < 2)
            return std::nullopt;
        return compute_stats(v);
    };

    std::vector<double> offsets;
    std::vector<double> wskews;
    std::vector<double> skews;
    std::vector<double> locked_disc;
    offsets.reserve(log.size());
    wskews.reserve(log.size());
    skews.reserve(log.size());
    for (const auto& r : log) {
        offsets.push_back(static_cast<double>(r.offset_ns));
        wskews.push_back(r.window_skew_ppm);
        skews.push_back(r.skew_ppm);
        if (r.servo_phase == "locked") {
            ++report.locked_rows;
            locked_disc.push_back(static_cast<double>(r.disciplined_offset_ns));
        }
    }
    report.offset_stats = stats_over(offsets);
    report.window_skew_stats = stats_over(wskews);
    report.instant_skew_stats = stats_over(skews);
    report.locked_disciplined_stats = stats_over(locked_disc);

    struct GapAccum {
        std::uint64_t count{0};
        double sum_delta{0.0};
    };
    std::map<std::uint32_t, GapAccum> gaps;
    for (std::size_t i = 1; i < log.size(); ++i) {
        if (log[i].seq <= log[i - 1].seq)
            continue; // out-of-order rows carry no increment signature
        const std::uint32_t gap = log[i].seq - log[i - 1].seq;
        auto& acc = gaps[gap];
        ++acc.count;
        acc.sum_delta += static_cast<double>(log[i].offset_ns - log[i - 1].offset_ns);
    }
    for (const auto& [gap, acc] : gaps) {
        DropSignatureRow row;
        row.seq_gap = gap;
        row.count = acc.count;
        row.mean_delta_offset_ns = acc.sum_delta / static_cast<double>(acc.count);
        row.mean_delta_per_gap_ns = row.mean_delta_offset_ns / static_cast<double>(gap);
        report.drop_signature.push_back(row);
    }
    return report;
}

std::string AnalysisReport::to_string() const
{
    std::string s;
    s += "rows: " + std::to_string(rows) + "\n";
    auto section = [&s](const char* name, const std::optional<SummaryMetrics>& m) {
        s += name;
        s += ": ";
        s += m ? m->to_string() : "count=0";
        s += "\n";
    };
    section("offset_ns", offset_stats);
    section("window_skew_ppm", window_skew_stats);
    section("skew_ppm", instant_skew_stats);
    s += "drop signature (seq_gap, count, mean_delta_offset_ns, mean_per_gap_ns):\n";
    if (drop_signature.empty())
        s += "  (none)\n";
    for (const auto& row : drop_signature) {
        char buf[128];
        std::snprintf(buf, sizeof(buf), "  %u %" PRIu64 " %.1f %.1f\n", row.seq_gap, row.count,
                      row.mean_delta_offset_ns, row.mean_delta_per_gap_ns);
        s += buf;
    }
    s += "locked rows: " + std::to_string(locked_rows) + "\n";
    section("disciplined_offset_ns (locked)", locked_disciplined_stats);
    return s;
}

} // namespace rbis
