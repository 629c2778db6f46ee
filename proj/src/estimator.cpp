// SPDX-License-Identifier: Apache-2.0
#include "rbis/estimator.hpp"

#include <cassert>
#include <cstdlib>
#include <limits>
#include <string>

namespace rbis {

std::int64_t compute_offset(const TimestampTuple& tuple)
{
    const std::int64_t diff = tuple.t_slave_ns - tuple.t_master_ns;
    // Subtraction is total in the signed 64-bit domain; sane timestamp pairs
    // stay far from the wrap boundary.
    assert(std::llabs(diff) < (std::int64_t{1} << 62));
    return diff;
}

double compute_skew_ppm(std::int64_t prev_offset_ns, std::int64_t curr_offset_ns,
                        TimePointNs prev_t_master_ns, TimePointNs curr_t_master_ns)
{
    if (curr_t_master_ns <= prev_t_master_ns)
        throw std::invalid_argument("compute_skew_ppm: non-monotone master time");
    const std::int64_t d_theta = curr_offset_ns - prev_offset_ns;
    const std::int64_t d_tm = curr_t_master_ns - prev_t_master_ns;
    return static_cast<double>(d_theta) * 1e6 / static_cast<double>(d_tm);
}

Estimator::Estimator(std::size_t window) : window_(window)
{
    if (window_ < 2)
        throw std::invalid_argument("Estimator: window must be >= 2");
}

void Estimator::reset()
{
    accepted_ = 0;
    discarded_ = 0;
    last_seq_ = 0;
    last_t_master_ = {};
    last_offset_ = 0;
    samples_.clear();
    increments_.clear();
}

double Estimator::window_slope_ppm() const
{
    // Least-squares slope of offset against master time over the window,
    // mean-centered. Sums stay well inside double's exact-integer range for
    // any realistic window.
    const auto n = static_cast<double>(samples_.size());
    double x_mean = 0.0;
    double y_mean = 0.0;
    for (const auto& [x, y] : samples_) {
        x_mean += static_cast<double>(x);
        y_mean += static_cast<double>(y);
    }
    x_mean /= n;
    y_mean /= n;

    double sxy = 0.0;
    double sxx = 0.0;
    for (const auto& [x, y] : samples_) {
        const double dx = static_cast<double>(x) - x_mean;
        sxy += dx * (static_cast<double>(y) - y_mean);
        sxx += dx * dx;
    }
    return sxy / sxx * 1e6;
}

std::optional<SyncEstimate> Estimator::update(const TimestampTuple& tuple)
{
    if (accepted_ > 0 && tuple.seq <= last_seq_) {
        ++discarded_;
        return std::nullopt;
    }
    if (accepted_ > 0 && tuple.t_master_ns <= last_t_master_)
        throw SessionFault("estimator: master time regressed at seq " +
                           std::to_string(tuple.seq));

    SyncEstimate est;
    est.seq = tuple.seq;
    est.offset_ns = compute_offset(tuple);

    if (accepted_ > 0) {
        const std::uint32_t gap = tuple.seq - last_seq_;
        const std::uint64_t clipped =
            std::min<std::uint64_t>(gap - 1, std::numeric_limits<std::uint16_t>::max());
        est.dropped_since_last = static_cast<std::uint16_t>(clipped);
        est.skew_ppm = compute_skew_ppm(last_offset_, est.offset_ns,
                                        last_t_master_, tuple.t_master_ns);
        est.valid_skew = true;
        increments_.push_back({tuple.seq, gap, est.offset_ns - last_offset_});
    }

    samples_.emplace_back(tuple.t_master_ns.ns, est.offset_ns);
    while (samples_.size() > window_)
        samples_.pop_front();
    est.window_skew_ppm = samples_.size() >= 2 ? window_slope_ppm() : 0.0;

    last_seq_ = tuple.seq;
    last_t_master_ = tuple.t_master_ns;
    last_offset_ = est.offset_ns;
    ++accepted_;
    return est;
}

} // namespace rbis
