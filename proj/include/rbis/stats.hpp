// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>

namespace rbis {

/// Sample statistics in the Table-2 style: mean with 1/2/3-sigma bands plus
/// order statistics. sample_sigma uses the n-1 denominator.
struct SummaryMetrics {
    std::uint64_t count{0};
    double mean{0.0};
    double sample_sigma{0.0};
    std::array<double, 3> sigma_bands{0.0, 0.0, 0.0}; ///< {sigma, 2*sigma, 3*sigma}
    double min{0.0};
    double max{0.0};
    double p50{0.0};
    double p95{0.0};
    double p99{0.0};

    std::string to_string() const;
};

/// Mean, sample standard deviation and percentiles (linear interpolation
/// between closest ranks). Requires at least two samples.
SummaryMetrics compute_stats(std::span<const double> samples);

} // namespace rbis
