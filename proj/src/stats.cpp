// SPDX-License-Identifier: Apache-2.0
#include "rbis/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <vector>

namespace rbis {

namespace {

double percentile_sorted(const std::vector<double>& sorted, double p)
{
    const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
    const auto lo = static_cast<std::size_t>(h);
    if (lo + 1 >= sorted.size())
        return sorted.back();
    const double frac = h - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

} // namespace

SummaryMetrics compute_stats(std::span<const double> samples)
{
    if (samples.size() < 2)
        throw std::invalid_argument("compute_stats: need at least 2 samples, got " +
                                    std::to_string(samples.size()));

    const auto n = static_cast<double>(samples.size());
    double sum = 0.0;
    for (double x : samples)
        sum += x;
    const double mean = sum / n;

    double ss = 0.0;
    for (double x : samples)
        ss += (x - mean) * (x - mean);
    const double sigma = std::sqrt(ss / (n - 1.0));

    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());

    SummaryMetrics m;
    m.count = samples.size();
    m.mean = mean;
    m.sample_sigma = sigma;
    m.sigma_bands = {sigma, 2.0 * sigma, 3.0 * sigma};
    m.min = sorted.front();
    m.max = sorted.back();
    m.p50 = percentile_sorted(sorted, 0.50);
    m.p95 = percentile_sorted(sorted, 0.95);
    m.p99 = percentile_sorted(sorted, 0.99);
    return m;
}

std::string SummaryMetrics::to_string() const
{
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "n=%llu mean=%.3f sigma=%.3f (2s=%.3f 3s=%.3f) min=%.3f max=%.3f "
                  "p50=%.3f p95=%.3f p99=%.3f",
                  static_cast<unsigned long long>(count), mean, sample_sigma,
                  sigma_bands[1], sigma_bands[2], min, max, p50, p95, p99);
    return buf;
}

} // namespace rbis
