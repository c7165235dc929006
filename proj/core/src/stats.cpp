#include "ebdevs/stats.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace ebdevs::stats {

double gini(std::span<const double> values) {
    if (values.empty()) throw StatError("gini of an empty sequence is undefined");
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    if (sorted.front() < 0.0) throw StatError("gini requires non-negative values");

    const double n = static_cast<double>(sorted.size());
    double total = 0.0;
    double weighted = 0.0;  // sum of (2i + 1 - n) * x_(i)
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        total += sorted[i];
        weighted += (2.0 * static_cast<double>(i) + 1.0 - n) * sorted[i];
    }
    if (total <= 0.0) throw StatError("gini of an all-zero sequence is undefined");
    return weighted / (n * total);
}

double gini_pairwise(std::span<const double> values) {
    if (values.empty()) throw StatError("gini of an empty sequence is undefined");
    const double n = static_cast<double>(values.size());
    double total = 0.0;
    for (double v : values) {
        if (v < 0.0) throw StatError("gini requires non-negative values");
        total += v;
    }
    if (total <= 0.0) throw StatError("gini of an all-zero sequence is undefined");
    const double mean = total / n;
    double acc = 0.0;
    for (double a : values)
        for (double b : values) acc += std::abs(a - b);
    return acc / (2.0 * n * n * mean);
}

DegreeHistogram degree_histogram(std::span<const int> degrees) {
    DegreeHistogram h;
    for (int d : degrees) {
        if (d < 0) throw StatError("degrees must be non-negative");
        h.counts[d] += 1;
    }
    const double n = static_cast<double>(degrees.size());
    std::size_t at_least = degrees.size();
    for (const auto& [degree, count] : h.counts) {
        h.ccdf.emplace_back(degree, static_cast<double>(at_least) / n);
        at_least -= count;
    }
    return h;
}

LogLogFit loglog_slope(std::span<const std::pair<int, double>> ccdf, int fit_lo, int fit_hi) {
    std::vector<std::pair<double, double>> pts;
    for (const auto& [degree, fraction] : ccdf) {
        if (degree < fit_lo || degree > fit_hi || fraction <= 0.0 || degree <= 0) continue;
        pts.emplace_back(std::log(static_cast<double>(degree)), std::log(fraction));
    }
    if (pts.size() < 5) throw StatError("log-log fit needs at least 5 positive points in range");

    const double n = static_cast<double>(pts.size());
    double sx = 0, sy = 0;
    for (const auto& [x, y] : pts) {
        sx += x;
        sy += y;
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0, syy = 0;
    for (const auto& [x, y] : pts) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    if (sxx == 0.0) throw StatError("log-log fit is degenerate: a single degree value");

    LogLogFit fit;
    fit.slope = sxy / sxx;
    if (syy == 0.0) {
        fit.r_squared = 1.0;  // exactly constant: the flat line fits perfectly
    } else {
        const double ss_res = syy - sxy * sxy / sxx;
        fit.r_squared = 1.0 - ss_res / syy;
    }
    return fit;
}

std::size_t distinct_cultures(std::span<const std::vector<int>> cultures) {
    std::set<std::vector<int>> seen;
    std::size_t length = cultures.empty() ? 0 : cultures.front().size();
    for (const auto& c : cultures) {
        if (c.size() != length) throw StatError("culture vectors must share one length");
        seen.insert(c);
    }
    return seen.size();
}

double mean(std::span<const double> values) {
    if (values.empty()) throw StatError("mean of an empty sequence");
    double s = 0.0;
    for (double v : values) s += v;
    return s / static_cast<double>(values.size());
}

double sample_std(std::span<const double> values) {
    if (values.size() < 2) return 0.0;
    const double m = mean(values);
    double acc = 0.0;
    for (double v : values) acc += (v - m) * (v - m);
    return std::sqrt(acc / static_cast<double>(values.size() - 1));
}

}  // namespace ebdevs::stats
