#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ebdevs/errors.hpp"
#include "ebdevs/time.hpp"

namespace ebdevs {

// One recorded observable: (time, value) points with strictly increasing
// times.
struct TimeSeries {
    std::string label;
    std::vector<std::pair<double, double>> points;

    void append(double t, double v) {
        if (!points.empty() && t <= points.back().first)
            throw StatError("time series '" + label + "' times must be strictly increasing");
        points.emplace_back(t, v);
    }
};

namespace stats {

// Population Gini index in the mean-absolute-difference form
//   G = sum_ij |x_i - x_j| / (2 n^2 mean),
// computed in O(n log n) via sorted prefix sums. Input must be nonempty,
// non-negative and not all zeros.
double gini(std::span<const double> values);

// Quadratic reference form of the same statistic, kept for cross-checks.
double gini_pairwise(std::span<const double> values);

struct DegreeHistogram {
    std::map<int, std::size_t> counts;
    // (degree, fraction of nodes with degree >= k), over distinct degrees
    // ascending; non-increasing, starts at 1.
    std::vector<std::pair<int, double>> ccdf;
};

DegreeHistogram degree_histogram(std::span<const int> degrees);

struct LogLogFit {
    double slope = 0.0;
    double r_squared = 0.0;
};

// Ordinary least squares on (ln degree, ln fraction) over points inside
// [fit_lo, fit_hi] with positive fraction; needs at least 5 of them.
LogLogFit loglog_slope(std::span<const std::pair<int, double>> ccdf, int fit_lo, int fit_hi);

// Number of distinct trait vectors under exact equality. All vectors must
// share one length.
std::size_t distinct_cultures(std::span<const std::vector<int>> cultures);

double mean(std::span<const double> values);
double sample_std(std::span<const double> values);

}  // namespace stats
}  // namespace ebdevs
