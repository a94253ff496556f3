#pragma once

#include <vector>

#include "uwbcoop/geometry.hpp"

namespace uwbcoop {

struct Cep {
    double radius = 0.0;    // meters
    double fraction = 0.68;
    Point2 center;
    int n_samples = 0;
    bool low_sample = false;  // fewer than 10 estimates
};

struct CdfSeries {
    std::vector<double> values;     // sorted, meters
    std::vector<double> fractions;  // k/n after the k-th value

    double quantile(double q) const;
};

/// Precision about the estimate cloud: center is the sample centroid, radius
/// the ceil(fraction*n)-th smallest distance from it (no interpolation).
/// An explicit center yields the truth-centered variant.
Cep cep(const std::vector<Point2>& estimates, double fraction = 0.68);
Cep cep_about(const std::vector<Point2>& estimates, const Point2& center,
              double fraction = 0.68);

/// Mean distance from the estimates to the true position.
double accuracy(const std::vector<Point2>& estimates, const Point2& truth);

CdfSeries cdf(std::vector<double> values);

struct ComparisonSummary {
    CdfSeries cdf_tdoa;
    CdfSeries cdf_coop;
    double median_tdoa = 0.0;
    double median_coop = 0.0;
    double max_tdoa = 0.0;
    double max_coop = 0.0;
    // Fraction of TDOA-only CEP values exceeding the cooperative maximum.
    double frac_tdoa_above_coop_max = 0.0;
};

ComparisonSummary compare_algorithms(const std::vector<double>& cep_tdoa,
                                     const std::vector<double>& cep_coop);

}  // namespace uwbcoop
