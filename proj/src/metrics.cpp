#include "uwbcoop/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace uwbcoop {

double CdfSeries::quantile(double q) const {
    if (values.empty()) throw std::invalid_argument("quantile: empty series");
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (fractions[i] >= q) return values[i];
    }
    return values.back();
}

Cep cep_about(const std::vector<Point2>& estimates, const Point2& center,
              double fraction) {
    if (estimates.empty()) throw std::invalid_argument("cep: empty estimate list");
    if (fraction <= 0.0 || fraction >= 1.0) {
        throw std::invalid_argument("cep: fraction must lie in (0,1)");
    }
    const int n = static_cast<int>(estimates.size());
    std::vector<double> dists;
    dists.reserve(n);
    for (const auto& e : estimates) dists.push_back(distance(e, center));
    std::sort(dists.begin(), dists.end());
    const int k = static_cast<int>(std::ceil(fraction * n));  // 1-based order statistic
    Cep out;
    out.radius = dists[std::max(0, k - 1)];
    out.fraction = fraction;
    out.center = center;
    out.n_samples = n;
    out.low_sample = n < 10;
    return out;
}

Cep cep(const std::vector<Point2>& estimates, double fraction) {
    if (estimates.empty()) throw std::invalid_argument("cep: empty estimate list");
    Point2 centroid{0.0, 0.0};
    for (const auto& e : estimates) {
        centroid.x += e.x;
        centroid.y += e.y;
    }
    centroid.x /= estimates.size();
    centroid.y /= estimates.size();
    return cep_about(estimates, centroid, fraction);
}

double accuracy(const std::vector<Point2>& estimates, const Point2& truth) {
    if (estimates.empty()) throw std::invalid_argument("accuracy: empty estimate list");
    double sum = 0.0;
    for (const auto& e : estimates) sum += distance(e, truth);
    return sum / estimates.size();
}

CdfSeries cdf(std::vector<double> values) {
    if (values.empty()) throw std::invalid_argument("cdf: empty value list");
    std::sort(values.begin(), values.end());
    CdfSeries out;
    out.values = std::move(values);
    out.fractions.reserve(out.values.size());
    const double n = static_cast<double>(out.values.size());
    for (std::size_t k = 1; k <= out.values.size(); ++k) {
        out.fractions.push_back(static_cast<double>(k) / n);
    }
    return out;
}

ComparisonSummary compare_algorithms(const std::vector<double>& cep_tdoa,
                                     const std::vector<double>& cep_coop) {
    if (cep_tdoa.size() != cep_coop.size()) {
        throw std::invalid_argument("compare_algorithms: paired lists differ in length");
    }
    if (cep_tdoa.empty()) throw std::invalid_argument("compare_algorithms: empty input");
    ComparisonSummary s;
    s.cdf_tdoa = cdf(cep_tdoa);
    s.cdf_coop = cdf(cep_coop);
    s.median_tdoa = s.cdf_tdoa.quantile(0.5);
    s.median_coop = s.cdf_coop.quantile(0.5);
    s.max_tdoa = s.cdf_tdoa.values.back();
    s.max_coop = s.cdf_coop.values.back();
    int above = 0;
    for (double v : cep_tdoa) {
        if (v > s.max_coop) ++above;
    }
    s.frac_tdoa_above_coop_max = static_cast<double>(above) / cep_tdoa.size();
    return s;
}

}  // namespace uwbcoop
