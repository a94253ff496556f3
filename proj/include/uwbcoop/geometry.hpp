#pragma once

#include <cstdint>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace uwbcoop {

// Signal propagation speed used for all time<->range conversions.
inline constexpr double kSpeedOfLight = 299792458.0;  // m/s

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

inline bool operator==(const Point2& a, const Point2& b) {
    return a.x == b.x && a.y == b.y;
}

double distance(const Point2& a, const Point2& b);

/// ||p - anchor_i|| - ||p - anchor_ref||, in meters.
/// Throws std::domain_error if p coincides with either anchor.
double true_range_difference(const Point2& p, const Point2& anchor_i,
                             const Point2& anchor_ref);

struct Rect {
    double x_min = 0.0;
    double y_min = 0.0;
    double x_max = 0.0;
    double y_max = 0.0;

    bool contains(const Point2& p, double eps = 0.0) const {
        return p.x >= x_min - eps && p.x <= x_max + eps &&
               p.y >= y_min - eps && p.y <= y_max + eps;
    }
    double width() const { return x_max - x_min; }
    double height() const { return y_max - y_min; }
};

struct AnchorSet {
    std::vector<Point2> positions;
    int reference_index = 0;

    int size() const { return static_cast<int>(positions.size()); }
    const Point2& reference() const { return positions.at(reference_index); }
};

struct Scenario {
    Rect room;
    AnchorSet anchors;
    std::vector<Point2> tag_truths;
    double sigma_toa = 1e-9;   // seconds
    double sigma_twr = 0.06;   // meters
    int periods = 300;
    double grid_step = 0.5;    // meters
    std::uint64_t seed = 1;
    bool cooperative = true;
    std::vector<double> reply_delays;  // seconds, per tag (index 0 unused)
    std::vector<double> clock_ppm;     // fractional frequency error, per tag
    std::set<int> failed_tags;

    int n_tags() const { return static_cast<int>(tag_truths.size()); }
};

/// Candidate placement grid: points (x_min + i*step, y_min + j*step) inside
/// the room, boundary included.
std::vector<Point2> grid_points(const Rect& room, double step);

/// n_tags distinct grid points, uniform without replacement.
/// Throws std::runtime_error if the grid holds fewer than n_tags points.
std::vector<Point2> sample_tag_configuration(const Rect& room, double grid_step,
                                             int n_tags, std::mt19937_64& rng);

/// Returns the full list of invariant violations; empty means valid.
std::vector<std::string> validate_scenario(const Scenario& s);

}  // namespace uwbcoop
