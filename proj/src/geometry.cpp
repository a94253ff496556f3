#include "uwbcoop/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace uwbcoop {

double distance(const Point2& a, const Point2& b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

double true_range_difference(const Point2& p, const Point2& anchor_i,
                             const Point2& anchor_ref) {
    const double di = distance(p, anchor_i);
    const double dref = distance(p, anchor_ref);
    if (di == 0.0 || dref == 0.0) {
        throw std::domain_error("true_range_difference: point coincides with an anchor");
    }
    return di - dref;
}

std::vector<Point2> grid_points(const Rect& room, double step) {
    std::vector<Point2> pts;
    if (step <= 0.0) return pts;
    // Small slack so boundary points survive floating-point accumulation.
    const double eps = step * 1e-9;
    const int nx = static_cast<int>(std::floor(room.width() / step + 1e-9));
    const int ny = static_cast<int>(std::floor(room.height() / step + 1e-9));
    pts.reserve(static_cast<std::size_t>(nx + 1) * (ny + 1));
    for (int j = 0; j <= ny; ++j) {
        for (int i = 0; i <= nx; ++i) {
            Point2 p{room.x_min + i * step, room.y_min + j * step};
            if (room.contains(p, eps)) pts.push_back(p);
        }
    }
    return pts;
}

std::vector<Point2> sample_tag_configuration(const Rect& room, double grid_step,
                                             int n_tags, std::mt19937_64& rng) {
    std::vector<Point2> grid = grid_points(room, grid_step);
    if (static_cast<int>(grid.size()) < n_tags) {
        throw std::runtime_error("sample_tag_configuration: grid too small for requested tag count");
    }
    // Partial Fisher-Yates: first n_tags entries are a uniform sample
    // without replacement.
    for (int i = 0; i < n_tags; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, grid.size() - 1);
        std::swap(grid[i], grid[pick(rng)]);
    }
    grid.resize(n_tags);
    return grid;
}

std::vector<std::string> validate_scenario(const Scenario& s) {
    std::vector<std::string> errs;
    if (s.room.width() <= 0.0 || s.room.height() <= 0.0) {
        errs.push_back("room has non-positive extent");
    }
    if (s.anchors.size() < 3) {
        errs.push_back("insufficient anchors (need at least 3 for 2D TDOA)");
    }
    if (s.anchors.reference_index < 0 || s.anchors.reference_index >= s.anchors.size()) {
        errs.push_back("reference_index out of range");
    }
    for (int i = 0; i < s.anchors.size(); ++i) {
        const Point2& a = s.anchors.positions[i];
        if (!std::isfinite(a.x) || !std::isfinite(a.y)) {
            errs.push_back("anchor " + std::to_string(i) + " has non-finite coordinates");
        }
        for (int j = i + 1; j < s.anchors.size(); ++j) {
            if (a == s.anchors.positions[j]) {
                errs.push_back("anchors " + std::to_string(i) + " and " +
                               std::to_string(j) + " share a position");
            }
        }
    }
    for (int t = 0; t < s.n_tags(); ++t) {
        const Point2& p = s.tag_truths[t];
        if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
            errs.push_back("tag " + std::to_string(t) + " has non-finite coordinates");
        } else if (!s.room.contains(p)) {
            errs.push_back("tag " + std::to_string(t) + " out of bounds");
        }
    }
    if (s.sigma_toa < 0.0) errs.push_back("sigma_toa negative");
    if (s.sigma_twr < 0.0) errs.push_back("sigma_twr negative");
    if (s.periods < 1) errs.push_back("periods must be >= 1");
    if (s.grid_step <= 0.0) errs.push_back("grid_step must be positive");
    if (!s.reply_delays.empty() &&
        static_cast<int>(s.reply_delays.size()) != s.n_tags()) {
        errs.push_back("reply_delays length does not match tag count");
    }
    // Tag at index 0 initiates and never replies; its delay entry is unused.
    for (std::size_t k = 1; k < s.reply_delays.size(); ++k) {
        if (s.reply_delays[k] <= 0.0) {
            errs.push_back("reply delay for tag " + std::to_string(k) + " not positive");
        }
    }
    if (!s.clock_ppm.empty() &&
        static_cast<int>(s.clock_ppm.size()) != s.n_tags()) {
        errs.push_back("clock_ppm length does not match tag count");
    }
    for (int f : s.failed_tags) {
        if (f < 0 || f >= s.n_tags()) {
            errs.push_back("failed tag index " + std::to_string(f) + " out of range");
        }
    }
    return errs;
}

}  // namespace uwbcoop
