#pragma once

#include <Eigen/Dense>
#include <random>
#include <vector>

#include "uwbcoop/geometry.hpp"

namespace uwbcoop {

struct TdoaEntry {
    int anchor_index = 0;   // never the reference anchor
    double value_m = 0.0;   // c * (TOA_i - TOA_ref)
};

struct RangeEntry {
    int peer_index = 0;
    double value_m = 0.0;
    Point2 peer_position;   // peer's latest a-posteriori estimate
};

/// One positioning period's measurement vector for a single tag: TDOA entries
/// first (anchor-index order), then tag-to-tag ranges (peer-index order).
struct MeasurementBundle {
    std::vector<TdoaEntry> tdoa;
    std::vector<RangeEntry> ranges;

    int size() const { return static_cast<int>(tdoa.size() + ranges.size()); }

    Eigen::VectorXd vector() const {
        Eigen::VectorXd z(size());
        int r = 0;
        for (const auto& e : tdoa) z(r++) = e.value_m;
        for (const auto& e : ranges) z(r++) = e.value_m;
        return z;
    }
};

struct MeasurementNoiseSpec {
    double sigma_toa = 1e-9;  // seconds
    double sigma_twr = 0.06;  // meters
    // TDOAs share the reference anchor's TOA noise; when set, R carries the
    // (c*sigma_toa)^2 off-diagonal term in the TDOA block.
    bool tdoa_correlated = true;
};

/// TOA_i = ||tag - a_i|| / c + N(0, sigma_toa^2), independent per anchor.
std::vector<double> synth_toas(const Point2& tag_truth, const AnchorSet& anchors,
                               double sigma_toa, std::mt19937_64& rng);

/// c * (TOA_i - TOA_ref) for every i != reference_index.
std::vector<TdoaEntry> form_tdoa(const std::vector<double>& toas, int reference_index);

/// ||tag - peer|| + N(0, sigma_twr^2) per peer.
std::vector<double> synth_ranges(const Point2& tag_truth,
                                 const std::vector<Point2>& peer_truths,
                                 double sigma_twr, std::mt19937_64& rng);

/// Predicted measurement vector at position (x, y): range differences for the
/// active anchors, then distances to the peer estimates. Ordering matches
/// MeasurementBundle. Throws std::domain_error on coincidence.
Eigen::VectorXd h_eval(const Eigen::Vector4d& state, const AnchorSet& anchors,
                       const std::vector<int>& active_anchor_idxs,
                       const std::vector<Point2>& peer_estimates);

/// Jacobian of h_eval wrt the state; velocity columns are zero.
Eigen::MatrixXd h_jacobian(const Eigen::Vector4d& state, const AnchorSet& anchors,
                           const std::vector<int>& active_anchor_idxs,
                           const std::vector<Point2>& peer_estimates);

/// Measurement covariance: TDOA block diag 2(c s)^2 with off-diagonal (c s)^2
/// when correlated, range block diag sigma_twr^2. Zero sigmas are floored at
/// 1e-12 to keep R invertible.
Eigen::MatrixXd build_noise_covariance(const MeasurementNoiseSpec& spec,
                                       int n_tdoa, int n_ranges);

}  // namespace uwbcoop
