#include "uwbcoop/measurement.hpp"

#include <cmath>
#include <stdexcept>

namespace uwbcoop {

std::vector<double> synth_toas(const Point2& tag_truth, const AnchorSet& anchors,
                               double sigma_toa, std::mt19937_64& rng) {
    std::normal_distribution<double> noise(0.0, sigma_toa);
    std::vector<double> toas;
    toas.reserve(anchors.positions.size());
    for (const auto& a : anchors.positions) {
        double t = distance(tag_truth, a) / kSpeedOfLight;
        if (sigma_toa > 0.0) t += noise(rng);
        toas.push_back(t);
    }
    return toas;
}

std::vector<TdoaEntry> form_tdoa(const std::vector<double>& toas, int reference_index) {
    if (toas.size() < 2) {
        throw std::invalid_argument("form_tdoa: need at least 2 TOAs");
    }
    const double ref = toas.at(reference_index);
    std::vector<TdoaEntry> out;
    out.reserve(toas.size() - 1);
    for (int i = 0; i < static_cast<int>(toas.size()); ++i) {
        if (i == reference_index) continue;
        out.push_back({i, kSpeedOfLight * (toas[i] - ref)});
    }
    return out;
}

std::vector<double> synth_ranges(const Point2& tag_truth,
                                 const std::vector<Point2>& peer_truths,
                                 double sigma_twr, std::mt19937_64& rng) {
    std::normal_distribution<double> noise(0.0, sigma_twr);
    std::vector<double> out;
    out.reserve(peer_truths.size());
    for (const auto& p : peer_truths) {
        double r = distance(tag_truth, p);
        if (sigma_twr > 0.0) r += noise(rng);
        out.push_back(r);
    }
    return out;
}

Eigen::VectorXd h_eval(const Eigen::Vector4d& state, const AnchorSet& anchors,
                       const std::vector<int>& active_anchor_idxs,
                       const std::vector<Point2>& peer_estimates) {
    const Point2 p{state(0), state(1)};
    const Point2& ref = anchors.reference();
    Eigen::VectorXd h(active_anchor_idxs.size() + peer_estimates.size());
    int r = 0;
    for (int idx : active_anchor_idxs) {
        h(r++) = true_range_difference(p, anchors.positions.at(idx), ref);
    }
    for (const auto& peer : peer_estimates) {
        const double d = distance(p, peer);
        if (d == 0.0) throw std::domain_error("h_eval: state coincides with a peer");
        h(r++) = d;
    }
    return h;
}

Eigen::MatrixXd h_jacobian(const Eigen::Vector4d& state, const AnchorSet& anchors,
                           const std::vector<int>& active_anchor_idxs,
                           const std::vector<Point2>& peer_estimates) {
    const Point2 p{state(0), state(1)};
    const Point2& ref = anchors.reference();
    const double dref = distance(p, ref);
    if (dref == 0.0) throw std::domain_error("h_jacobian: state coincides with reference anchor");

    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(
        static_cast<int>(active_anchor_idxs.size() + peer_estimates.size()), 4);
    int r = 0;
    for (int idx : active_anchor_idxs) {
        const Point2& a = anchors.positions.at(idx);
        const double di = distance(p, a);
        if (di == 0.0) throw std::domain_error("h_jacobian: state coincides with an anchor");
        H(r, 0) = (p.x - a.x) / di - (p.x - ref.x) / dref;
        H(r, 1) = (p.y - a.y) / di - (p.y - ref.y) / dref;
        ++r;
    }
    for (const auto& peer : peer_estimates) {
        const double d = distance(p, peer);
        if (d == 0.0) throw std::domain_error("h_jacobian: state coincides with a peer");
        H(r, 0) = (p.x - peer.x) / d;
        H(r, 1) = (p.y - peer.y) / d;
        ++r;
    }
    return H;
}

Eigen::MatrixXd build_noise_covariance(const MeasurementNoiseSpec& spec,
                                       int n_tdoa, int n_ranges) {
    if (n_tdoa < 0 || n_ranges < 0) {
        throw std::invalid_argument("build_noise_covariance: negative counts");
    }
    constexpr double kFloor = 1e-12;
    const double cs = kSpeedOfLight * spec.sigma_toa;
    const double tdoa_var = std::max(2.0 * cs * cs, kFloor);
    const double tdoa_cov = spec.tdoa_correlated ? cs * cs : 0.0;
    const double range_var = std::max(spec.sigma_twr * spec.sigma_twr, kFloor);

    const int n = n_tdoa + n_ranges;
    Eigen::MatrixXd R = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n_tdoa; ++i) {
        for (int j = 0; j < n_tdoa; ++j) R(i, j) = (i == j) ? tdoa_var : tdoa_cov;
    }
    for (int i = 0; i < n_ranges; ++i) {
        R(n_tdoa + i, n_tdoa + i) = range_var;
    }
    return R;
}

}  // namespace uwbcoop
