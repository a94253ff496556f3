#include "uwbcoop/ekf.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace uwbcoop {

Eigen::Matrix4d build_transition(double dt) {
    if (dt <= 0.0) throw std::invalid_argument("build_transition: dt must be positive");
    Eigen::Matrix4d A = Eigen::Matrix4d::Identity();
    A(0, 2) = dt;
    A(1, 3) = dt;
    return A;
}

Eigen::Matrix4d build_process_noise(double dt, double q_accel) {
    if (dt <= 0.0) throw std::invalid_argument("build_process_noise: dt must be positive");
    if (q_accel < 0.0) throw std::invalid_argument("build_process_noise: q_accel negative");
    const double d2 = dt * dt;
    const double q_pp = d2 * d2 / 4.0 * q_accel;
    const double q_pv = d2 * dt / 2.0 * q_accel;
    const double q_vv = d2 * q_accel;
    Eigen::Matrix4d Q = Eigen::Matrix4d::Zero();
    Q(0, 0) = q_pp; Q(0, 2) = q_pv;
    Q(2, 0) = q_pv; Q(2, 2) = q_vv;
    Q(1, 1) = q_pp; Q(1, 3) = q_pv;
    Q(3, 1) = q_pv; Q(3, 3) = q_vv;
    return Q;
}

void predict(TagState& state, Covariance& P, const FilterConfig& cfg) {
    const Eigen::Matrix4d A = build_transition(cfg.dt);
    const Eigen::Matrix4d Q = build_process_noise(cfg.dt, cfg.q_accel);
    const Eigen::Vector4d x = A * state.vec();
    P = A * P * A.transpose() + Q;
    P = ((P + P.transpose()) / 2.0).eval();
    state = TagState::from_vec(x);
}

UpdateResult update(const TagState& prior, const Covariance& P_prior,
                    const MeasurementBundle& z, const Eigen::MatrixXd& R,
                    const AnchorSet& anchors) {
    UpdateResult out;
    out.state = prior;
    out.P = P_prior;
    if (z.size() == 0) throw std::invalid_argument("update: empty measurement bundle");
    if (R.rows() != z.size() || R.cols() != z.size()) {
        throw std::invalid_argument("update: R dimension does not match bundle");
    }

    std::vector<int> active;
    active.reserve(z.tdoa.size());
    for (const auto& e : z.tdoa) active.push_back(e.anchor_index);
    std::vector<Point2> peers;
    peers.reserve(z.ranges.size());
    for (const auto& e : z.ranges) peers.push_back(e.peer_position);

    const Eigen::Vector4d x = prior.vec();
    const Eigen::VectorXd h = h_eval(x, anchors, active, peers);
    const Eigen::MatrixXd H = h_jacobian(x, anchors, active, peers);
    out.innovation = z.vector() - h;

    const Eigen::MatrixXd S = H * P_prior * H.transpose() + R;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(S);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
        return out;  // ok stays false, period dropped upstream
    }
    // K = P H^T S^-1, via K^T = S^-1 (H P)
    const Eigen::MatrixXd K = ldlt.solve(H * P_prior).transpose();
    const Eigen::Vector4d x_post = x + K * out.innovation;
    Covariance P_post = (Covariance::Identity() - K * H) * P_prior;
    P_post = ((P_post + P_post.transpose()) / 2.0).eval();

    if (!x_post.allFinite() || !P_post.allFinite()) return out;
    out.ok = true;
    out.state = TagState::from_vec(x_post);
    out.P = P_post;
    return out;
}

std::optional<std::pair<TagState, Covariance>> init_filter(
    const MeasurementBundle& first_bundle, const AnchorSet& anchors,
    const Rect& room, double grid_step, const FilterConfig& cfg) {
    if (first_bundle.tdoa.size() < 2) return std::nullopt;

    const Point2& ref = anchors.reference();
    double best = std::numeric_limits<double>::infinity();
    Point2 best_p{};
    bool found = false;
    for (const Point2& g : grid_points(room, grid_step)) {
        double ssq = 0.0;
        bool degenerate = false;
        for (const auto& e : first_bundle.tdoa) {
            const Point2& a = anchors.positions.at(e.anchor_index);
            if (distance(g, a) == 0.0 || distance(g, ref) == 0.0) {
                degenerate = true;
                break;
            }
            const double r = true_range_difference(g, a, ref) - e.value_m;
            ssq += r * r;
        }
        if (degenerate) continue;
        if (ssq < best) {  // strict: earliest grid index wins ties
            best = ssq;
            best_p = g;
            found = true;
        }
    }
    if (!found) return std::nullopt;

    TagState s{best_p.x, best_p.y, 0.0, 0.0};
    Covariance P = Covariance::Zero();
    P(0, 0) = P(1, 1) = cfg.init_pos_std * cfg.init_pos_std;
    P(2, 2) = P(3, 3) = cfg.init_vel_std * cfg.init_vel_std;
    return std::make_pair(s, P);
}

}  // namespace uwbcoop
