#pragma once

#include <Eigen/Dense>
#include <optional>

#include "uwbcoop/measurement.hpp"

namespace uwbcoop {

/// State vector [x y vx vy], meters and meters/second.
struct TagState {
    double x = 0.0;
    double y = 0.0;
    double vx = 0.0;
    double vy = 0.0;

    Eigen::Vector4d vec() const { return {x, y, vx, vy}; }
    static TagState from_vec(const Eigen::Vector4d& v) {
        return {v(0), v(1), v(2), v(3)};
    }
    Point2 position() const { return {x, y}; }
};

using Covariance = Eigen::Matrix4d;

struct FilterConfig {
    double dt = 0.2;          // seconds per positioning period
    double q_accel = 600.0;   // white-acceleration spectral density, m^2/s^3
    double init_pos_std = 2.0;  // meters
    double init_vel_std = 1.0;  // meters/second
};

/// Constant-velocity transition matrix.
Eigen::Matrix4d build_transition(double dt);

/// Discrete white-noise-acceleration process covariance, per-axis blocks
/// [[dt^4/4, dt^3/2], [dt^3/2, dt^2]] * q_accel.
Eigen::Matrix4d build_process_noise(double dt, double q_accel);

void predict(TagState& state, Covariance& P, const FilterConfig& cfg);

struct UpdateResult {
    bool ok = false;           // false: innovation covariance singular, update skipped
    TagState state;
    Covariance P = Covariance::Zero();
    Eigen::VectorXd innovation;
};

/// EKF measurement update with the hybrid TDOA+range model. Gain is computed
/// via an LDLT solve of the innovation covariance; the posterior covariance is
/// re-symmetrized. A numerically singular innovation covariance yields
/// ok=false and leaves the prior untouched.
UpdateResult update(const TagState& prior, const Covariance& P_prior,
                    const MeasurementBundle& z, const Eigen::MatrixXd& R,
                    const AnchorSet& anchors);

/// Coarse-grid initialization: position minimizing the TDOA residual
/// sum-of-squares over the room grid (lowest-index tie-break), zero velocity,
/// diagonal initial covariance. Requires >= 2 TDOA entries.
std::optional<std::pair<TagState, Covariance>> init_filter(
    const MeasurementBundle& first_bundle, const AnchorSet& anchors,
    const Rect& room, double grid_step, const FilterConfig& cfg);

}  // namespace uwbcoop
