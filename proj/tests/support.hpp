#pragma once

// Shared helpers for the test suites: closed-form pixel/world constructions
// and an independent fixation-error probe used as the oracle side of
// planner checks.

#include <Eigen/Geometry>

#include "ptfix/config.hpp"
#include "ptfix/geometry.hpp"
#include "ptfix/rig.hpp"

namespace ptfix::test {

/// Actual motor state for a command approached from below on both axes
/// (the calibration sweep's approach direction).
inline MotorState actual_from_below(const RigModel& model, const MotorState& cmd) {
    double dp = 1.0, dt = 1.0;
    return apply_motor_model(model, cmd, cmd, dp, dt);
}

/// World point where the view ray of `pixel` (at the given actual state)
/// meets the board plane.
inline Eigen::Vector3d pixel_to_board_point(const RigModel& model, const MotorState& actual,
                                            const TargetBoard& board, const PixelPoint& pixel) {
    const Eigen::Isometry3d c2w = cam_to_world(model, actual);
    const Ray3 ray = back_project(model.intr, pixel);
    const Eigen::Vector3d d = c2w.linear() * Eigen::Vector3d(ray.dx, ray.dy, ray.dz);
    const Eigen::Vector3d n = board.pose().linear() * Eigen::Vector3d::UnitZ();
    const double s = n.dot(board.position - c2w.translation()) / n.dot(d);
    return c2w.translation() + s * d;
}

/// Angular fixation error reached by commanding `cmd` (approached from
/// below) and rendering the target. Infinity when the target is not
/// visible. Independent of the planner code path.
inline double fixation_error_probe(const RigModel& model, const TargetBoard& board,
                                   const Eigen::Vector3d& target, const MotorState& cmd) {
    RigModel quiet = model;
    quiet.corner_noise_sigma = 0.0;
    const Observation obs = render(quiet, actual_from_below(quiet, cmd), board, target, 0);
    if (!obs.target) return std::numeric_limits<double>::infinity();
    return angular_error(quiet.intr, *obs.target);
}

/// Rig with 1 degree quantization and everything else ideal.
inline RigModel quantization_only_rig() {
    RigModel m = RigModel::ideal();
    m.quantization_step = 1.0;
    return m;
}

inline Config ideal_config() {
    Config cfg;
    cfg.rig = RigModel::ideal();
    return cfg;
}

} // namespace ptfix::test
