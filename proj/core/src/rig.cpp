#include "ptfix/rig.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "ptfix/errors.hpp"

namespace ptfix {

CameraIntrinsics RigModel::default_intrinsics() {
    // 1024x768 with a ~40x30 degree field of view.
    CameraIntrinsics intr;
    intr.width = 1024;
    intr.height = 768;
    intr.cx = 512.0;
    intr.cy = 384.0;
    intr.fx = intr.fy = 512.0 / std::tan(deg2rad(20.0));
    return intr;
}

RigModel RigModel::ideal() {
    RigModel m;
    m.intr = default_intrinsics();
    m.pan_axis.dir = Eigen::Vector3d::UnitY();
    m.tilt_axis.dir = Eigen::Vector3d::UnitX();
    return m;
}

RigModel RigModel::default_imperfect() {
    RigModel m = ideal();
    m.pan_axis.offset = Eigen::Vector3d(0.0, 0.0, -0.020);
    m.tilt_axis.offset = Eigen::Vector3d(0.0, 0.0, -0.015);
    // 0.5 degree axis misalignment on both joints
    m.pan_axis.dir = Eigen::AngleAxisd(deg2rad(0.5), Eigen::Vector3d::UnitZ()) * Eigen::Vector3d::UnitY();
    m.tilt_axis.dir = Eigen::AngleAxisd(deg2rad(0.5), Eigen::Vector3d::UnitY()) * Eigen::Vector3d::UnitX();
    m.quantization_step = 1.0;
    m.backlash = 0.2;
    m.gain_pan = 1.02;
    m.gain_tilt = 0.98;
    m.corner_noise_sigma = 0.3;
    return m;
}

Eigen::Isometry3d TargetBoard::pose() const {
    Eigen::Isometry3d t = Eigen::Isometry3d::Identity();
    t.linear() = (Eigen::AngleAxisd(deg2rad(rpy_deg.z()), Eigen::Vector3d::UnitZ()) *
                  Eigen::AngleAxisd(deg2rad(rpy_deg.y()), Eigen::Vector3d::UnitY()) *
                  Eigen::AngleAxisd(deg2rad(rpy_deg.x()), Eigen::Vector3d::UnitX()))
                     .toRotationMatrix();
    t.translation() = position;
    return t;
}

std::vector<Eigen::Vector3d> TargetBoard::corners_world() const {
    const Eigen::Isometry3d t = pose();
    std::vector<Eigen::Vector3d> out;
    out.reserve(static_cast<size_t>(rows) * cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            const double x = (c - (cols - 1) / 2.0) * square;
            const double y = (r - (rows - 1) / 2.0) * square;
            out.push_back(t * Eigen::Vector3d(x, y, 0.0));
        }
    return out;
}

namespace {

Eigen::Isometry3d rotation_about(const AxisModel& axis, double angle_deg) {
    Eigen::Isometry3d t = Eigen::Isometry3d::Identity();
    t.translate(axis.offset);
    t.rotate(Eigen::AngleAxisd(deg2rad(angle_deg), axis.dir));
    t.translate(-axis.offset);
    return t;
}

double quantize(double value, double step) {
    return step > 0.0 ? std::round(value / step) * step : value;
}

// R = Ry(a) Rx(b) Rz(c), matching the pan/tilt/roll joint layering.
std::array<double, 3> euler_yxz_deg(const Eigen::Matrix3d& r) {
    const double b = std::asin(std::clamp(-r(1, 2), -1.0, 1.0));
    const double a = std::atan2(r(0, 2), r(2, 2));
    const double c = std::atan2(r(1, 0), r(1, 1));
    return {rad2deg(b), rad2deg(a), rad2deg(c)}; // (s_x, s_y, s_z)
}

} // namespace

Eigen::Isometry3d cam_to_world(const RigModel& model, const MotorState& actual) {
    const Eigen::Isometry3d pan = rotation_about(model.pan_axis, actual.pan);
    const Eigen::Isometry3d tilt = rotation_about(model.tilt_axis, actual.tilt);
    return model.joint_order == JointOrder::TiltThenPan ? pan * tilt : tilt * pan;
}

MotorState apply_motor_model(const RigModel& model, const MotorState& cmd,
                             const MotorState& prev_cmd,
                             double& travel_dir_pan, double& travel_dir_tilt) {
    if (cmd.pan < model.pan_min || cmd.pan > model.pan_max ||
        cmd.tilt < model.tilt_min || cmd.tilt > model.tilt_max)
        throw OutOfRange("set_motors: command outside motion range");

    if (cmd.pan > prev_cmd.pan) travel_dir_pan = 1.0;
    else if (cmd.pan < prev_cmd.pan) travel_dir_pan = -1.0;
    if (cmd.tilt > prev_cmd.tilt) travel_dir_tilt = 1.0;
    else if (cmd.tilt < prev_cmd.tilt) travel_dir_tilt = -1.0;

    MotorState actual;
    actual.pan = quantize(cmd.pan * model.gain_pan, model.quantization_step) +
                 travel_dir_pan * model.backlash / 2.0;
    actual.tilt = quantize(cmd.tilt * model.gain_tilt, model.quantization_step) +
                  travel_dir_tilt * model.backlash / 2.0;
    return actual;
}

MotorState Rig::set_motors(const MotorState& cmd) {
    const MotorState prev = initialized_ ? cmd_ : cmd;
    actual_ = apply_motor_model(model_, cmd, prev, dir_pan_, dir_tilt_);
    cmd_ = cmd;
    initialized_ = true;
    return actual_;
}

Observation render(const RigModel& model, const MotorState& actual, const TargetBoard& board,
                   const std::optional<Eigen::Vector3d>& target_world, std::uint64_t seed) {
    const Eigen::Isometry3d w2c = cam_to_world(model, actual).inverse();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    const double sigma = model.corner_noise_sigma;

    Observation obs;
    const auto corners = board.corners_world();
    for (int id = 0; id < static_cast<int>(corners.size()); ++id) {
        const Eigen::Vector3d pc = w2c * corners[id];
        if (pc.z() <= 1e-6) continue;
        PixelPoint p{model.intr.cx + model.intr.fx * pc.x() / pc.z(),
                     model.intr.cy + model.intr.fy * pc.y() / pc.z()};
        // noise drawn for every in-front corner so visibility does not
        // perturb the stream of later draws
        const double nu = noise(rng), nv = noise(rng);
        p.u += sigma * nu;
        p.v += sigma * nv;
        if (model.intr.in_bounds(p)) obs.corners.emplace_back(id, p);
    }

    if (target_world) {
        const Eigen::Vector3d pc = w2c * *target_world;
        if (pc.z() > 1e-6) {
            PixelPoint p{model.intr.cx + model.intr.fx * pc.x() / pc.z(),
                         model.intr.cy + model.intr.fy * pc.y() / pc.z()};
            if (model.target_noise) {
                p.u += sigma * noise(rng);
                p.v += sigma * noise(rng);
            }
            if (model.intr.in_bounds(p)) obs.target = p;
        }
    }

    obs.imu = euler_yxz_deg(w2c.inverse().linear());
    return obs;
}

namespace {

// Fixation error for a command approached from below on both axes, the same
// approach direction the calibration sweep uses.
double fixation_error(const RigModel& model, const Eigen::Vector3d& target,
                      const MotorState& cmd) {
    double dp = 1.0, dt = 1.0;
    const MotorState actual = apply_motor_model(model, cmd, cmd, dp, dt);
    const Eigen::Isometry3d w2c = cam_to_world(model, actual).inverse();
    const Eigen::Vector3d pc = w2c * target;
    if (pc.z() <= 1e-6) return std::numeric_limits<double>::infinity();
    const PixelPoint p{model.intr.cx + model.intr.fx * pc.x() / pc.z(),
                       model.intr.cy + model.intr.fy * pc.y() / pc.z()};
    if (!model.intr.in_bounds(p)) return std::numeric_limits<double>::infinity();
    return angular_error(model.intr, p);
}

} // namespace

MotorState oracle_fixate(const RigModel& model, const TargetBoard& board,
                         const Eigen::Vector3d& target_world, double resolution) {
    (void)board;
    RigModel quiet = model;
    quiet.corner_noise_sigma = 0.0;
    quiet.target_noise = false;

    MotorState best;
    double best_err = std::numeric_limits<double>::infinity();
    for (double pan = quiet.pan_min; pan <= quiet.pan_max + 1e-9; pan += resolution)
        for (double tilt = quiet.tilt_min; tilt <= quiet.tilt_max + 1e-9; tilt += resolution) {
            const double e = fixation_error(quiet, target_world, {pan, tilt});
            if (e < best_err) {
                best_err = e;
                best = {pan, tilt};
            }
        }
    if (!std::isfinite(best_err))
        throw TargetUnreachable("oracle_fixate: no reachable state renders the target");

    // Golden-section refinement, alternating axes. On quantized rigs the
    // error surface has plateaus, so the best point seen anywhere is kept.
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    for (int round = 0; round < 3; ++round) {
        for (int axis = 0; axis < 2; ++axis) {
            const double center = axis == 0 ? best.pan : best.tilt;
            double lo = center - 2.0 * resolution;
            double hi = center + 2.0 * resolution;
            lo = std::max(lo, axis == 0 ? quiet.pan_min : quiet.tilt_min);
            hi = std::min(hi, axis == 0 ? quiet.pan_max : quiet.tilt_max);
            auto eval = [&](double x) {
                MotorState s = best;
                (axis == 0 ? s.pan : s.tilt) = x;
                const double e = fixation_error(quiet, target_world, s);
                if (e < best_err) {
                    best_err = e;
                    best = s;
                }
                return e;
            };
            double a = hi - gr * (hi - lo);
            double b = lo + gr * (hi - lo);
            double fa = eval(a), fb = eval(b);
            for (int it = 0; it < 50 && hi - lo > 1e-6; ++it) {
                if (fa < fb) {
                    hi = b; b = a; fb = fa;
                    a = hi - gr * (hi - lo);
                    fa = eval(a);
                } else {
                    lo = a; a = b; fa = fb;
                    b = lo + gr * (hi - lo);
                    fb = eval(b);
                }
            }
        }
    }
    return best;
}

} // namespace ptfix
