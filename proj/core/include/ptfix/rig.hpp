#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "ptfix/geometry.hpp"

namespace ptfix {

/// Commanded pan/tilt pair in degrees. Positive pan turns the camera right,
/// positive tilt turns it up.
struct MotorState {
    double pan = 0.0;
    double tilt = 0.0;
};

/// Composition order of the two joints, camera outward. tilt_then_pan puts
/// the pan motor at the kinematic base.
enum class JointOrder { TiltThenPan, PanThenTilt };

struct AxisModel {
    Eigen::Vector3d dir = Eigen::Vector3d::UnitY(); // unit rotation axis
    Eigen::Vector3d offset = Eigen::Vector3d::Zero(); // point on the axis, meters
};

/// Simulated pan/tilt camera with configurable kinematic imperfections.
/// With everything zeroed the camera is a pure rotation about its optical
/// center; the defaults below model a plausibly sloppy desk-scale unit.
struct RigModel {
    CameraIntrinsics intr;
    AxisModel pan_axis;  // nominally +y (vertical; image y points down)
    AxisModel tilt_axis; // nominally +x
    JointOrder joint_order = JointOrder::TiltThenPan;
    double quantization_step = 0.0; // degrees; 0 disables
    double backlash = 0.0;          // degrees, full width
    double gain_pan = 1.0;
    double gain_tilt = 1.0;
    double corner_noise_sigma = 0.0; // pixels
    bool target_noise = false;       // add corner noise to the target marker too
    double pan_min = -46.0, pan_max = 46.0;   // degrees
    double tilt_min = -40.0, tilt_max = 40.0; // degrees

    static CameraIntrinsics default_intrinsics();
    static RigModel ideal();
    static RigModel default_imperfect();
};

/// Planar calibration board: rows x cols uniquely identified corners with
/// row-major ids, `square` meters apart, centered on the board origin.
struct TargetBoard {
    int rows = 9;
    int cols = 14;
    double square = 0.030;                          // meters
    Eigen::Vector3d position{0.0, 0.0, 1.0};        // board center, world frame
    Eigen::Vector3d rpy_deg{0.0, 0.0, 0.0};         // board orientation

    Eigen::Isometry3d pose() const; // board -> world
    std::vector<Eigen::Vector3d> corners_world() const;
    int corner_count() const { return rows * cols; }
};

/// Result of one simulated capture + corner detection.
struct Observation {
    std::vector<std::pair<int, PixelPoint>> corners; // in-bounds corners only
    std::optional<PixelPoint> target;                // fixation marker, if visible
    std::array<double, 3> imu{0.0, 0.0, 0.0};        // exact Euler orientation, degrees
};

/// Camera-to-world pose at a given actual motor state.
Eigen::Isometry3d cam_to_world(const RigModel& model, const MotorState& actual);

/// Applies gain, quantization and backlash to a commanded state.
/// travel_dir_{pan,tilt} is +1 when the axis was last moving upward, -1 when
/// downward; it is updated in place.
MotorState apply_motor_model(const RigModel& model, const MotorState& cmd,
                             const MotorState& prev_cmd,
                             double& travel_dir_pan, double& travel_dir_tilt);

/// Projects board corners (and an optional target point) at an actual motor
/// state. Corner pixels get i.i.d. Gaussian noise of sigma
/// model.corner_noise_sigma; the target is rendered noiselessly unless
/// model.target_noise is set. Deterministic given the seed.
Observation render(const RigModel& model, const MotorState& actual, const TargetBoard& board,
                   const std::optional<Eigen::Vector3d>& target_world, std::uint64_t seed);

/// One rig instance. Owns the backlash history, so concurrent trials must
/// each use their own instance.
class Rig {
public:
    explicit Rig(RigModel model) : model_(std::move(model)) {}

    /// Commands the motors; returns the actual state reached.
    MotorState set_motors(const MotorState& cmd);

    MotorState commanded() const { return cmd_; }
    MotorState actual() const { return actual_; }
    const RigModel& model() const { return model_; }

    Observation observe(const TargetBoard& board,
                        const std::optional<Eigen::Vector3d>& target_world,
                        std::uint64_t seed) const {
        return render(model_, actual_, board, target_world, seed);
    }

private:
    RigModel model_;
    MotorState cmd_{0.0, 0.0};
    MotorState actual_{0.0, 0.0};
    double dir_pan_ = 1.0;
    double dir_tilt_ = 1.0;
    bool initialized_ = false;
};

/// Brute-force fixation oracle: exhaustive grid search at `resolution`
/// followed by per-axis golden-section refinement, minimizing the angular
/// error of the rendered target. Noise is disabled during the search.
MotorState oracle_fixate(const RigModel& model, const TargetBoard& board,
                         const Eigen::Vector3d& target_world, double resolution);

} // namespace ptfix
