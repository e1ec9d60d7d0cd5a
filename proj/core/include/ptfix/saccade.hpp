#pragma once

#include <array>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "ptfix/calibration.hpp"
#include "ptfix/geometry.hpp"
#include "ptfix/homography.hpp"
#include "ptfix/rig.hpp"

namespace ptfix {

/// Transferred image centers: for each calibration sample k, where the
/// center of image I_k lands in the reference image I_s. Entries whose
/// homography could not be estimated are flagged invalid and never
/// interpolated across.
struct CenterMapEntry {
    PixelPoint c;
    bool valid = false;
};

struct CenterMap {
    int s = -1; // sample index defining I_s
    std::vector<CenterMapEntry> entries; // indexed like CalibrationSet::samples
};

enum class PlanMode { InteriorBilinear, BoundaryExtrapolated };
enum class PlanCase { A, B };

struct SaccadePlan {
    PixelPoint target;          // t, in I_s pixels
    MotorState solved;
    std::array<int, 2> cell{-1, -1}; // (pan index, tilt index) of the cell origin
    double alpha = 0.0, beta = 0.0;  // bilinear coordinates within the cell
    PlanMode mode = PlanMode::InteriorBilinear;
    PlanCase plan_case = PlanCase::A;
};

struct PlannerOptions {
    bool nearest_neighbor_only = false; // ablation: snap to the closest c_k
    double newton_tol = 1e-10;
    int newton_max_iter = 50;
    int warn_below_corrs = 10;
};

/// Maps a desired fixation pixel to pan/tilt motor values using the
/// calibration set: homography center transfer plus inverse bilinear
/// interpolation over the motor grid. Center maps and homographies are
/// built lazily and memoized; not thread-safe.
class SaccadePlanner {
public:
    SaccadePlanner(const CalibrationSet& set, const CameraIntrinsics& intr,
                   PlannerOptions opts = {});

    /// Transferred centers of every calibration image in sample s's frame.
    const CenterMap& center_map(int s);

    /// Case A: the current view is calibration sample s.
    SaccadePlan solve_case_a(int s, const PixelPoint& t);

    /// Case B: the current motor state is off-grid. t is given in the
    /// current view; cur_obs provides the board corners seen there.
    SaccadePlan solve_case_b(const MotorState& current, const PixelPoint& t,
                             const Observation& cur_obs);

    bool within_hull(const MotorState& m) const;

    const CalibrationSet& set() const { return set_; }
    const CameraIntrinsics& intrinsics() const { return intr_; }
    int low_correspondence_count() const { return low_corr_count_; }

private:
    std::vector<Correspondence> shared_corners(const Observation& dst,
                                               const Observation& src) const;
    SaccadePlan solve_in_cell(const CenterMap& map, const PixelPoint& t, int pi, int ti,
                              PlanMode mode);

    const CalibrationSet& set_;
    CameraIntrinsics intr_;
    PlannerOptions opts_;
    std::unordered_map<int, CenterMap> maps_;
    int low_corr_count_ = 0;
};

struct Landing {
    PixelPoint pixel;
    double err_deg = 0.0;
    double err_h_deg = 0.0;
    double err_v_deg = 0.0;
};

struct ExecutionResult {
    std::vector<SaccadePlan> plans;    // primary followed by corrective passes
    std::vector<Landing> landings;     // one per executed motion
};

/// Commands the planned state, measures the landing point, and optionally
/// re-plans corrective saccades from the post-motion view (case B: the
/// quantized state is off the calibration grid).
ExecutionResult execute(Rig& rig, const TargetBoard& board, const Eigen::Vector3d& target_world,
                        SaccadePlanner& planner, const SaccadePlan& plan, int corrective,
                        double stop_threshold_deg, std::uint64_t seed);

} // namespace ptfix
