#pragma once

#include <string>
#include <vector>

#include "ptfix/config.hpp"
#include "ptfix/rig.hpp"

namespace ptfix {

/// One grid point of the calibration sweep: the commanded motor values and
/// the observation captured there. Commanded values are recorded, not
/// actuals; the method never sees the true orientation.
struct CalibrationSample {
    MotorState motor;
    Observation obs;
    int pan_index = -1;
    int tilt_index = -1;
};

class CalibrationSet {
public:
    std::vector<CalibrationSample> samples;
    std::vector<double> pan_values;  // sorted, uniform spacing
    std::vector<double> tilt_values; // sorted, uniform spacing
    double step = 0.0;
    std::string digest; // checksum of the rig/board config used

    int npan() const { return static_cast<int>(pan_values.size()); }
    int ntilt() const { return static_cast<int>(tilt_values.size()); }

    /// Sample position for grid indices, or -1 if that grid point was
    /// dropped during collection.
    int lookup(int pan_index, int tilt_index) const;

    /// Grid-point sample whose commanded motor values match `m` exactly
    /// (within 1e-9 degrees), or -1.
    int find_grid_sample(const MotorState& m) const;

    void rebuild_index();

    bool operator==(const CalibrationSet& other) const;

private:
    std::vector<int> index_; // npan*ntilt, row-major in (tilt, pan)
};

struct CollectResult {
    CalibrationSet set;
    std::vector<MotorState> dropped; // grid points with no visible corners
};

/// Runs the calibration sweep: one sample per grid point, motors approached
/// in raster order always from below so the backlash state matches between
/// calibration and execution. Samples with no visible corners are dropped
/// and reported.
CollectResult collect(Rig& rig, const TargetBoard& board, const SweepConfig& sweep,
                      const std::string& digest, std::uint64_t seed);

/// Line-oriented JSON persistence ("dijit-calib/1"): record 0 is a header
/// with the grid, step and digest; each following line is one sample.
void save(const CalibrationSet& set, const std::string& path);
CalibrationSet load(const std::string& path);

/// As load(), but fails with DigestMismatch when the stored digest differs
/// from `expected_digest`.
CalibrationSet load_checked(const std::string& path, const std::string& expected_digest);

} // namespace ptfix
