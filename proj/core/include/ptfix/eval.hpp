#pragma once

#include <array>
#include <random>
#include <string>
#include <vector>

#include "ptfix/calibration.hpp"
#include "ptfix/config.hpp"
#include "ptfix/saccade.hpp"

namespace ptfix {

/// Amplitude buckets in degrees: [0,6), [6,12), [12,18).
inline constexpr std::array<double, 4> kBucketEdges{0.0, 6.0, 12.0, 18.0};

inline int bucket_of(double ecc_deg) {
    if (ecc_deg < kBucketEdges[1]) return 0;
    if (ecc_deg < kBucketEdges[2]) return 1;
    return 2;
}

struct TargetDraw {
    Eigen::Vector3d world = Eigen::Vector3d::Zero();
    PixelPoint pixel;       // in the current view
    double ecc_deg = 0.0;
    double dir_deg = 0.0;
    int bucket = 0;
};

/// Draws a fixation target with the human-like amplitude mix: bucket chosen
/// with the configured probabilities, eccentricity uniform within the
/// bucket, direction uniform. The pixel at that angular offset from center
/// is back-projected at the board's depth to a world point.
TargetDraw sample_target(std::mt19937_64& rng, const RigModel& model, const MotorState& actual,
                         const TargetBoard& board, const EvalConfig& eval);

struct TrialRecord {
    int id = 0;
    MotorState start;        // commanded state at trial start
    double ecc_deg = 0.0;
    double dir_deg = 0.0;
    int bucket = 0;
    Eigen::Vector3d target_world = Eigen::Vector3d::Zero();
    std::vector<SaccadePlan> plans;  // primary + corrective passes
    std::vector<Landing> landings;
    bool failed = false;
    std::string failure;
    int resamples = 0; // targets rejected for leaving the calibration hull
};

struct TrialSummary {
    int n = 0;        // successful trials
    int n_failed = 0;
    double mean_primary = 0.0, median_primary = 0.0;
    double mean_final = 0.0, median_final = 0.0;
    std::array<double, 3> bucket_mean{0.0, 0.0, 0.0}; // primary error per amplitude bucket
    std::array<int, 3> bucket_n{0, 0, 0};
    double mean_abs_h = 0.0, mean_abs_v = 0.0;
    double median_h = 0.0, median_v = 0.0;
    double frac_under_1 = 0.0, frac_under_2 = 0.0; // primary error
    int resampled_targets = 0;
};

/// Runs chained saccade trials: each trial starts at the previous trial's
/// final commanded state. Deterministic given the seed.
std::vector<TrialRecord> run_experiment(const Config& cfg, const CalibrationSet& set,
                                        std::uint64_t seed, PlannerOptions opts = {});

TrialSummary summarize(const std::vector<TrialRecord>& trials);

void export_csv(const std::vector<TrialRecord>& trials, const std::string& path);
void export_summary(const TrialSummary& summary, const std::string& path);
/// Primary landing points in signed degree coordinates, for scatter plots.
void export_scatter(const std::vector<TrialRecord>& trials, const std::string& path);

/// Re-parses a trial CSV written by export_csv (used to check that the
/// export loses nothing summary-relevant).
std::vector<TrialRecord> parse_csv(const std::string& path);

} // namespace ptfix
