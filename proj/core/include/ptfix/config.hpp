#pragma once

#include <string>

#include "ptfix/rig.hpp"

namespace ptfix {

/// Calibration sweep bounds, degrees.
struct SweepConfig {
    double pan_min = -20.0, pan_max = 20.0;
    double tilt_min = -15.0, tilt_max = 15.0;
    double step = 5.0;
};

struct EvalConfig {
    int trials = 191;
    int corrective = 1;
    double stop_threshold_deg = 0.0; // corrective pass skipped below this error
    double bucket_probs[3] = {0.58, 0.33, 0.09};
    double max_ecc_deg = 18.0;
};

struct Config {
    RigModel rig = RigModel::default_imperfect();
    TargetBoard board;
    SweepConfig sweep;
    EvalConfig eval;
};

/// Loads a JSON config file; absent keys keep their defaults.
Config load_config(const std::string& path);
Config parse_config(const std::string& json_text);

/// Canonical serialization of the rig + board section, used for the
/// calibration-set digest.
std::string canonical_rig_json(const Config& cfg);

/// FNV-1a 64-bit hex digest of the canonical rig + board serialization.
std::string config_digest(const Config& cfg);

std::string dump_config(const Config& cfg);

} // namespace ptfix
