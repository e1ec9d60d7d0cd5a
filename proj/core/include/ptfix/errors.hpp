#pragma once

#include <stdexcept>
#include <string>

namespace ptfix {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// geometry / homography
struct InsufficientCorrespondences : Error { using Error::Error; };
struct DegenerateConfiguration : Error { using Error::Error; };
struct PointAtInfinity : Error { using Error::Error; };

// rig
struct OutOfRange : Error { using Error::Error; };
struct TargetUnreachable : Error { using Error::Error; };

// calibration
struct EmptyGrid : Error { using Error::Error; };
struct AllSamplesDropped : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };
struct ParseError : Error {
    ParseError(const std::string& msg, long record) : Error(msg), record_number(record) {}
    long record_number;
};
struct DigestMismatch : Error { using Error::Error; };

// saccade
struct NoValidNeighbors : Error { using Error::Error; };
struct NoValidCell : Error { using Error::Error; };
struct NonConvergence : Error { using Error::Error; };
struct OutsideCalibrationHull : Error { using Error::Error; };
struct TargetLost : Error { using Error::Error; };

// eval
struct Unreachable : Error { using Error::Error; };
struct NoSuccessfulTrials : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };

} // namespace ptfix
