#pragma once

#include <stdexcept>
#include <string>

namespace warpflow {

// Error classes map onto process exit codes in the CLI:
//   InvalidConfig / MissingArtifacts -> 2, numerical failures -> 3.
// Monitor assertions are recorded, never thrown; they drive exit code 4.

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidConfig : Error {
    using Error::Error;
};
struct MissingArtifacts : Error {
    using Error::Error;
};

struct NonPositiveWarping : Error {
    using Error::Error;
};
struct DegenerateMetric : Error {
    using Error::Error;
};
struct ChartSingularity : Error {
    using Error::Error;
};
struct StepTooSmall : Error {
    using Error::Error;
};
struct DimensionMismatch : Error {
    using Error::Error;
};
struct BlowupDetected : Error {
    using Error::Error;
};
struct InsufficientData : Error {
    using Error::Error;
};
struct AxisExpansionFailure : Error {
    using Error::Error;
};

}  // namespace warpflow
