#pragma once

#include <stdexcept>

namespace poreuq {

// Geometric feasibility constraint violated (d >= 2R cos(theta), ...).
struct ConstraintError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Conditional support of a causal prior collapsed to the empty interval.
struct EmptySupportError : std::domain_error {
    using std::domain_error::domain_error;
};

// Forward Rosenblatt transform applied to a point outside the prior support.
struct OutOfSupportError : std::domain_error {
    using std::domain_error::domain_error;
};

// Iterative solve hit its iteration cap before reaching tolerance.
struct SolveError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Rasterised fluid region is not 4-connected.
struct DisconnectedPoreError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Least-squares design matrix lost column rank.
struct RankDeficiencyError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Variance-based indices requested for a constant response.
struct ZeroVarianceError : std::domain_error {
    using std::domain_error::domain_error;
};

// Sample set degenerate for the requested statistic (zero spread, too few points).
struct DegenerateSampleError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Malformed run configuration.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Filesystem failure while writing or reading pipeline artifacts.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace poreuq
