#pragma once

#include <stdexcept>
#include <string>

namespace obe {

/// Shape disagreement between operands (vector/matrix/code lengths).
struct DimError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Not enough rows/samples to perform the requested fit.
struct InsufficientData : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Input matrix is not symmetric within tolerance.
struct SymmetryError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Iterative routine did not converge within its sweep cap.
struct ConvergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// On-disk artifact is malformed (bad magic, version, truncation, non-finite payload).
struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Invalid configuration value or combination.
struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Argument outside the mathematical domain of the operation.
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

/// Index outside its valid range.
struct IndexError : std::out_of_range {
    using std::out_of_range::out_of_range;
};

/// Training produced a non-finite loss.
struct DivergenceError : std::runtime_error {
    DivergenceError(const std::string& what, int epoch_index)
        : std::runtime_error(what), epoch(epoch_index) {}
    int epoch;
};

/// Index construction attempted over an empty enrollment table.
struct EmptyIndexError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Evaluation protocol violated (e.g. test speaker absent from enrollment).
struct ProtocolError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

}  // namespace obe
