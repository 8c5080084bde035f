#pragma once

#include <stdexcept>
#include <string>

namespace covlab {

// Error taxonomy. Everything user-facing derives from Error so the CLI can map
// exceptions to exit codes: ParameterError/ContractError are usage problems (exit 2),
// the rest are runtime/numeric failures (exit 1).
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad argument values, out-of-range indices, malformed config input.
struct ParameterError : Error {
    using Error::Error;
};

// A precondition on the data itself was violated (unstandardized columns,
// degenerate column, dimension mismatch).
struct ContractError : Error {
    using Error::Error;
};

// An iterative solver exhausted its budget without meeting its tolerance.
struct ConvergenceError : Error {
    using Error::Error;
};

// Numerical breakdown that should not happen on sane input (singular active
// Gram matrix, monotonicity breach in a descent method).
struct NumericalError : Error {
    using Error::Error;
};

// Exact-zero convention: coefficients this close to zero are snapped to 0 after
// convergence so supports and event detection are deterministic.
inline constexpr double kZeroSnap = 1e-12;

// Tie tolerance for knot/correlation comparisons along solution paths.
inline constexpr double kTieTol = 1e-12;

// All numbers serialized to CSV/config echoes use 17 significant digits, which
// round-trips IEEE doubles losslessly.
std::string format_g17(double v);

}  // namespace covlab
