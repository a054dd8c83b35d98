#pragma once

#include <stdexcept>
#include <string>

namespace ebvs {

// All library errors derive from Error so callers can catch one base.
// Anything recoverable-by-fixing-the-input gets its own type; programming
// errors (stale caches, impossible states) throw ContractViolation.

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of an operation (negative Poisson
// mean, binomial mean outside (0,1), non-positive variance, ...).
struct DomainError : Error {
    using Error::Error;
};

// Structurally invalid input: dimension mismatches, gamma entries outside
// {-1,0,1}, probabilities not summing to one, etc.
struct ValidationError : Error {
    using Error::Error;
};

// CSV cell that cannot be parsed under the declared schema.  Carries 1-based
// row and column for error messages that point at the offending cell.
struct ParseError : Error {
    ParseError(const std::string& msg, std::size_t row, std::size_t col)
        : Error(msg + " (row " + std::to_string(row) + ", column " + std::to_string(col) + ")"),
          row(row), col(col) {}
    std::size_t row;
    std::size_t col;
};

// Schema/table mismatch: unknown column names, duplicate headers, missing roles.
struct SchemaError : Error {
    using Error::Error;
};

// A putative column with zero sample variance cannot be standardized.
struct ConstantColumnError : Error {
    explicit ConstantColumnError(const std::string& column)
        : Error("column '" + column + "' is constant and cannot be standardized"),
          column(column) {}
    std::string column;
};

// Survival data in which nobody experiences an event.
struct NoEventsError : Error {
    using Error::Error;
};

// The fixed-effect GLS system H' Sigma^-1 H is rank deficient.
struct RankDeficiencyError : Error {
    using Error::Error;
};

// The low-rank core failed to factor.  With core C = I + PSD this cannot
// happen in exact arithmetic; kept as a defensive check.
struct SingularCoreError : Error {
    using Error::Error;
};

// Internal invariant broken; indicates a bug, not bad input.
struct ContractViolation : Error {
    using Error::Error;
};

}  // namespace ebvs
