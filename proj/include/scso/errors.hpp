#pragma once

#include <stdexcept>
#include <string>

namespace scso {

/// Base class for all errors raised by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Input file could not be read or is not syntactically valid.
struct ParseError : Error {
  using Error::Error;
};

/// Input is syntactically valid but violates a model invariant.
/// The message names the offending element (junction, approach, link, ...).
struct ValidationError : Error {
  using Error::Error;
};

/// An index (sub-network, phase, ...) is out of range.
struct IndexError : Error {
  using Error::Error;
};

/// A vector has the wrong length for the operation.
struct DimensionMismatch : Error {
  using Error::Error;
};

/// The junction graph has no edges, so it cannot be decomposed.
struct NoEdges : Error {
  using Error::Error;
};

/// Too few sample points to fit the requested interpolation model.
struct TooFewPoints : Error {
  using Error::Error;
};

/// The interpolation system stayed numerically singular after regularization.
struct SingularSystem : Error {
  using Error::Error;
};

/// Selection produced an empty set.
struct EmptySelection : Error {
  using Error::Error;
};

/// The sample archive is empty.
struct EmptyArchive : Error {
  using Error::Error;
};

/// The covariance matrix could not be factorized even after regularization.
struct CovarianceDegenerate : Error {
  using Error::Error;
};

/// The simulation budget cannot cover the configured schedule.
struct BudgetTooSmall : Error {
  using Error::Error;
};

/// A signal plan has the wrong dimension or an out-of-bounds duration.
struct InvalidPlan : Error {
  using Error::Error;
};

}  // namespace scso
