#pragma once

#include <stdexcept>

namespace sitetrack {

/// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// geometry
struct NonPositiveDepth : Error { using Error::Error; };
struct DegenerateDisparity : Error { using Error::Error; };
struct NearPiRotation : Error { using Error::Error; };

// masking
struct UnknownObjectId : Error { using Error::Error; };

// motion-state classification
struct EmptyHistory : Error { using Error::Error; };

// tracking
struct InsufficientMatches : Error { using Error::Error; };
struct SolverDiverged : Error { using Error::Error; };

// simulation / configuration
struct ConfigInvalid : Error { using Error::Error; };

// io
struct IoError : Error { using Error::Error; };
struct FormatError : Error { using Error::Error; };

// evaluation
struct DegenerateGeometry : Error { using Error::Error; };
struct NoOverlap : Error { using Error::Error; };
struct LengthMismatch : Error { using Error::Error; };
struct EmptyRecords : Error { using Error::Error; };

}  // namespace sitetrack
