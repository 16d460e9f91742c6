#pragma once

#include <stdexcept>
#include <string>

namespace divbound {

// Base class for all errors raised by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// convex_core
struct NonConvexInput : Error { using Error::Error; };
struct EmptyDomain : Error { using Error::Error; };
struct UnboundedBelow : Error { using Error::Error; };
struct AllInfinite : Error { using Error::Error; };

// divergences
struct UnknownName : Error { using Error::Error; };
struct BadParameter : Error { using Error::Error; };
struct NotZeroAtOne : Error { using Error::Error; };
struct MismatchedUniverse : Error { using Error::Error; };
struct NegativeNu : Error { using Error::Error; };
struct InfeasibleConstraint : Error { using Error::Error; };

// measures
struct MissingValue : Error { using Error::Error; };
struct BadOrder : Error { using Error::Error; };
struct BadFamily : Error { using Error::Error; };
struct ParseError : Error { using Error::Error; };

// bounds
struct SupportTooLarge : Error { using Error::Error; };
struct ZeroVariance : Error { using Error::Error; };
struct InsufficientSamples : Error { using Error::Error; };

// vajda
struct NotTwiceDifferentiable : Error { using Error::Error; };
struct DegenerateInterval : Error { using Error::Error; };

}  // namespace divbound
