#pragma once

#include <stdexcept>

namespace shiftdom {

// One exception type per violated precondition. Tests assert on the exact
// type rather than parsing messages, so keep the taxonomy stable.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct LevelUnderflow : Error { using Error::Error; };      // parent requested above the root
struct CoverNotFound : Error { using Error::Error; };       // no shifted grid covers the dilate
struct OverlappingRoots : Error { using Error::Error; };    // rooted union with intersecting roots
struct SupportLevelError : Error { using Error::Error; };   // coefficient on an illegal level
struct SupportResidueError : Error { using Error::Error; }; // support off the complexity ladder
struct NotNormalized : Error { using Error::Error; };       // selection needs unit Carleson norm
struct ExponentError : Error { using Error::Error; };       // exponent tuple inconsistent
struct GridMismatch : Error { using Error::Error; };        // cube paired with the wrong grid
struct ConfigError : Error { using Error::Error; };         // bad experiment configuration

} // namespace shiftdom
