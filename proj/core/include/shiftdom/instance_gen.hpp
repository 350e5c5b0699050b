#pragma once

#include "shiftdom/shift_ops.hpp"

#include <cstdint>

namespace shiftdom {

struct GenOptions {
  int d = 1;
  int k = 1;
  int m = 1;
  int depth = 4;
  int support = 8;       // coefficient draws; duplicates collapse
  bool normalize = true; // scale the coefficients to Carleson norm one
};

// Seeded random instance on the unit root cube. Coefficient values are
// rationals in (0,1] with denominator at most 2^10, function leaves are
// rationals in [0, 2^10] with a quarter of them zero. The coefficient
// positions depend on (seed, m); the values and the functions depend on the
// seed alone, so m-sweeps at a fixed seed share their right-hand sides.
ShiftInstance<Rat> gen_instance(std::uint64_t seed, const GenOptions& opt);

} // namespace shiftdom
