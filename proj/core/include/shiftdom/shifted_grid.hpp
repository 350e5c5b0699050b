#pragma once

#include "shiftdom/dyadic.hpp"

#include <compare>
#include <cstdint>
#include <vector>

namespace shiftdom {

// The 3^d family of shifted dyadic grids over a root lattice. Grid rho is
// described by one third per axis (thirds[i] in {0,1,2}); its level-j cubes
// are the base level-j grid translated by (-1)^j * thirds[i]/3 * side(j) on
// axis i. The sign alternation in j is what makes each shifted grid nested
// across levels, and it extends to negative levels (cubes larger than P0),
// which the cover construction genuinely needs.
struct GridShift {
  std::vector<int> thirds;

  auto operator<=>(const GridShift&) const = default;

  bool is_base() const {
    for (int t : thirds)
      if (t != 0) return false;
    return true;
  }

  static GridShift base(int dim) { return {std::vector<int>(dim, 0)}; }
  // All 3^dim shifts in lexicographic order; the cover's tie-break order.
  static std::vector<GridShift> all(int dim);
};

struct ShiftedCube {
  GridShift rho;
  int level = 0; // may be negative
  std::vector<std::int64_t> index;

  auto operator<=>(const ShiftedCube&) const = default;
};

// (-1)^level, correct for negative levels.
inline int level_sign(int level) { return (level % 2 == 0) ? 1 : -1; }

inline Rat shifted_side(const RootCube& root, int level) {
  return root.side * pow2(-level);
}

std::vector<Rat> shifted_corner(const RootCube& root, const ShiftedCube& c);

// Parents exist at every level; shifted grids are not truncated above.
ShiftedCube shifted_parent(const ShiftedCube& c, int m = 1);

inline ShiftedCube shifted_ancestor_at_level(const ShiftedCube& c, int level) {
  if (level > c.level) throw Error("shifted ancestor below the cube");
  return shifted_parent(c, c.level - level);
}

// Both cubes must belong to the same grid; GridMismatch otherwise.
bool shifted_contains(const ShiftedCube& outer, const ShiftedCube& inner);

// A base-lattice cube viewed as a member of the rho = 0 grid.
inline ShiftedCube as_shifted(const DyadicCube& q, int dim) {
  return ShiftedCube{GridShift::base(dim), q.level, q.index};
}

// Relative coordinates below a fixed shifted cube. Inside any one cube the
// subdivision is plain halving regardless of the grid, so descendants are
// addressed by ordinary DyadicCube coordinates with the ancestor as level 0.
DyadicCube shifted_to_relative(const ShiftedCube& root, const ShiftedCube& q);
ShiftedCube shifted_from_relative(const ShiftedCube& root, const DyadicCube& rel);

// Smallest cube of the common grid containing every input. Alternation makes
// ancestor chains of nearby cubes merge within a few levels; the level floor
// only guards against inputs from grids where the chains genuinely diverge.
ShiftedCube common_shifted_ancestor(const std::vector<ShiftedCube>& cubes,
                                    int level_floor);

struct CoverResult {
  GridShift rho;
  ShiftedCube cube; // R with Q inside R and 2^m Q inside R^(m)
};

// For a base cube Q, finds a grid rho and a cube R of that grid at scale
// 4*side(Q) (the only dyadic scale in (3*side(Q), 6*side(Q)]) such that R
// contains Q and the m-th parent of R contains the 2^m-fold dilate of Q about
// its center. Deterministic: grids are tried in lexicographic order and the
// first success wins; for a fixed grid the candidate containing Q's corner is
// the only possible one.
CoverResult one_third_cover(const RootCube& root, const DyadicCube& q, int m);

} // namespace shiftdom
