#pragma once

#include "shiftdom/errors.hpp"
#include "shiftdom/rational.hpp"

#include <compare>
#include <cstdint>
#include <functional>
#include <vector>

namespace shiftdom {

// Root cube P0 plus the truncation depth of its lattice. The lattice consists
// of the cubes obtained from P0 by j rounds of halving along every axis,
// 0 <= j <= depth; level-depth cubes are the leaves that grid functions live
// on. side and corner are exact rationals so every derived cube has exact
// geometry.
struct RootCube {
  int dim = 1;
  Rat side = 1;
  std::vector<Rat> corner; // size dim
  int depth = 0;

  static RootCube make(int dim, Rat side, std::vector<Rat> corner, int depth);
  static RootCube unit(int dim, int depth); // [0,1)^dim

  std::uint64_t leaf_count() const {
    return std::uint64_t{1} << (std::uint64_t(dim) * depth);
  }
  Rat measure() const { return ipow(side, static_cast<unsigned long>(dim)); }

  friend bool operator==(const RootCube& a, const RootCube& b) {
    return a.dim == b.dim && a.side == b.side && a.corner == b.corner &&
           a.depth == b.depth;
  }
};

// A lattice cube: level j and one integer index per axis in [0, 2^j). The
// ordering is (level, index) lexicographic; every container in the library
// iterates cubes in this deterministic order.
struct DyadicCube {
  int level = 0;
  std::vector<std::int64_t> index;

  auto operator<=>(const DyadicCube& other) const = default;
};

inline DyadicCube lattice_root(int dim) {
  return DyadicCube{0, std::vector<std::int64_t>(dim, 0)};
}

// The m-th dyadic parent. Arithmetic right shift floors correctly for the
// negative indices that relative coordinates under shifted grids can produce.
inline DyadicCube parent(const DyadicCube& q, int m = 1) {
  if (m < 0) throw Error("parent: negative generation count");
  if (q.level < m)
    throw LevelUnderflow("parent: cube at level " + std::to_string(q.level) +
                         " has no ancestor " + std::to_string(m) +
                         " generations up");
  DyadicCube p{q.level - m, q.index};
  for (auto& k : p.index) k >>= m;
  return p;
}

inline DyadicCube ancestor_at_level(const DyadicCube& q, int level) {
  return parent(q, q.level - level);
}

// Whether q contains r (every cube contains itself).
inline bool cube_contains(const DyadicCube& q, const DyadicCube& r) {
  if (r.level < q.level || q.index.size() != r.index.size()) return false;
  const int up = r.level - q.level;
  for (std::size_t i = 0; i < q.index.size(); ++i)
    if ((r.index[i] >> up) != q.index[i]) return false;
  return true;
}

inline bool cubes_disjoint(const DyadicCube& a, const DyadicCube& b) {
  return !cube_contains(a, b) && !cube_contains(b, a);
}

std::vector<DyadicCube> children(const DyadicCube& q, int dim);

// All descendants exactly m generations below q, in index order. Size 2^(m*dim).
std::vector<DyadicCube> descendants(const DyadicCube& q, int dim, int m);

void require_in_lattice(const RootCube& root, const DyadicCube& q);

// Geometry. Levels here are always >= 0; shifted grids have their own helpers.
inline Rat cube_side(const RootCube& root, int level) {
  return root.side * pow2(-level);
}
std::vector<Rat> cube_corner(const RootCube& root, const DyadicCube& q);
inline Rat cube_measure(const RootCube& root, int level) {
  return ipow(cube_side(root, level), static_cast<unsigned long>(root.dim));
}
// |Q| / |P0| = 2^(-level*dim); the scale-free weight used by Carleson sums.
inline Rat relative_measure(int dim, int level) {
  return pow2(-static_cast<long>(level) * dim);
}

// Leaves are addressed by a flat row-major index over the level-depth grid.
std::uint64_t flatten(int dim, int level, const std::vector<std::int64_t>& index);
std::uint64_t leaf_flat(const RootCube& root, const DyadicCube& leaf);
DyadicCube leaf_from_flat(const RootCube& root, std::uint64_t flat);

// Calls fn(flat) for every leaf under q, ascending flat order.
void for_each_leaf_under(const RootCube& root, const DyadicCube& q,
                         const std::function<void(std::uint64_t)>& fn);

// Coordinates of q relative to an ancestor p (p becomes the level-0 root).
DyadicCube to_relative(const DyadicCube& p, const DyadicCube& q);
DyadicCube to_absolute(const DyadicCube& p, const DyadicCube& rel);

} // namespace shiftdom
