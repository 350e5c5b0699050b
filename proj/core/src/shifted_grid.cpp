#include "shiftdom/shifted_grid.hpp"

namespace shiftdom {

namespace {

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

void require_same_grid(const GridShift& a, const GridShift& b) {
  if (a != b) throw GridMismatch("cubes belong to different shifted grids");
}

} // namespace

std::vector<GridShift> GridShift::all(int dim) {
  std::vector<GridShift> out;
  std::vector<int> t(static_cast<std::size_t>(dim), 0);
  while (true) {
    out.push_back(GridShift{t});
    int i = dim - 1;
    for (; i >= 0; --i) {
      if (++t[static_cast<std::size_t>(i)] <= 2) break;
      t[static_cast<std::size_t>(i)] = 0;
    }
    if (i < 0) break;
  }
  return out;
}

std::vector<Rat> shifted_corner(const RootCube& root, const ShiftedCube& c) {
  const Rat side = shifted_side(root, c.level);
  const int sign = level_sign(c.level);
  std::vector<Rat> corner(static_cast<std::size_t>(root.dim));
  for (int i = 0; i < root.dim; ++i) {
    const Rat offset =
        Rat(c.index[static_cast<std::size_t>(i)]) +
        frac(sign * c.rho.thirds[static_cast<std::size_t>(i)], 3);
    corner[static_cast<std::size_t>(i)] =
        root.corner[static_cast<std::size_t>(i)] + offset * side;
  }
  return corner;
}

ShiftedCube shifted_parent(const ShiftedCube& c, int m) {
  if (m < 0) throw Error("shifted_parent: negative generation count");
  ShiftedCube cur = c;
  for (int step = 0; step < m; ++step) {
    // Child k of parent n at level j satisfies k = 2n + (-1)^j * t + r with
    // r in {0,1} per axis, so n = floor((k - (-1)^j * t) / 2).
    const int parent_level = cur.level - 1;
    const int sign = level_sign(parent_level);
    ShiftedCube p{cur.rho, parent_level, cur.index};
    for (std::size_t i = 0; i < p.index.size(); ++i)
      p.index[i] = floor_div(cur.index[i] - sign * cur.rho.thirds[i], 2);
    cur = std::move(p);
  }
  return cur;
}

bool shifted_contains(const ShiftedCube& outer, const ShiftedCube& inner) {
  require_same_grid(outer.rho, inner.rho);
  if (inner.level < outer.level) return false;
  return shifted_ancestor_at_level(inner, outer.level) == outer;
}

DyadicCube shifted_to_relative(const ShiftedCube& root, const ShiftedCube& q) {
  if (!shifted_contains(root, q))
    throw Error("shifted_to_relative: cube is not below the given root");
  // Walk up recording each step's child position r, then assemble indices.
  const int steps = q.level - root.level;
  std::vector<std::vector<int>> bits(
      q.index.size(), std::vector<int>(static_cast<std::size_t>(steps)));
  ShiftedCube cur = q;
  for (int s = steps - 1; s >= 0; --s) {
    const ShiftedCube p = shifted_parent(cur, 1);
    const int sign = level_sign(p.level);
    for (std::size_t i = 0; i < cur.index.size(); ++i) {
      const std::int64_t r =
          cur.index[i] - 2 * p.index[i] - sign * cur.rho.thirds[i];
      bits[i][static_cast<std::size_t>(s)] = static_cast<int>(r);
    }
    cur = p;
  }
  DyadicCube rel{steps, std::vector<std::int64_t>(q.index.size(), 0)};
  for (std::size_t i = 0; i < q.index.size(); ++i)
    for (int s = 0; s < steps; ++s)
      rel.index[i] = (rel.index[i] << 1) |
                     static_cast<std::int64_t>(bits[i][static_cast<std::size_t>(s)]);
  return rel;
}

ShiftedCube shifted_from_relative(const ShiftedCube& root,
                                  const DyadicCube& rel) {
  ShiftedCube cur = root;
  for (int s = rel.level - 1; s >= 0; --s) {
    const int child_level = cur.level + 1;
    const int sign = level_sign(cur.level);
    ShiftedCube child{cur.rho, child_level, cur.index};
    for (std::size_t i = 0; i < cur.index.size(); ++i) {
      const std::int64_t r = (rel.index[i] >> s) & 1;
      child.index[i] = 2 * cur.index[i] + sign * cur.rho.thirds[i] + r;
    }
    cur = std::move(child);
  }
  return cur;
}

ShiftedCube common_shifted_ancestor(const std::vector<ShiftedCube>& cubes,
                                    int level_floor) {
  if (cubes.empty()) throw Error("common_shifted_ancestor: empty input");
  ShiftedCube anc = cubes.front();
  for (const auto& c : cubes) {
    require_same_grid(anc.rho, c.rho);
    while (!(c.level >= anc.level &&
             shifted_ancestor_at_level(c, anc.level) == anc)) {
      if (anc.level <= level_floor)
        throw GridMismatch(
            "no common ancestor within the level floor; the family's "
            "ancestor chains do not merge");
      anc = shifted_parent(anc, 1);
    }
  }
  return anc;
}

namespace {

// Box containment [a, a+s) inside [b, b+S) per axis, exact.
bool box_inside(const std::vector<Rat>& inner_corner, const Rat& inner_side,
                const std::vector<Rat>& outer_corner, const Rat& outer_side) {
  for (std::size_t i = 0; i < inner_corner.size(); ++i) {
    if (inner_corner[i] < outer_corner[i]) return false;
    if (inner_corner[i] + inner_side > outer_corner[i] + outer_side)
      return false;
  }
  return true;
}

} // namespace

CoverResult one_third_cover(const RootCube& root, const DyadicCube& q, int m) {
  if (m < 1) throw Error("one_third_cover: m must be >= 1");
  require_in_lattice(root, q);

  // Target scale: side(R) = 4*side(Q), i.e. level(R) = level(Q) - 2.
  const int target_level = q.level - 2;
  const int sign = level_sign(target_level);

  const std::vector<Rat> q_corner = cube_corner(root, q);
  const Rat q_side = cube_side(root, q.level);
  // The 2^m-fold dilate of Q about its center.
  const Rat dilate_side = pow2(m) * q_side;
  std::vector<Rat> dilate_corner(q_corner.size());
  for (std::size_t i = 0; i < q_corner.size(); ++i)
    dilate_corner[i] = q_corner[i] + (q_side - dilate_side) / 2;

  for (const GridShift& rho : GridShift::all(root.dim)) {
    // Unique candidate: the grid-rho cube at the target level containing Q's
    // corner. Its index solves k/4 - sign*t/3 per axis, i.e. floor((3k - 4*sign*t)/12).
    ShiftedCube r{rho, target_level,
                  std::vector<std::int64_t>(q.index.size(), 0)};
    for (std::size_t i = 0; i < q.index.size(); ++i)
      r.index[i] = floor_div(
          3 * q.index[i] - 4 * static_cast<std::int64_t>(sign) *
                               rho.thirds[i],
          12);

    const std::vector<Rat> r_corner = shifted_corner(root, r);
    const Rat r_side = shifted_side(root, target_level);
    if (!box_inside(q_corner, q_side, r_corner, r_side)) continue;

    const ShiftedCube rm = shifted_parent(r, m);
    const std::vector<Rat> rm_corner = shifted_corner(root, rm);
    const Rat rm_side = shifted_side(root, rm.level);
    if (box_inside(dilate_corner, dilate_side, rm_corner, rm_side))
      return CoverResult{rho, r};
  }
  throw CoverNotFound("no shifted grid covers the dilate of the given cube");
}

} // namespace shiftdom
