#include "shiftdom/dyadic.hpp"

#include <string>

namespace shiftdom {

RootCube RootCube::make(int dim, Rat side, std::vector<Rat> corner, int depth) {
  if (dim < 1) throw Error("RootCube: dim must be >= 1");
  if (depth < 0) throw Error("RootCube: depth must be >= 0");
  if (sgn(side) <= 0) throw Error("RootCube: side must be positive");
  if (corner.size() != static_cast<std::size_t>(dim))
    throw Error("RootCube: corner has wrong dimension");
  // 64-bit flat leaf indices; experiment configs clamp much earlier anyway.
  if (static_cast<long>(dim) * depth >= 63)
    throw Error("RootCube: lattice too deep for flat leaf addressing");
  RootCube r;
  r.dim = dim;
  r.side = std::move(side);
  r.corner = std::move(corner);
  r.depth = depth;
  return r;
}

RootCube RootCube::unit(int dim, int depth) {
  return make(dim, 1, std::vector<Rat>(static_cast<std::size_t>(dim), Rat(0)),
              depth);
}

std::vector<DyadicCube> children(const DyadicCube& q, int dim) {
  return descendants(q, dim, 1);
}

std::vector<DyadicCube> descendants(const DyadicCube& q, int dim, int m) {
  if (m < 0) throw Error("descendants: negative generation count");
  std::vector<DyadicCube> out;
  const std::uint64_t per_axis = std::uint64_t{1} << m;
  std::uint64_t total = 1;
  for (int i = 0; i < dim; ++i) total *= per_axis;
  out.reserve(total);
  std::vector<std::int64_t> offset(static_cast<std::size_t>(dim), 0);
  for (std::uint64_t n = 0; n < total; ++n) {
    DyadicCube c{q.level + m, q.index};
    for (int i = 0; i < dim; ++i)
      c.index[static_cast<std::size_t>(i)] =
          (q.index[static_cast<std::size_t>(i)] << m) +
          offset[static_cast<std::size_t>(i)];
    out.push_back(std::move(c));
    // odometer over the offset vector, last axis fastest
    for (int i = dim - 1; i >= 0; --i) {
      if (++offset[static_cast<std::size_t>(i)] <
          static_cast<std::int64_t>(per_axis))
        break;
      offset[static_cast<std::size_t>(i)] = 0;
    }
  }
  return out;
}

void require_in_lattice(const RootCube& root, const DyadicCube& q) {
  if (q.index.size() != static_cast<std::size_t>(root.dim))
    throw Error("cube dimension does not match the lattice");
  if (q.level < 0 || q.level > root.depth)
    throw Error("cube level " + std::to_string(q.level) +
                " outside lattice depth " + std::to_string(root.depth));
  const std::int64_t extent = std::int64_t{1} << q.level;
  for (auto k : q.index)
    if (k < 0 || k >= extent)
      throw Error("cube index out of range for its level");
}

std::vector<Rat> cube_corner(const RootCube& root, const DyadicCube& q) {
  const Rat side = cube_side(root, q.level);
  std::vector<Rat> c(static_cast<std::size_t>(root.dim));
  for (int i = 0; i < root.dim; ++i)
    c[static_cast<std::size_t>(i)] =
        root.corner[static_cast<std::size_t>(i)] +
        Rat(q.index[static_cast<std::size_t>(i)]) * side;
  return c;
}

std::uint64_t flatten(int dim, int level, const std::vector<std::int64_t>& index) {
  std::uint64_t flat = 0;
  for (int i = 0; i < dim; ++i)
    flat = (flat << level) |
           static_cast<std::uint64_t>(index[static_cast<std::size_t>(i)]);
  return flat;
}

std::uint64_t leaf_flat(const RootCube& root, const DyadicCube& leaf) {
  return flatten(root.dim, root.depth, leaf.index);
}

DyadicCube leaf_from_flat(const RootCube& root, std::uint64_t flat) {
  DyadicCube q{root.depth, std::vector<std::int64_t>(
                               static_cast<std::size_t>(root.dim), 0)};
  const std::uint64_t mask = (std::uint64_t{1} << root.depth) - 1;
  for (int i = root.dim - 1; i >= 0; --i) {
    q.index[static_cast<std::size_t>(i)] =
        static_cast<std::int64_t>(flat & mask);
    flat >>= root.depth;
  }
  return q;
}

void for_each_leaf_under(const RootCube& root, const DyadicCube& q,
                         const std::function<void(std::uint64_t)>& fn) {
  require_in_lattice(root, q);
  const int up = root.depth - q.level;
  const std::int64_t span = std::int64_t{1} << up;
  const int d = root.dim;
  std::vector<std::int64_t> idx(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i)
    idx[static_cast<std::size_t>(i)] = q.index[static_cast<std::size_t>(i)]
                                       << up;
  std::vector<std::int64_t> off(static_cast<std::size_t>(d), 0);
  std::uint64_t count = 1;
  for (int i = 0; i < d; ++i) count *= static_cast<std::uint64_t>(span);
  std::vector<std::int64_t> cur(static_cast<std::size_t>(d));
  for (std::uint64_t n = 0; n < count; ++n) {
    for (int i = 0; i < d; ++i)
      cur[static_cast<std::size_t>(i)] = idx[static_cast<std::size_t>(i)] +
                                         off[static_cast<std::size_t>(i)];
    fn(flatten(d, root.depth, cur));
    for (int i = d - 1; i >= 0; --i) {
      if (++off[static_cast<std::size_t>(i)] < span) break;
      off[static_cast<std::size_t>(i)] = 0;
    }
  }
}

DyadicCube to_relative(const DyadicCube& p, const DyadicCube& q) {
  if (!cube_contains(p, q))
    throw Error("to_relative: cube is not below the given root");
  DyadicCube rel{q.level - p.level, q.index};
  for (std::size_t i = 0; i < rel.index.size(); ++i)
    rel.index[i] -= p.index[i] << rel.level;
  return rel;
}

DyadicCube to_absolute(const DyadicCube& p, const DyadicCube& rel) {
  DyadicCube abs{p.level + rel.level, rel.index};
  for (std::size_t i = 0; i < abs.index.size(); ++i)
    abs.index[i] += p.index[i] << rel.level;
  return abs;
}

} // namespace shiftdom
