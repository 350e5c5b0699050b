#pragma once

#include "shiftdom/dyadic.hpp"
#include "shiftdom/scalar.hpp"

#include <utility>
#include <vector>

namespace shiftdom {

// A function that is constant on the leaves of a root lattice, stored as one
// value per leaf in flat order. Standard instances are nonnegative; the
// signed factory exists for the good/bad splits of the endpoint argument,
// whose bad parts are mean-zero and genuinely signed.
template <Scalar S>
class GridFunction {
 public:
  GridFunction() = default;

  static GridFunction from_leaves(RootCube root, std::vector<S> leaves) {
    GridFunction f(std::move(root), std::move(leaves));
    for (const auto& v : f.leaves_)
      if (v < S(0)) throw Error("GridFunction: negative leaf value");
    return f;
  }

  static GridFunction signed_from_leaves(RootCube root, std::vector<S> leaves) {
    GridFunction f(std::move(root), std::move(leaves));
    f.signed_ok_ = true;
    return f;
  }

  static GridFunction constant(const RootCube& root, S value) {
    return from_leaves(root,
                       std::vector<S>(root.leaf_count(), std::move(value)));
  }

  static GridFunction zero(const RootCube& root) {
    return constant(root, S(0));
  }

  static GridFunction indicator(const RootCube& root, const DyadicCube& q) {
    require_in_lattice(root, q);
    std::vector<S> v(root.leaf_count(), S(0));
    for_each_leaf_under(root, q, [&](std::uint64_t flat) { v[flat] = S(1); });
    return from_leaves(root, std::move(v));
  }

  const RootCube& root() const { return root_; }
  const std::vector<S>& leaves() const { return leaves_; }
  std::vector<S>& leaves() { return leaves_; }
  const S& operator[](std::uint64_t flat) const { return leaves_[flat]; }
  S& operator[](std::uint64_t flat) { return leaves_[flat]; }
  bool allows_signed() const { return signed_ok_; }

  bool is_nonnegative() const {
    for (const auto& v : leaves_)
      if (v < S(0)) return false;
    return true;
  }

  friend bool operator==(const GridFunction& a, const GridFunction& b) {
    return a.root_ == b.root_ && a.leaves_ == b.leaves_;
  }

 private:
  GridFunction(RootCube root, std::vector<S> leaves)
      : root_(std::move(root)), leaves_(std::move(leaves)) {
    if (leaves_.size() != root_.leaf_count())
      throw Error("GridFunction: leaf vector size does not match the lattice");
  }

  RootCube root_;
  std::vector<S> leaves_;
  bool signed_ok_ = false;
};

// <f>_Q as the plain mean of the leaf values under Q. Leaves all have the
// same measure, so the measure weights cancel and the mean is exact.
template <Scalar S>
S average(const GridFunction<S>& f, const DyadicCube& q) {
  require_in_lattice(f.root(), q);
  S sum(0);
  for_each_leaf_under(f.root(), q,
                      [&](std::uint64_t flat) { sum += f[flat]; });
  const long up = f.root().depth - q.level;
  return S(sum * from_rat<S>(pow2(-up * f.root().dim)));
}

// Subtree sums of the leaf values for every lattice cube, built bottom-up in
// one pass. Turns averages over arbitrary cubes into O(1) lookups; the shift
// evaluators and the selection recursion both lean on this.
template <Scalar S>
class CubeIntegrals {
 public:
  explicit CubeIntegrals(const GridFunction<S>& f) : root_(f.root()) {
    sums_.resize(static_cast<std::size_t>(root_.depth) + 1);
    sums_[static_cast<std::size_t>(root_.depth)] = f.leaves();
    for (int lev = root_.depth - 1; lev >= 0; --lev) {
      const auto& fine = sums_[static_cast<std::size_t>(lev + 1)];
      auto& coarse = sums_[static_cast<std::size_t>(lev)];
      coarse.assign(std::size_t{1} << (std::size_t(root_.dim) * lev), S(0));
      for (std::uint64_t flat = 0; flat < fine.size(); ++flat)
        coarse[coarse_index(lev + 1, flat)] += fine[flat];
    }
  }

  const RootCube& root() const { return root_; }

  const S& leaf_sum(const DyadicCube& q) const {
    return sums_[static_cast<std::size_t>(q.level)]
                [flatten(root_.dim, q.level, q.index)];
  }

  S avg(const DyadicCube& q) const {
    const long up = root_.depth - q.level;
    return S(leaf_sum(q) * from_rat<S>(pow2(-up * root_.dim)));
  }

  // Integral against Lebesgue measure (leaf sum times one leaf's measure).
  S integral(const DyadicCube& q) const {
    return S(leaf_sum(q) *
             from_rat<S>(cube_measure(root_, root_.depth)));
  }

 private:
  // Flat index of the parent of the cube with flat index `flat` at `level`.
  std::uint64_t coarse_index(int level, std::uint64_t flat) const {
    std::uint64_t out = 0;
    const std::uint64_t mask = (std::uint64_t{1} << level) - 1;
    for (int i = 0; i < root_.dim; ++i) {
      const int shift = level * (root_.dim - 1 - i);
      const std::uint64_t axis = (flat >> shift) & mask;
      out = (out << (level - 1)) | (axis >> 1);
    }
    return out;
  }

  RootCube root_;
  std::vector<std::vector<S>> sums_; // per level, flat order
};

template <Scalar S>
S l1_norm(const GridFunction<S>& f) {
  S sum(0);
  for (const auto& v : f.leaves()) sum += v;
  return S(sum * from_rat<S>(cube_measure(f.root(), f.root().depth)));
}

// Integral of f^p for integer p >= 1 (exact in rational mode).
template <Scalar S>
S lp_integral(const GridFunction<S>& f, unsigned long p) {
  S sum(0);
  for (const auto& v : f.leaves()) {
    S t(1);
    for (unsigned long i = 0; i < p; ++i) t *= v;
    sum += t;
  }
  return S(sum * from_rat<S>(cube_measure(f.root(), f.root().depth)));
}

template <Scalar S>
GridFunction<double> to_double_function(const GridFunction<S>& f) {
  std::vector<double> v;
  v.reserve(f.leaves().size());
  for (const auto& x : f.leaves()) v.push_back(as_double(x));
  return GridFunction<double>::signed_from_leaves(f.root(), std::move(v));
}

} // namespace shiftdom
