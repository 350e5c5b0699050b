#pragma once

#include "shiftdom/carleson.hpp"
#include "shiftdom/dyadic.hpp"
#include "shiftdom/grid_function.hpp"
#include "shiftdom/scalar.hpp"
#include "shiftdom/sparse_family.hpp"

#include <map>
#include <vector>

namespace shiftdom {

// Product of the factor averages over one cube, O(1) per query after a
// one-time subtree-sum pass per factor. Every operator evaluation and the
// whole selection recursion funnel through this.
template <Scalar S>
class AverageProduct {
 public:
  explicit AverageProduct(const std::vector<GridFunction<S>>& fs) {
    if (fs.empty()) throw ConfigError("AverageProduct: no factors");
    for (std::size_t i = 1; i < fs.size(); ++i)
      if (!(fs[i].root() == fs[0].root()))
        throw GridMismatch("AverageProduct: factors on different lattices");
    pyramids_.reserve(fs.size());
    for (const auto& f : fs) pyramids_.emplace_back(f);
  }

  const RootCube& root() const { return pyramids_.front().root(); }
  int factors() const { return static_cast<int>(pyramids_.size()); }

  S operator()(const DyadicCube& q) const {
    S prod(1);
    for (const auto& p : pyramids_) prod = S(prod * p.avg(q));
    return prod;
  }

 private:
  std::vector<CubeIntegrals<S>> pyramids_;
};

// Leafwise values of sum_Q c_Q * prod_i <f_i>_{A(Q)} * 1_Q, where A(Q) is the
// caller's averaging cube (the m-th parent for a shift, Q itself for a sparse
// operator).
template <Scalar S, class AvgCubeFn>
std::vector<S> eval_terms(const AverageProduct<S>& avg,
                          const std::map<DyadicCube, S>& coeffs,
                          AvgCubeFn avg_cube) {
  const RootCube& root = avg.root();
  std::vector<S> out(root.leaf_count(), S(0));
  for (const auto& [q, c] : coeffs) {
    require_in_lattice(root, q);
    const S term(c * avg(avg_cube(q)));
    if (term == S(0)) continue;
    for_each_leaf_under(root, q,
                        [&](std::uint64_t flat) { out[flat] += term; });
  }
  return out;
}

// A k-linear positive shift of complexity m on a truncated lattice:
//   x -> sum_Q alpha_Q * prod_i <f_i>_{Q^(m)} * 1_Q(x).
// Coefficients need m generations of headroom above their cube.
template <Scalar S>
struct ShiftInstance {
  RootCube root;
  int m = 1;
  CoefficientSequence<S> alpha;
  std::vector<GridFunction<S>> fs;

  int k() const { return static_cast<int>(fs.size()); }

  static ShiftInstance make(RootCube root, int m, CoefficientSequence<S> alpha,
                            std::vector<GridFunction<S>> fs) {
    if (m < 0) throw ConfigError("ShiftInstance: negative complexity");
    if (fs.empty()) throw ConfigError("ShiftInstance: no input functions");
    if (!(alpha.root == root))
      throw GridMismatch("ShiftInstance: coefficients on a different lattice");
    for (const auto& f : fs)
      if (!(f.root() == root))
        throw GridMismatch("ShiftInstance: function on a different lattice");
    for (const auto& [q, a] : alpha.values)
      if (q.level < m)
        throw SupportLevelError(
            "ShiftInstance: coefficient at level " + std::to_string(q.level) +
            " lacks " + std::to_string(m) + " generations of headroom");
    return ShiftInstance{std::move(root), m, std::move(alpha), std::move(fs)};
  }
};

// Output is built signed: positivity of the operator on nonnegative inputs is
// a fact the tests assert, not an input-validation rule, and the shift is
// also applied to the genuinely signed pieces of the endpoint splits.
template <Scalar S>
GridFunction<S> eval_shift(const ShiftInstance<S>& inst) {
  const AverageProduct<S> avg(inst.fs);
  auto leaves = eval_terms(avg, inst.alpha.values, [&](const DyadicCube& q) {
    return parent(q, inst.m);
  });
  return GridFunction<S>::signed_from_leaves(inst.root, std::move(leaves));
}

// The sparse comparison operator: unit coefficients, averages over the cubes
// themselves.
template <Scalar S>
GridFunction<S> eval_sparse_op(const SparseFamily& fam,
                               const std::vector<GridFunction<S>>& fs) {
  const AverageProduct<S> avg(fs);
  if (!(avg.root() == fam.root))
    throw GridMismatch("eval_sparse_op: family on a different lattice");
  std::map<DyadicCube, S> coeffs;
  for (const auto& q : fam.cubes) coeffs.emplace(q, S(1));
  auto leaves =
      eval_terms(avg, coeffs, [](const DyadicCube& q) { return q; });
  return GridFunction<S>::signed_from_leaves(fam.root, std::move(leaves));
}

// Pointwise sup over lattice cubes containing x of prod_i <f_i>_Q. The sup
// runs over the truncated lattice only, which is the right comparison object
// for everything else in the library.
template <Scalar S>
GridFunction<S> multilinear_maximal(const std::vector<GridFunction<S>>& fs) {
  const AverageProduct<S> avg(fs);
  const RootCube& root = avg.root();
  std::vector<S> out(root.leaf_count(), S(0));
  for (std::uint64_t flat = 0; flat < out.size(); ++flat) {
    const DyadicCube leaf = leaf_from_flat(root, flat);
    S best(0);
    for (int level = 0; level <= root.depth; ++level) {
      const S v = avg(ancestor_at_level(leaf, level));
      if (v > best) best = v;
    }
    out[flat] = best;
  }
  return GridFunction<S>::from_leaves(root, std::move(out));
}

// One piece of the complexity reduction: coefficients hanging at levels
// base.level + j*m for j >= 1, handled as a unit-stride problem on the
// relabeled subtree of the base cube.
template <Scalar S>
struct SliceInstance {
  DyadicCube base;
  std::map<DyadicCube, S> alpha; // absolute cubes
};

// Split a complexity-m shift by residue: a support cube at level L >= m lands
// in the slice based at its ancestor at level L mod m. Each slice support
// level then sits a positive multiple of m below its base, so the m-th parent
// of every slice cube stays inside the base's subtree.
template <Scalar S>
std::map<DyadicCube, SliceInstance<S>> slice_decompose(
    const ShiftInstance<S>& inst) {
  if (inst.m < 1)
    throw ConfigError("slice_decompose: needs positive complexity");
  std::map<DyadicCube, SliceInstance<S>> slices;
  for (const auto& [q, a] : inst.alpha.values) {
    const DyadicCube base = ancestor_at_level(q, q.level % inst.m);
    auto [it, fresh] = slices.try_emplace(base);
    if (fresh) it->second.base = base;
    it->second.alpha.emplace(q, a);
  }
  return slices;
}

} // namespace shiftdom
