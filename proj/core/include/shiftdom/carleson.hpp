#pragma once

#include "shiftdom/dyadic.hpp"
#include "shiftdom/grid_function.hpp"
#include "shiftdom/scalar.hpp"

#include <map>

namespace shiftdom {

// Nonnegative coefficients indexed by lattice cubes; only nonzero entries are
// stored. The Carleson norm is cached eagerly because nearly every consumer
// asks for it.
template <Scalar S>
struct CoefficientSequence {
  RootCube root;
  std::map<DyadicCube, S> values;
  S norm{};

  static CoefficientSequence make(RootCube root, std::map<DyadicCube, S> entries);
};

// Core of the norm computation, shared between base and shifted grids.
//
// The norm is sup over cubes P of 2^(P.level*d) * sum_{Q <= P} a_Q * 2^(-Q.level*d)
// (relative measures; the root's measure cancels in the ratio). Only
// ancestors of support cubes can attain the sup: moving P up past the last
// mass keeps the sum fixed while the 2^(level*d) factor shrinks. So subtree
// sums are pushed up through the ancestor closure, bucketed by level, taking
// the max ratio along the way. Levels may be negative (shifted grids).
template <Scalar S, class Cube, class ParentFn>
S carleson_norm_core(int dim, const std::map<Cube, S>& alpha, int root_level,
                     ParentFn parent_of) {
  S best(0);
  if (alpha.empty()) return best;
  std::map<int, std::map<Cube, S>, std::greater<int>> by_level;
  for (const auto& [q, a] : alpha) {
    if (a == S(0)) continue;
    by_level[q.level][q] +=
        S(a * from_rat<S>(relative_measure(dim, q.level)));
  }
  while (!by_level.empty()) {
    auto node = by_level.extract(by_level.begin());
    const int level = node.key();
    for (auto& [q, sum] : node.mapped()) {
      const S ratio(sum * from_rat<S>(pow2(static_cast<long>(level) * dim)));
      if (ratio > best) best = ratio;
      if (level > root_level) by_level[level - 1][parent_of(q)] += sum;
    }
  }
  return best;
}

template <Scalar S>
S carleson_norm_map(int dim, const std::map<DyadicCube, S>& alpha,
                    int root_level = 0) {
  return carleson_norm_core<S>(dim, alpha, root_level,
                               [](const DyadicCube& q) { return parent(q, 1); });
}

template <Scalar S>
S carleson_norm(const CoefficientSequence<S>& seq) {
  return seq.norm;
}

// Norm of the restriction to the lattice below p (p as the new root).
template <Scalar S>
S carleson_norm_below(const CoefficientSequence<S>& seq, const DyadicCube& p) {
  std::map<DyadicCube, S> restricted;
  for (const auto& [q, a] : seq.values)
    if (cube_contains(p, q)) restricted.emplace(q, a);
  return carleson_norm_map<S>(seq.root.dim, restricted, p.level);
}

template <Scalar S>
CoefficientSequence<S> CoefficientSequence<S>::make(
    RootCube root, std::map<DyadicCube, S> entries) {
  for (auto it = entries.begin(); it != entries.end();) {
    require_in_lattice(root, it->first);
    if (it->second < S(0))
      throw Error("CoefficientSequence: negative coefficient");
    if (it->second == S(0))
      it = entries.erase(it);
    else
      ++it;
  }
  CoefficientSequence<S> seq;
  seq.root = std::move(root);
  seq.values = std::move(entries);
  seq.norm = carleson_norm_map<S>(seq.root.dim, seq.values);
  return seq;
}

} // namespace shiftdom
