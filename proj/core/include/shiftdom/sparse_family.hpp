#pragma once

#include "shiftdom/carleson.hpp"
#include "shiftdom/dyadic.hpp"

#include <map>
#include <optional>
#include <set>
#include <vector>

namespace shiftdom {

struct SparseFamily {
  RootCube root;
  std::set<DyadicCube> cubes;
  Rat eta{1, 2}; // claimed sparsity parameter, in (0, 1]

  static SparseFamily make(RootCube root, std::set<DyadicCube> cubes,
                           Rat eta = Rat(1, 2));
};

// Canonical witnesses: E(Q) = Q minus the union of the maximal strict
// family subcubes of Q. The check demands |E(Q)| >= eta * |Q| for every Q.
// Witnesses built this way are pairwise disjoint by construction, which is
// exactly why this check is the strong ("canonical") one.
struct CanonicalReport {
  bool pass = true;
  Rat min_residual_fraction = 1; // min over Q of |E(Q)| / |Q|
  std::optional<DyadicCube> worst;
  // Witness sets as leaf flat indices; filled only when requested.
  std::map<DyadicCube, std::vector<std::uint64_t>> witnesses;
};

CanonicalReport check_sparse_canonical(const RootCube& root,
                                       const std::set<DyadicCube>& cubes,
                                       const Rat& eta,
                                       bool with_witnesses = false);

// Packing form: sum_{R <= Q, R in S} |R| <= (1/eta) * |Q| for every Q in S.
// Strictly weaker than the canonical check (e.g. {P0, both halves} packs at
// eta = 1/2 but has an empty canonical witness at P0).
struct PackingReport {
  bool pass = true;
  Rat packing_constant = 0; // max over Q of the subtree sum ratio
  std::optional<DyadicCube> worst;
};

PackingReport check_sparse_packing(const RootCube& root,
                                   const std::set<DyadicCube>& cubes,
                                   const Rat& eta);

// Grid-agnostic cores for families living in a shifted grid: only measures
// and containment are needed, so the cube type is generic.
template <class Cube, class ContainsFn>
CanonicalReport check_canonical_core(int dim, const std::set<Cube>& cubes,
                                     const Rat& eta, ContainsFn contains,
                                     std::optional<Cube>* worst_out = nullptr) {
  CanonicalReport rep;
  for (const auto& q : cubes) {
    // Maximal strict subcubes: walk candidates largest-first (the set is
    // ordered by level) and keep those not inside an already kept one.
    std::vector<const Cube*> maximal;
    Rat covered = 0;
    for (const auto& r : cubes) {
      if (r == q || !contains(q, r)) continue;
      bool inside_kept = false;
      for (const Cube* m : maximal)
        if (contains(*m, r)) {
          inside_kept = true;
          break;
        }
      if (inside_kept) continue;
      maximal.push_back(&r);
      covered += relative_measure(dim, r.level);
    }
    const Rat q_meas = relative_measure(dim, q.level);
    const Rat residual = (q_meas - covered) / q_meas;
    if (residual < rep.min_residual_fraction) {
      rep.min_residual_fraction = residual;
      if (worst_out) *worst_out = q;
    }
    if (residual < eta) rep.pass = false;
  }
  return rep;
}

template <class Cube, class ContainsFn>
PackingReport check_packing_core(int dim, const std::set<Cube>& cubes,
                                 const Rat& eta, ContainsFn contains,
                                 std::optional<Cube>* worst_out = nullptr) {
  PackingReport rep;
  for (const auto& q : cubes) {
    Rat sum = 0;
    for (const auto& r : cubes)
      if (contains(q, r)) sum += relative_measure(dim, r.level);
    const Rat ratio = sum / relative_measure(dim, q.level);
    if (ratio > rep.packing_constant) {
      rep.packing_constant = ratio;
      if (worst_out) *worst_out = q;
    }
  }
  rep.pass = cubes.empty() || rep.packing_constant * eta <= 1;
  return rep;
}

// Indicator coefficients of a family; for an eta-sparse family the packing
// bound caps the Carleson norm by 1/eta.
template <Scalar S>
CoefficientSequence<S> indicator_sequence(const SparseFamily& fam) {
  std::map<DyadicCube, S> values;
  for (const auto& q : fam.cubes) values.emplace(q, S(1));
  return CoefficientSequence<S>::make(fam.root, std::move(values));
}

// Union of families living under pairwise disjoint roots. Disjointness keeps
// every canonical witness valid, so the union is sparse at the weakest of the
// input parameters.
SparseFamily union_rooted(const RootCube& root,
                          const std::map<DyadicCube, SparseFamily>& parts);

} // namespace shiftdom
