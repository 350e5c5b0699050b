#include "shiftdom/sparse_family.hpp"

#include <algorithm>
#include <iterator>

namespace shiftdom {

SparseFamily SparseFamily::make(RootCube root, std::set<DyadicCube> cubes,
                                Rat eta) {
  if (sgn(eta) <= 0 || eta > 1)
    throw Error("SparseFamily: eta must lie in (0, 1]");
  for (const auto& q : cubes) require_in_lattice(root, q);
  SparseFamily f;
  f.root = std::move(root);
  f.cubes = std::move(cubes);
  f.eta = std::move(eta);
  return f;
}

CanonicalReport check_sparse_canonical(const RootCube& root,
                                       const std::set<DyadicCube>& cubes,
                                       const Rat& eta, bool with_witnesses) {
  for (const auto& q : cubes) require_in_lattice(root, q);
  std::optional<DyadicCube> worst;
  CanonicalReport rep = check_canonical_core<DyadicCube>(
      root.dim, cubes, eta,
      [](const DyadicCube& a, const DyadicCube& b) {
        return cube_contains(a, b);
      },
      &worst);
  rep.worst = worst;
  if (!with_witnesses) return rep;

  // Witness leaves: leaves of Q not under any strict family subcube. Marking
  // descendants directly is O(family * leaves) and fine at desk scale.
  std::vector<char> blocked(root.leaf_count());
  for (const auto& q : cubes) {
    std::fill(blocked.begin(), blocked.end(), 0);
    for (const auto& r : cubes) {
      if (r == q || !cube_contains(q, r)) continue;
      for_each_leaf_under(root, r,
                          [&](std::uint64_t flat) { blocked[flat] = 1; });
    }
    auto& wit = rep.witnesses[q];
    for_each_leaf_under(root, q, [&](std::uint64_t flat) {
      if (!blocked[flat]) wit.push_back(flat);
    });
  }
  return rep;
}

PackingReport check_sparse_packing(const RootCube& root,
                                   const std::set<DyadicCube>& cubes,
                                   const Rat& eta) {
  for (const auto& q : cubes) require_in_lattice(root, q);
  std::optional<DyadicCube> worst;
  PackingReport rep = check_packing_core<DyadicCube>(
      root.dim, cubes, eta,
      [](const DyadicCube& a, const DyadicCube& b) {
        return cube_contains(a, b);
      },
      &worst);
  rep.worst = worst;
  return rep;
}

SparseFamily union_rooted(const RootCube& root,
                          const std::map<DyadicCube, SparseFamily>& parts) {
  std::set<DyadicCube> merged;
  Rat eta = 1;
  for (auto it = parts.begin(); it != parts.end(); ++it) {
    require_in_lattice(root, it->first);
    for (auto jt = std::next(it); jt != parts.end(); ++jt)
      if (!cubes_disjoint(it->first, jt->first))
        throw OverlappingRoots("union_rooted: roots intersect");
    for (const auto& q : it->second.cubes) {
      if (!cube_contains(it->first, q))
        throw Error("union_rooted: family cube outside its root");
      merged.insert(q);
    }
    if (it->second.eta < eta) eta = it->second.eta;
  }
  if (parts.empty()) eta = Rat(1, 2);
  return SparseFamily::make(root, std::move(merged), eta);
}

} // namespace shiftdom
