#pragma once

#include "shiftdom/domination.hpp"
#include "shiftdom/shifted_grid.hpp"

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <utility>
#include <vector>

namespace shiftdom {

// One sparse family living in a shifted grid, tagged with the complexity it
// came from and its series weight.
template <Scalar S>
struct WeightedFamily {
  GridShift rho;
  int m = 0;
  S weight{};
  std::vector<ShiftedCube> cubes;
};

// How far past the deepest support level the norm walk climbs. Masses that
// merge only below this floor cannot move the sup: such a merge sits at
// least 64 levels above every support cube, so its ratio is below
// (cube count) * 2^(-64 d) times a single-cube candidate already seen.
inline constexpr int kGridNormSlack = 64;

template <Scalar S>
S shifted_carleson_norm(int dim, const std::map<ShiftedCube, S>& mu) {
  if (mu.empty()) return S(0);
  int min_level = mu.begin()->first.level;
  for (const auto& [q, w] : mu) min_level = std::min(min_level, q.level);
  return carleson_norm_core<S>(
      dim, mu, min_level - kGridNormSlack,
      [](const ShiftedCube& q) { return shifted_parent(q, 1); });
}

inline std::vector<ShiftedCube> shifted_children(const ShiftedCube& q,
                                                 int dim) {
  std::vector<ShiftedCube> out;
  for (const auto& rel : children(lattice_root(dim), dim))
    out.push_back(shifted_from_relative(q, rel));
  return out;
}

// Per-grid accumulation of weighted families into one coefficient sequence.
template <Scalar S>
struct GridSequence {
  GridShift rho;
  std::map<ShiftedCube, S> mu; // mu_Q = sum of weights of families holding Q
  S weight_sum{};
  S norm{};                    // shifted Carleson norm of mu
  bool inputs_half_sparse = true; // every input family canonical at eta = 1/2
  bool norm_bound_pass = true;    // norm <= 2 * weight_sum, given the above
};

template <Scalar S>
std::map<GridShift, GridSequence<S>> regroup_families(
    int dim, const std::vector<WeightedFamily<S>>& families) {
  std::map<GridShift, GridSequence<S>> out;
  for (const auto& fam : families) {
    if (static_cast<int>(fam.rho.thirds.size()) != dim)
      throw ConfigError("regroup: grid shift arity mismatch");
    for (int t : fam.rho.thirds)
      if (t < 0 || t > 2)
        throw ConfigError("regroup: thirds numerators must be 0, 1 or 2");
    if (fam.weight < S(0)) throw ConfigError("regroup: negative weight");

    std::set<ShiftedCube> cubes;
    for (const auto& q : fam.cubes) {
      if (!(q.rho == fam.rho))
        throw GridMismatch("regroup: cube from a different grid than its family");
      if (static_cast<int>(q.index.size()) != dim)
        throw Error("regroup: cube index arity mismatch");
      cubes.insert(q); // membership, not multiplicity
    }
    if (fam.weight == S(0)) continue;

    auto& seq = out.try_emplace(fam.rho, GridSequence<S>{}).first->second;
    seq.rho = fam.rho;
    seq.weight_sum += fam.weight;
    const auto canonical = check_canonical_core<ShiftedCube>(
        dim, cubes, Rat(1, 2), [](const ShiftedCube& a, const ShiftedCube& b) {
          return shifted_contains(a, b);
        });
    if (!canonical.pass) seq.inputs_half_sparse = false;
    for (const auto& q : cubes) seq.mu[q] += fam.weight;
  }
  for (auto& [rho, seq] : out) {
    seq.norm = shifted_carleson_norm<S>(dim, seq.mu);
    if (seq.inputs_half_sparse && seq.norm > S(S(2) * seq.weight_sum))
      seq.norm_bound_pass = false;
  }
  return out;
}

// Exact cell-grid box of a shifted cube along one axis, in units of
// side/(3*2^depth) from the root corner. Integral whenever level <= depth:
// the corner offset is 2^(-level)(k + sign*t/3)*side, which is
// (3k + sign*t)*2^(depth-level) cells.
inline std::pair<Int, Int> cell_interval(const RootCube& root,
                                         const ShiftedCube& q, int axis) {
  const int up = root.depth - q.level;
  const int sign = level_sign(q.level);
  const Int lo((Int(q.index[axis]) * 3 + sign * q.rho.thirds[axis]) <<
               static_cast<unsigned long>(up));
  return {lo, Int(lo + (Int(3) << static_cast<unsigned long>(up)))};
}

// Zero-extended products of averages over shifted cubes, answered from
// per-factor prefix sums on the common cell refinement of all 3^d grids.
// Functions live on the root cube and are extended by zero off it; averages
// still divide by the full cube measure.
template <Scalar S>
class ShiftedAverages {
 public:
  explicit ShiftedAverages(const std::vector<GridFunction<S>>& fs)
      : root_(check_roots(fs)) {
    n_ = 3ll << root_.depth;
    std::uint64_t size = 1;
    for (int a = 0; a < root_.dim; ++a) {
      size *= static_cast<std::uint64_t>(n_) + 1;
      if (size > (1ull << 24))
        throw ConfigError("cell refinement too large; lower the depth");
    }
    // Leaf-major fill at offset one, then one running-sum sweep per axis
    // turns P into strict-corner prefix sums: P[x] = sum of cells below x.
    std::vector<std::uint64_t> leaf_stride(root_.dim, 1);
    for (int a = root_.dim - 2; a >= 0; --a)
      leaf_stride[a] = leaf_stride[a + 1] << root_.depth;
    std::vector<std::uint64_t> pre_stride(root_.dim, 1);
    for (int a = root_.dim - 2; a >= 0; --a)
      pre_stride[a] = pre_stride[a + 1] * (static_cast<std::uint64_t>(n_) + 1);

    for (const auto& f : fs) {
      std::vector<S> pre(size, S(0));
      std::vector<long long> cell(root_.dim, 0);
      while (true) {
        std::uint64_t flat = 0, idx = 0;
        for (int a = 0; a < root_.dim; ++a) {
          flat += static_cast<std::uint64_t>(cell[a] / 3) * leaf_stride[a];
          idx += static_cast<std::uint64_t>(cell[a] + 1) * pre_stride[a];
        }
        pre[idx] = f[flat];
        int a = root_.dim - 1;
        for (; a >= 0; --a) {
          if (++cell[a] < n_) break;
          cell[a] = 0;
        }
        if (a < 0) break;
      }
      for (int a = 0; a < root_.dim; ++a) {
        for (std::uint64_t idx = 0; idx < size; ++idx) {
          const std::uint64_t coord = (idx / pre_stride[a]) %
                                      (static_cast<std::uint64_t>(n_) + 1);
          if (coord >= 1) pre[idx] += pre[idx - pre_stride[a]];
        }
      }
      prefix_.push_back(std::move(pre));
    }
  }

  const RootCube& root() const { return root_; }
  int factors() const { return static_cast<int>(prefix_.size()); }

  // Product over factors of the average of f_i over q (zero extension).
  S operator()(const ShiftedCube& q) const {
    if (static_cast<int>(q.index.size()) != root_.dim)
      throw Error("shifted average: cube arity mismatch");
    if (q.level > root_.depth)
      throw SupportLevelError("shifted average: cube below the cell grid");
    std::vector<long long> lo(root_.dim), hi(root_.dim);
    for (int a = 0; a < root_.dim; ++a) {
      auto [l, h] = cell_interval(root_, q, a);
      lo[a] = clamp_cell(l);
      hi[a] = clamp_cell(h);
    }
    // cells in the full cube: (3*2^(depth-level))^dim
    const Rat cube_cells =
        ipow(Rat(Rat(3) * pow2(root_.depth - q.level)),
             static_cast<unsigned long>(root_.dim));
    const S scale = from_rat<S>(Rat(1) / cube_cells);
    S prod(1);
    for (const auto& pre : prefix_) prod = S(prod * S(box_sum(pre, lo, hi) * scale));
    return prod;
  }

 private:
  static const RootCube& check_roots(const std::vector<GridFunction<S>>& fs) {
    if (fs.empty()) throw Error("shifted averages need at least one function");
    for (const auto& f : fs)
      if (!(f.root() == fs.front().root()))
        throw GridMismatch("shifted averages: functions on different lattices");
    return fs.front().root();
  }

  long long clamp_cell(const Int& v) const {
    if (v < 0) return 0;
    if (v > static_cast<long>(n_)) return n_;
    return v.get_si();
  }

  S box_sum(const std::vector<S>& pre, const std::vector<long long>& lo,
            const std::vector<long long>& hi) const {
    S total(0);
    for (unsigned mask = 0; mask < (1u << root_.dim); ++mask) {
      std::uint64_t idx = 0;
      int bits = 0;
      for (int a = 0; a < root_.dim; ++a) {
        const bool take_lo = (mask >> a) & 1;
        if (take_lo) ++bits;
        idx = idx * (static_cast<std::uint64_t>(n_) + 1) +
              static_cast<std::uint64_t>(take_lo ? lo[a] : hi[a]);
      }
      if (bits % 2)
        total -= pre[idx];
      else
        total += pre[idx];
    }
    return total;
  }

  RootCube root_;
  long long n_ = 0; // cells per axis
  std::vector<std::vector<S>> prefix_;
};

// Domination of one grid's regrouped operator, via the child relabeling and
// the stride-1 selection engine run per ancestor-connected component.
template <Scalar S>
struct GridDomination {
  GridShift rho;
  std::map<ShiftedCube, S> mu;
  S weight_sum{};
  S mu_norm{};
  bool inputs_half_sparse = true;
  bool norm_bound_pass = true;

  S c_theory{};                    // c1 * mu_norm
  S relabel_norm{};                // norm of the child-relabeled sequence
  bool relabel_norm_equal = true;  // data, never a gate
  std::set<ShiftedCube> family;
  bool beta_bound_pass = true;
  bool canonical_pass = true;
  Rat min_residual = 1;
};

template <Scalar S>
struct AssemblyResult {
  RootCube root;
  std::vector<GridDomination<S>> grids; // ordered by grid shift

  // Comparison of sum-of-grids lhs against the certified right side (the
  // per-grid constants are already inside rhs, so pass means ratio <= 1).
  S empirical_ratio{};
  bool ratio_finite = true;
  bool pointwise_pass = true;
  bool beta_bound_pass = true;
  bool sparsity_pass = true;
  bool certified = false;
};

namespace assembly_detail {

struct CellBox {
  std::vector<long long> lo, hi;
};

template <Scalar S>
struct PaintedBox {
  CellBox box;
  S value;
};

inline CellBox to_cell_box(const RootCube& root, const ShiftedCube& q) {
  CellBox b;
  b.lo.resize(root.dim);
  b.hi.resize(root.dim);
  const Int cap = Int(1) << 61;
  for (int a = 0; a < root.dim; ++a) {
    auto [l, h] = cell_interval(root, q, a);
    if (l < -cap || h > cap)
      throw ConfigError("assembly: cube too far from the root to compare");
    b.lo[a] = l.get_si();
    b.hi[a] = h.get_si();
  }
  return b;
}

} // namespace assembly_detail

// End-to-end assembly: regroup (rho, m)-families, dominate each grid's
// operator by a single sparse family, then verify the summed bound
//   sum_rho sum_Q mu_Q prod<f_i>_Q 1_Q  <=  sum_rho c1*|mu^rho| * A0_{S_rho}
// exactly on the common cell refinement, box-compressed so only cube
// boundaries matter.
template <Scalar S>
AssemblyResult<S> assemble_domination(
    const std::vector<WeightedFamily<S>>& families,
    const std::vector<GridFunction<S>>& fs) {
  using assembly_detail::CellBox;
  using assembly_detail::PaintedBox;
  using assembly_detail::to_cell_box;

  const ShiftedAverages<S> avg(fs);
  const RootCube& root = avg.root();
  for (const auto& f : fs)
    if (!f.is_nonnegative())
      throw Error("assembly: inputs must be nonnegative");
  const auto consts = SelectionConstants::make(avg.factors(), root.dim);

  AssemblyResult<S> res;
  res.root = root;

  std::vector<PaintedBox<S>> lhs_boxes, rhs_boxes;
  for (auto& [rho, seq] : regroup_families<S>(root.dim, families)) {
    GridDomination<S> gd;
    gd.rho = rho;
    gd.mu = std::move(seq.mu);
    gd.weight_sum = seq.weight_sum;
    gd.mu_norm = seq.norm;
    gd.inputs_half_sparse = seq.inputs_half_sparse;
    gd.norm_bound_pass = seq.norm_bound_pass;
    gd.c_theory = S(from_rat<S>(consts.c1) * gd.mu_norm);

    std::map<ShiftedCube, S> beta;
    for (const auto& [q, w] : gd.mu) {
      if (q.level > root.depth - 1)
        throw SupportLevelError(
            "assembly: family cube has no child level inside the cell grid");
      const S term(w * avg(q));
      if (term != S(0)) lhs_boxes.push_back({to_cell_box(root, q), term});
      for (const auto& c : shifted_children(q, root.dim)) beta[c] += w;
    }
    gd.relabel_norm = shifted_carleson_norm<S>(root.dim, beta);
    gd.relabel_norm_equal = gd.relabel_norm == gd.mu_norm;

    // Ancestor-connected components: chains that have not merged within the
    // slack never affect each other's selection, and per-component constants
    // c1*|beta_c| are all covered by the grid-level c_theory.
    std::map<ShiftedCube, std::vector<ShiftedCube>> components;
    int min_level = 0;
    for (const auto& [q, w] : beta) min_level = std::min(min_level, q.level);
    const int floor_level = min_level - kGridNormSlack;
    for (const auto& [q, w] : beta)
      components[shifted_ancestor_at_level(q, floor_level)].push_back(q);

    for (const auto& [anchor, members] : components) {
      const ShiftedCube base = common_shifted_ancestor(members, floor_level);
      std::map<DyadicCube, S> rel;
      for (const auto& q : members)
        rel.emplace(shifted_to_relative(base, q), beta.at(q));
      const S comp_norm = carleson_norm_map<S>(root.dim, rel);
      for (auto& [q, a] : rel) a = S(a / comp_norm);

      const auto avg_cb = [&](const DyadicCube& r) {
        return avg(shifted_from_relative(base, r));
      };
      const auto trace = run_selection<S>(root.dim, 1, rel, consts, avg_cb);
      const auto cert =
          verify_beta_bound<S>(1, rel, trace, avg_cb);
      if (!cert.pass) gd.beta_bound_pass = false;

      const auto canonical = check_canonical_core<DyadicCube>(
          root.dim, trace.selected, Rat(1, 2),
          [](const DyadicCube& a, const DyadicCube& b) {
            return cube_contains(a, b);
          });
      if (!canonical.pass) gd.canonical_pass = false;
      gd.min_residual =
          std::min(gd.min_residual, canonical.min_residual_fraction);
      for (const auto& q : trace.selected)
        gd.family.insert(shifted_from_relative(base, q));
    }

    for (const auto& q : gd.family) {
      const S term(gd.c_theory * avg(q));
      if (term != S(0)) rhs_boxes.push_back({to_cell_box(root, q), term});
    }
    if (!gd.beta_bound_pass) res.beta_bound_pass = false;
    if (!gd.canonical_pass) res.sparsity_pass = false;
    res.grids.push_back(std::move(gd));
  }

  // Coordinate-compressed comparison: within each box of the arrangement of
  // all painted cubes both sides are constant.
  std::vector<std::vector<long long>> coords(root.dim);
  const auto gather = [&](const std::vector<PaintedBox<S>>& boxes) {
    for (const auto& pb : boxes)
      for (int a = 0; a < root.dim; ++a) {
        coords[a].push_back(pb.box.lo[a]);
        coords[a].push_back(pb.box.hi[a]);
      }
  };
  gather(lhs_boxes);
  gather(rhs_boxes);

  std::uint64_t total = 1;
  std::vector<std::uint64_t> stride(root.dim, 1);
  std::vector<std::size_t> cells(root.dim, 0);
  for (int a = 0; a < root.dim; ++a) {
    auto& cs = coords[a];
    std::sort(cs.begin(), cs.end());
    cs.erase(std::unique(cs.begin(), cs.end()), cs.end());
    cells[a] = cs.empty() ? 0 : cs.size() - 1;
  }
  for (int a = root.dim - 1; a >= 0; --a) {
    stride[a] = total;
    total *= cells[a] + 1;
    if (total > (1ull << 24))
      throw ConfigError("assembly: comparison arrangement too large");
  }

  const bool anything = !lhs_boxes.empty() || !rhs_boxes.empty();
  std::vector<S> lhs_acc(anything ? total : 0, S(0));
  std::vector<S> rhs_acc(anything ? total : 0, S(0));
  const auto paint = [&](const std::vector<PaintedBox<S>>& boxes,
                         std::vector<S>& acc) {
    for (const auto& pb : boxes) {
      std::vector<std::uint64_t> li(root.dim), hi(root.dim);
      for (int a = 0; a < root.dim; ++a) {
        const auto& cs = coords[a];
        li[a] = static_cast<std::uint64_t>(
            std::lower_bound(cs.begin(), cs.end(), pb.box.lo[a]) - cs.begin());
        hi[a] = static_cast<std::uint64_t>(
            std::lower_bound(cs.begin(), cs.end(), pb.box.hi[a]) - cs.begin());
      }
      for (unsigned mask = 0; mask < (1u << root.dim); ++mask) {
        std::uint64_t idx = 0;
        int bits = 0;
        for (int a = 0; a < root.dim; ++a) {
          const bool top = (mask >> a) & 1;
          if (top) ++bits;
          idx += (top ? hi[a] : li[a]) * stride[a];
        }
        if (bits % 2)
          acc[idx] -= pb.value;
        else
          acc[idx] += pb.value;
      }
    }
    for (int a = 0; a < root.dim; ++a)
      for (std::uint64_t idx = 0; idx < acc.size(); ++idx) {
        const std::uint64_t coord = (idx / stride[a]) % (cells[a] + 1);
        if (coord >= 1) acc[idx] += acc[idx - stride[a]];
      }
  };
  if (anything) {
    paint(lhs_boxes, lhs_acc);
    paint(rhs_boxes, rhs_acc);

    std::vector<std::uint64_t> cell(root.dim, 0);
    bool more = true;
    for (int a = 0; a < root.dim; ++a) more = more && cells[a] > 0;
    while (more) {
      std::uint64_t idx = 0;
      for (int a = 0; a < root.dim; ++a) idx += cell[a] * stride[a];
      const S& l = lhs_acc[idx];
      const S& r = rhs_acc[idx];
      if (r == S(0)) {
        if (l != S(0)) {
          res.ratio_finite = false;
          res.pointwise_pass = false;
        }
      } else {
        const S q(l / r);
        if (q > res.empirical_ratio) res.empirical_ratio = q;
        if (l > r) res.pointwise_pass = false;
      }
      int a = root.dim - 1;
      for (; a >= 0; --a) {
        if (++cell[a] < cells[a]) break;
        cell[a] = 0;
      }
      if (a < 0) break;
    }
  }

  res.certified =
      res.pointwise_pass && res.beta_bound_pass && res.sparsity_pass;
  return res;
}

} // namespace shiftdom
