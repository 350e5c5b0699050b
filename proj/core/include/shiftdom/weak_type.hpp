#pragma once

#include "shiftdom/selection.hpp"
#include "shiftdom/shift_ops.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <vector>

namespace shiftdom {

// Relative tolerance for float-mode inequality checks in this module.
inline constexpr double kFloatTol = 1e-9;

inline bool float_leq(double lhs, double rhs) {
  return lhs <= rhs * (1.0 + kFloatTol) + 1e-15;
}

// sup over v > 0 of v * |{g >= v}|^k for a leafwise-constant g. The sup of
// lambda * |{g > lambda}|^k is attained as lambda climbs to one of the
// finitely many distinct positive values of g, where the strict level set
// becomes the closed one.
template <Scalar S>
S level_set_functional(const GridFunction<S>& f, int k) {
  std::vector<S> vals(f.leaves());
  std::sort(vals.begin(), vals.end());
  const Rat leaf = cube_measure(f.root(), f.root().depth);
  S best(0);
  // Walk distinct values from the largest down. Sorted ascending, the leaves
  // at positions i..end are exactly {g >= vals[i]}, so each run of equal
  // values contributes through its first position.
  for (std::size_t i = vals.size(); i-- > 0;) {
    if (vals[i] <= S(0)) break;
    if (i > 0 && vals[i] == vals[i - 1]) continue;
    S measure(from_rat<S>(leaf * Rat(static_cast<unsigned long>(vals.size() - i))));
    S t(1);
    for (int j = 0; j < k; ++j) t *= measure;
    const S cand(vals[i] * t);
    if (cand > best) best = cand;
  }
  return best;
}

template <Scalar S>
struct WeakTypeReport {
  S value{};
  S bound{};
  bool pass = false;
};

// Endpoint functional for the shift itself: the measured sup against the
// c_w * norm(alpha) * prod ||f_i||_1 budget.
template <Scalar S>
WeakTypeReport<S> weak_type_functional(const ShiftInstance<S>& inst) {
  WeakTypeReport<S> rep;
  rep.value = level_set_functional(eval_shift(inst), inst.k());
  const auto consts = SelectionConstants::make(inst.k(), inst.root.dim);
  S prod(from_rat<S>(consts.c_w) * inst.alpha.norm);
  for (const auto& f : inst.fs) prod = S(prod * l1_norm(f));
  rep.bound = prod;
  if constexpr (exact_mode<S>)
    rep.pass = rep.value <= rep.bound;
  else
    rep.pass = float_leq(rep.value, rep.bound);
  return rep;
}

// Same functional for the lattice maximal operator, whose endpoint constant
// is 1: disjointify the maximal level sets and sum their mass.
template <Scalar S>
WeakTypeReport<S> maximal_weak_type(const std::vector<GridFunction<S>>& fs) {
  WeakTypeReport<S> rep;
  rep.value = level_set_functional(multilinear_maximal(fs), static_cast<int>(fs.size()));
  S prod(1);
  for (const auto& f : fs) prod = S(prod * l1_norm(f));
  rep.bound = prod;
  if constexpr (exact_mode<S>)
    rep.pass = rep.value <= rep.bound;
  else
    rep.pass = float_leq(rep.value, rep.bound);
  return rep;
}

struct EmbeddingReport {
  double lhs = 0;
  double rhs = 0;
  bool pass = false;
};

// Embedding of cube averages against a Carleson budget:
//   (sum_Q a_Q |Q| (prod_i <f_i>_Q)^p)^(1/p)
//     <= norm(a)^(1/p) * prod_i p_i' ||f_i||_{p_i},
// with 1/p = sum_i 1/p_i. Fractional powers force this check into floating
// point; the two calibration instances in the tests pin its normalization.
template <Scalar S>
EmbeddingReport carleson_embedding_check(const CoefficientSequence<S>& alpha,
                                         const std::vector<GridFunction<S>>& fs,
                                         const std::vector<double>& exponents) {
  if (fs.empty() || exponents.size() != fs.size())
    throw ExponentError("embedding: one exponent per function required");
  double inv_p = 0;
  for (double e : exponents) {
    if (!(e > 1.0)) throw ExponentError("embedding: exponents must exceed 1");
    inv_p += 1.0 / e;
  }
  const double p = 1.0 / inv_p;

  const AverageProduct<double> avg([&] {
    std::vector<GridFunction<double>> dfs;
    dfs.reserve(fs.size());
    for (const auto& f : fs) dfs.push_back(to_double_function(f));
    return dfs;
  }());
  // Per-cube product of averages, each factor raised by p only once at the
  // end; with unequal p_i the factors share the single exponent p.
  double sum = 0;
  for (const auto& [q, a] : alpha.values) {
    const double prod = avg(q);
    sum += as_double(a) * as_double(cube_measure(alpha.root, q.level)) *
           std::pow(prod, p);
  }
  EmbeddingReport rep;
  rep.lhs = std::pow(sum, 1.0 / p);

  double rhs = std::pow(as_double(carleson_norm(alpha)), 1.0 / p);
  for (std::size_t i = 0; i < fs.size(); ++i) {
    const double pi = exponents[i];
    const double conj = pi / (pi - 1.0);
    double integral = 0;
    const double leaf = as_double(cube_measure(fs[i].root(), fs[i].root().depth));
    for (const auto& v : fs[i].leaves())
      integral += std::pow(as_double(v), pi) * leaf;
    rhs *= conj * std::pow(integral, 1.0 / pi);
  }
  rep.rhs = rhs;
  rep.pass = float_leq(rep.lhs, rep.rhs);
  return rep;
}

// Push coefficients m levels up by averaging over the descendants they came
// from; the budget never grows, which is re-verified exactly on every call.
template <Scalar S>
CoefficientSequence<S> averaged_sequence(const CoefficientSequence<S>& alpha,
                                         int m) {
  if (m < 0) throw ConfigError("averaged_sequence: negative level shift");
  std::map<DyadicCube, S> out;
  const S scale = from_rat<S>(relative_measure(alpha.root.dim, m));
  for (const auto& [q, a] : alpha.values) {
    if (q.level < m)
      throw SupportLevelError("averaged_sequence: support above level m");
    out[parent(q, m)] += S(a * scale);
  }
  auto seq = CoefficientSequence<S>::make(alpha.root, std::move(out));
  const bool ok = exact_mode<S>
                      ? !(seq.norm > alpha.norm)
                      : float_leq(as_double(seq.norm), as_double(alpha.norm));
  if (!ok)
    throw Error("averaged_sequence: norm grew, which contradicts the "
                "subtree-sum identity");
  return seq;
}

template <Scalar S>
struct L2Report {
  double lhs = 0;     // ||shift||_2, for reporting
  double rhs = 0;     // 4 * norm(alpha) * prod ||f_i||_{2k}
  bool pass = false;
  bool exact = false; // whether pass was decided in rational arithmetic
};

// ||A^m f||_2 <= 4 * norm(alpha) * prod_i ||f_i||_{2k}. In rational mode the
// comparison is decided exactly by raising both sides to the 2k-th power:
// lhs^2 and every ||f_i||_{2k}^{2k} are finite sums of even powers.
template <Scalar S>
L2Report<S> l2_bound_check(const ShiftInstance<S>& inst) {
  const int k = inst.k();
  const auto out = eval_shift(inst);
  const S lhs_sq = lp_integral(out, 2);

  L2Report<S> rep;
  rep.lhs = std::sqrt(as_double(lhs_sq));
  double rhs = 4.0 * as_double(inst.alpha.norm);
  for (const auto& f : inst.fs)
    rhs *= std::pow(as_double(lp_integral(f, 2ul * k)),
                    1.0 / (2.0 * k));
  rep.rhs = rhs;

  if constexpr (exact_mode<S>) {
    // (lhs^2)^k <= 4^{2k} norm^{2k} prod integral(f_i^{2k})
    S left = ipow(lhs_sq, static_cast<unsigned long>(k));
    S right = ipow(Rat(4) * inst.alpha.norm, 2ul * k);
    for (const auto& f : inst.fs) right = S(right * lp_integral(f, 2ul * k));
    rep.pass = left <= right;
    rep.exact = true;
  } else {
    rep.pass = float_leq(rep.lhs, rep.rhs);
  }
  return rep;
}

// Stopping-time split at height lambda^(1/k) per slot. All comparisons avoid
// the fractional root by raising to the k-th power.
template <Scalar S>
struct CZDecomposition {
  S lambda{};
  bool degenerate = false;               // some slot's root average too big
  std::vector<bool> slot_degenerate;
  std::vector<std::set<DyadicCube>> stopping;
  std::vector<GridFunction<S>> good;
  std::vector<GridFunction<S>> bad;      // signed
};

template <Scalar S>
CZDecomposition<S> cz_decompose(const std::vector<GridFunction<S>>& fs,
                                const S& lambda) {
  if (fs.empty()) throw ConfigError("cz_decompose: no functions");
  if (!(lambda > S(0))) throw ConfigError("cz_decompose: lambda must be positive");
  const int k = static_cast<int>(fs.size());
  const RootCube& root = fs.front().root();

  CZDecomposition<S> dec;
  dec.lambda = lambda;
  dec.slot_degenerate.resize(fs.size(), false);
  dec.stopping.resize(fs.size());

  const auto exceeds = [&](const S& average) {
    S t(1);
    for (int j = 0; j < k; ++j) t *= average;
    return t > lambda;
  };

  for (std::size_t i = 0; i < fs.size(); ++i) {
    const GridFunction<S>& f = fs[i];
    if (!(f.root() == root))
      throw GridMismatch("cz_decompose: functions on different lattices");
    if (!f.is_nonnegative())
      throw Error("cz_decompose: inputs must be nonnegative");
    const CubeIntegrals<S> sums(f);

    if (exceeds(sums.avg(lattice_root(root.dim)))) {
      dec.slot_degenerate[i] = true;
      dec.degenerate = true;
      dec.good.push_back(f);
      dec.bad.push_back(GridFunction<S>::signed_from_leaves(
          root, std::vector<S>(root.leaf_count(), S(0))));
      continue;
    }

    // Maximal cubes with average above the cut: descend only through cubes
    // that stay at or below it, so the first crossing is maximal.
    std::vector<DyadicCube> frontier{lattice_root(root.dim)};
    while (!frontier.empty()) {
      std::vector<DyadicCube> next;
      for (const auto& q : frontier) {
        if (q.level == root.depth) continue;
        for (auto& child : children(q, root.dim)) {
          if (exceeds(sums.avg(child)))
            dec.stopping[i].insert(std::move(child));
          else
            next.push_back(std::move(child));
        }
      }
      frontier = std::move(next);
    }

    std::vector<S> g(f.leaves());
    for (const auto& r : dec.stopping[i]) {
      const S a = sums.avg(r);
      for_each_leaf_under(root, r, [&](std::uint64_t flat) { g[flat] = a; });
    }
    std::vector<S> b(root.leaf_count());
    for (std::uint64_t x = 0; x < b.size(); ++x) b[x] = S(f[x] - g[x]);
    dec.good.push_back(GridFunction<S>::from_leaves(root, std::move(g)));
    dec.bad.push_back(GridFunction<S>::signed_from_leaves(root, std::move(b)));
  }
  return dec;
}

// The shift sees nothing of a bad slot outside that slot's exceptional set:
// whenever the averaging cube contains a whole stopping cube, the mean-zero
// pieces cancel exactly. Evaluates the shift with the bad function in the
// given slot (good parts before it, originals after) and verifies it is zero
// on every leaf outside the union of that slot's stopping cubes.
template <Scalar S>
struct VanishingReport {
  bool pass = true;
  std::optional<std::uint64_t> offending_leaf;
};

template <Scalar S>
VanishingReport<S> vanishing_check(const CoefficientSequence<S>& alpha, int m,
                                   const CZDecomposition<S>& dec,
                                   const std::vector<GridFunction<S>>& fs,
                                   std::size_t slot) {
  if (slot >= fs.size())
    throw ConfigError("vanishing_check: slot out of range");
  std::vector<GridFunction<S>> args;
  args.reserve(fs.size());
  for (std::size_t i = 0; i < slot; ++i) args.push_back(dec.good[i]);
  args.push_back(dec.bad[slot]);
  for (std::size_t i = slot + 1; i < fs.size(); ++i) args.push_back(fs[i]);

  const auto inst =
      ShiftInstance<S>::make(alpha.root, m, alpha, std::move(args));
  const auto out = eval_shift(inst);

  std::vector<char> omega(alpha.root.leaf_count(), 0);
  for (const auto& r : dec.stopping[slot])
    for_each_leaf_under(alpha.root, r,
                        [&](std::uint64_t flat) { omega[flat] = 1; });

  VanishingReport<S> rep;
  for (std::uint64_t x = 0; x < omega.size(); ++x) {
    if (omega[x]) continue;
    const bool zero = exact_mode<S> ? (out[x] == S(0))
                                    : (std::abs(as_double(out[x])) <= kFloatTol);
    if (!zero) {
      rep.pass = false;
      rep.offending_leaf = x;
      break;
    }
  }
  return rep;
}

} // namespace shiftdom
