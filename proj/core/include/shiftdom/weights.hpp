#pragma once

#include "shiftdom/shift_ops.hpp"
#include "shiftdom/sparse_family.hpp"

#include <cmath>
#include <vector>

namespace shiftdom {

// A tuple of strictly positive weights with exponents p_i > 1, the joint
// exponent 1/p = sum 1/p_i, and the leafwise product weight prod w_i^{p/p_i}.
template <Scalar S>
struct WeightVector {
  std::vector<GridFunction<S>> w;
  std::vector<double> p;
  double p_total = 0;

  int k() const { return static_cast<int>(w.size()); }
  const RootCube& root() const { return w.front().root(); }

  static WeightVector make(std::vector<GridFunction<S>> w,
                           std::vector<double> p) {
    if (w.empty() || w.size() != p.size())
      throw ConfigError("weights: one exponent per weight required");
    for (double e : p)
      if (!(e > 1.0))
        throw ExponentError("weights: exponents must lie in (1, infinity)");
    double inv = 0;
    for (double e : p) inv += 1.0 / e;
    for (const auto& wi : w) {
      if (!(wi.root() == w.front().root()))
        throw GridMismatch("weights: weights on different lattices");
      for (const auto& v : wi.leaves())
        if (!(v > S(0))) throw Error("weights: weights must be positive leafwise");
    }
    WeightVector out;
    out.w = std::move(w);
    out.p = std::move(p);
    out.p_total = 1.0 / inv;
    return out;
  }

  // prod_i w_i(x)^{p/p_i} at one leaf, in doubles
  double joint_weight(std::uint64_t leaf) const {
    double v = 1;
    for (std::size_t i = 0; i < w.size(); ++i)
      v *= std::pow(as_double(w[i][leaf]), p_total / p[i]);
    return v;
  }
};

// sup over lattice cubes of <v_w> * prod <w_i^{1-p_i'}>^{p/p_i}. Fractional
// powers put this in floating point; the k=1 integer-conjugate case below is
// the exact cross-check.
template <Scalar S>
double a_p_constant(const WeightVector<S>& wv) {
  const RootCube& root = wv.root();
  std::vector<double> joint(root.leaf_count());
  for (std::uint64_t x = 0; x < joint.size(); ++x) joint[x] = wv.joint_weight(x);
  CubeIntegrals<double> v_sums(
      GridFunction<double>::signed_from_leaves(root, std::move(joint)));

  std::vector<CubeIntegrals<double>> dual_sums;
  for (int i = 0; i < wv.k(); ++i) {
    const double conj = wv.p[i] / (wv.p[i] - 1.0);
    std::vector<double> dual(root.leaf_count());
    for (std::uint64_t x = 0; x < dual.size(); ++x)
      dual[x] = std::pow(as_double(wv.w[i][x]), 1.0 - conj);
    dual_sums.emplace_back(
        GridFunction<double>::signed_from_leaves(root, std::move(dual)));
  }

  double best = 0;
  for (int level = 0; level <= root.depth; ++level) {
    for (const auto& q : descendants(lattice_root(root.dim), root.dim, level)) {
      double c = v_sums.avg(q);
      for (int i = 0; i < wv.k(); ++i)
        c *= std::pow(dual_sums[i].avg(q), wv.p_total / wv.p[i]);
      if (c > best) best = c;
    }
  }
  return best;
}

// k = 1 with an integer conjugate exponent: sup <w> <w^{1-p'}> in exact
// arithmetic. At p' = 2 this is the classical A_2 characteristic.
inline Rat a_p_constant_exact(const GridFunction<Rat>& w, long p_prime) {
  if (p_prime < 2) throw ExponentError("weights: conjugate exponent below 2");
  for (const auto& v : w.leaves())
    if (!(v > 0)) throw Error("weights: weights must be positive leafwise");

  const RootCube& root = w.root();
  std::vector<Rat> dual(root.leaf_count());
  for (std::uint64_t x = 0; x < dual.size(); ++x)
    dual[x] = ipow(Rat(1 / w[x]), static_cast<unsigned long>(p_prime - 1));
  CubeIntegrals<Rat> w_sums(w);
  CubeIntegrals<Rat> dual_sums(
      GridFunction<Rat>::signed_from_leaves(root, std::move(dual)));

  Rat best = 0;
  for (int level = 0; level <= root.depth; ++level)
    for (const auto& q : descendants(lattice_root(root.dim), root.dim, level)) {
      const Rat c(w_sums.avg(q) * dual_sums.avg(q));
      if (c > best) best = c;
    }
  return best;
}

struct WeightedCheck {
  double lhs = 0;      // || A_S f ||_{L^p(v_w)}
  double rhs_core = 0; // [w]^{max(1, p_i'/p)} * prod ||f_i||_{L^{p_i}(w_i)}
  double ratio = 0;    // lhs / rhs_core, 0 when the right side vanishes
};

// Both sides of the weighted sparse bound as finite leaf sums. Only the
// ratio's boundedness across an ensemble is a claim; the implied constant is
// not pinned anywhere.
template <Scalar S>
WeightedCheck sparse_weighted_check(const SparseFamily& fam,
                                    const WeightVector<S>& wv,
                                    const std::vector<GridFunction<S>>& fs) {
  if (static_cast<int>(fs.size()) != wv.k())
    throw ConfigError("weighted check: one function per weight required");
  for (const auto& f : fs)
    if (!(f.root() == wv.root()))
      throw GridMismatch("weighted check: functions on a different lattice");
  if (!(fam.root == wv.root()))
    throw GridMismatch("weighted check: family on a different lattice");

  std::vector<GridFunction<double>> dfs;
  dfs.reserve(fs.size());
  for (const auto& f : fs) dfs.push_back(to_double_function(f));
  const auto sparse = eval_sparse_op<double>(fam, dfs);

  const RootCube& root = wv.root();
  const double leaf_meas = as_double(cube_measure(root, root.depth));
  const double p = wv.p_total;

  double lhs_sum = 0;
  for (std::uint64_t x = 0; x < root.leaf_count(); ++x)
    lhs_sum += std::pow(sparse[x], p) * wv.joint_weight(x) * leaf_meas;

  WeightedCheck out;
  out.lhs = std::pow(lhs_sum, 1.0 / p);

  double max_exp = 1.0;
  for (double e : wv.p) {
    const double conj = e / (e - 1.0);
    max_exp = std::max(max_exp, conj / p);
  }
  double rhs = std::pow(a_p_constant(wv), max_exp);
  for (std::size_t i = 0; i < fs.size(); ++i) {
    double norm = 0;
    for (std::uint64_t x = 0; x < root.leaf_count(); ++x)
      norm += std::pow(as_double(fs[i][x]), wv.p[i]) *
              as_double(wv.w[i][x]) * leaf_meas;
    rhs *= std::pow(norm, 1.0 / wv.p[i]);
  }
  out.rhs_core = rhs;
  out.ratio = rhs > 0 ? out.lhs / rhs : 0.0;
  return out;
}

} // namespace shiftdom
