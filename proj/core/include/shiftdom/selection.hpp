#pragma once

#include "shiftdom/carleson.hpp"
#include "shiftdom/dyadic.hpp"
#include "shiftdom/scalar.hpp"

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <vector>

namespace shiftdom {

// The constant ladder, all exact powers of two. threshold is the value a
// selected cube's budget coefficient takes; c1 caps the single-slice
// comparison constant and c2 = 2*c1^2 the full multi-slice one.
struct SelectionConstants {
  int k = 1;
  int d = 1;
  Rat c_w;
  Rat c1;
  Rat threshold;
  Rat c2;

  static SelectionConstants make(int k, int d) {
    if (k < 1) throw ConfigError("SelectionConstants: k must be >= 1");
    if (d < 1) throw ConfigError("SelectionConstants: d must be >= 1");
    SelectionConstants c;
    c.k = k;
    c.d = d;
    const long base = static_cast<long>(k) * (5 + d * (2 * k - 1));
    c.c_w = pow2(base);
    c.c1 = pow2(base + k + 2);
    c.threshold = pow2(base + 2 * k + 2);
    c.c2 = Rat(2) * c.c1 * c.c1;
    return c;
  }
};

// Double-mode inputs count as normalized when the norm is within this of 1.
inline constexpr double kNormTolerance = 1e-9;

template <Scalar S>
struct SelectionTrace {
  std::set<DyadicCube> selected;     // cubes whose budget fired
  S threshold{};                     // the fired value
  std::map<DyadicCube, S> delta;     // budget balance, on the walked closure
                                     // and the children of every cube where
                                     // the competitor was positive
  std::map<DyadicCube, S> gamma;     // positive competitor maxima only
};

// Budget selection on a stride-m relabeled lattice in relative coordinates
// (the level-0 root is the base cube; support sits at levels j*m, j >= 1).
//
// Walk the ancestor closure of the support top-down with a running balance:
//   delta(root) = 0
//   gamma(Q)    = max of alpha over the stride children of Q
//   fire at Q  <=>  delta(Q) < A(Q) * gamma(Q),   A = avg_product
//   delta(R)    = delta(Q) + (beta(Q) - alpha(R)) * A(Q),  R a stride child,
// with beta(Q) = threshold if Q fired and 0 otherwise.
//
// Two facts shape the implementation. First, delta stays >= 0 everywhere: a
// non-firing cube has delta >= A*gamma >= A*alpha(R), and a firing cube adds
// (threshold - alpha(R))*A >= 0 since normalization caps alpha at 1. Hence
// gamma(Q) = 0 forces beta(Q) = 0, and the stride children all inherit
// delta(Q) unchanged, so A(Q) is never evaluated there. That short circuit is
// what lets shifted-grid callers promise averages only on ancestors of
// support cubes. Second, firing needs gamma > 0, so every selected cube has a
// support cube one stride below it; nothing at or below the deepest support
// level is ever selected.
//
// alpha must have unit Carleson norm: exact in rational mode, within
// kNormTolerance in double mode. Zero entries are tolerated and ignored.
template <Scalar S>
SelectionTrace<S> run_selection(
    int dim, int m, const std::map<DyadicCube, S>& alpha,
    const SelectionConstants& consts,
    const std::function<S(const DyadicCube&)>& avg_product) {
  if (m < 1) throw ConfigError("run_selection: stride must be >= 1");
  if (!avg_product) throw ConfigError("run_selection: missing average callback");

  for (const auto& [q, a] : alpha) {
    if (a < S(0)) throw Error("run_selection: negative coefficient");
    if (a == S(0)) continue;
    if (static_cast<int>(q.index.size()) != dim)
      throw Error("run_selection: coefficient index arity mismatch");
    if (q.level <= 0 || q.level % m != 0)
      throw SupportResidueError("run_selection: support at level " +
                                std::to_string(q.level) +
                                " is not a positive multiple of the stride");
    if (q.level > 62) throw Error("run_selection: level out of range");
    for (auto ix : q.index)
      if (ix < 0 || ix >= (std::int64_t{1} << q.level))
        throw Error("run_selection: coefficient index out of range");
  }

  {
    const S norm = carleson_norm_map<S>(dim, alpha);
    if constexpr (exact_mode<S>) {
      if (norm != S(1))
        throw NotNormalized("run_selection: Carleson norm is not 1");
    } else {
      if (!(norm > 1.0 - kNormTolerance && norm < 1.0 + kNormTolerance))
        throw NotNormalized("run_selection: Carleson norm is not within "
                            "tolerance of 1");
    }
  }

  SelectionTrace<S> trace;
  trace.threshold = from_rat<S>(consts.threshold);

  // Competitor maxima and the ancestor closure, both straight off the
  // support; neither ever touches a cube below the support.
  std::set<DyadicCube> closure;
  std::map<DyadicCube, std::vector<DyadicCube>> closure_children;
  for (const auto& [q, a] : alpha) {
    if (a == S(0)) continue;
    DyadicCube cur = q;
    auto& g = trace.gamma[parent(cur, m)];
    if (a > g) g = a;
    while (cur.level > 0) {
      DyadicCube up = parent(cur, m);
      const bool fresh = closure.insert(cur).second;
      closure_children[up].push_back(cur);
      if (!fresh) {
        closure_children[up].pop_back(); // already linked on an earlier walk
        break;
      }
      cur = std::move(up);
    }
    closure.insert(lattice_root(dim));
  }

  if (closure.empty()) return trace; // nothing to select from

  trace.delta.emplace(lattice_root(dim), S(0));
  for (const auto& q : closure) {
    const S& delta_q = trace.delta.at(q);
    const auto gamma_it = trace.gamma.find(q);
    if (gamma_it == trace.gamma.end()) {
      // No coefficients one stride down; balance flows through untouched.
      auto cc = closure_children.find(q);
      if (cc != closure_children.end())
        for (const auto& r : cc->second) trace.delta.emplace(r, delta_q);
      continue;
    }
    const S a_q = avg_product(q);
    const bool fire = delta_q < S(a_q * gamma_it->second);
    if (fire) trace.selected.insert(q);
    const S beta = fire ? trace.threshold : S(0);
    for (const auto& r : descendants(q, dim, m)) {
      const auto al = alpha.find(r);
      const S a_r = (al == alpha.end()) ? S(0) : al->second;
      trace.delta.insert_or_assign(r, S(delta_q + (beta - a_r) * a_q));
    }
  }
  return trace;
}

// Certificate check for a finished selection: the telescoped balance
// inequality along every support chain. For the chain root = C_0 > C_1 > ...
// > C_G = bottom (stride steps) and every anchor position g0 with a recorded
// balance,
//   sum_{g > g0} alpha(C_g) * A(C_{g-1})
//     <= delta(C_{g0}) + sum_{g >= g0} beta(C_g) * A(C_g).
// Anchors without a recorded balance have no support below them on any
// chain, so their instance is trivially true and is skipped. Checking the
// chain through every support cube covers every point of the root: a chain's
// left side only collects terms from support cubes on it.
template <Scalar S>
struct ChainCertificate {
  bool pass = true;
  std::optional<DyadicCube> bottom; // support chain that failed
  std::optional<DyadicCube> anchor; // anchor position of the failure
  S worst_gap{};                    // min over checks of rhs - lhs
  bool gap_set = false;
};

template <Scalar S>
ChainCertificate<S> verify_beta_bound(
    int m, const std::map<DyadicCube, S>& alpha, const SelectionTrace<S>& trace,
    const std::function<S(const DyadicCube&)>& avg_product) {
  if (m < 1) throw ConfigError("verify_beta_bound: stride must be >= 1");
  ChainCertificate<S> cert;

  // Average cache: queried cubes all carry positive competitor maxima, so
  // the cache also guards against forbidden queries in shifted grids.
  std::map<DyadicCube, S> avg_cache;
  const auto avg_at = [&](const DyadicCube& q) -> const S& {
    auto it = avg_cache.find(q);
    if (it == avg_cache.end()) it = avg_cache.emplace(q, avg_product(q)).first;
    return it->second;
  };

  for (const auto& [bottom, a_bottom] : alpha) {
    if (a_bottom == S(0)) continue;
    // Chain cubes from the root down to this support cube.
    std::vector<DyadicCube> chain;
    for (int lev = 0; lev <= bottom.level; lev += m)
      chain.push_back(ancestor_at_level(bottom, lev));

    const std::size_t len = chain.size();
    std::vector<S> lhs_term(len, S(0)), beta_term(len, S(0));
    for (std::size_t g = 1; g < len; ++g) {
      const auto al = alpha.find(chain[g]);
      if (al != alpha.end() && al->second != S(0))
        lhs_term[g] = S(al->second * avg_at(chain[g - 1]));
    }
    for (std::size_t g = 0; g < len; ++g)
      if (trace.selected.count(chain[g]))
        beta_term[g] = S(trace.threshold * avg_at(chain[g]));

    S lhs_suffix(0), beta_suffix(0);
    std::vector<S> lhs_after(len), beta_from(len);
    for (std::size_t g = len; g-- > 0;) {
      lhs_after[g] = lhs_suffix; // strict suffix: terms below position g
      lhs_suffix += lhs_term[g];
      beta_suffix += beta_term[g];
      beta_from[g] = beta_suffix;
    }

    for (std::size_t g0 = 0; g0 < len; ++g0) {
      const auto dl = trace.delta.find(chain[g0]);
      if (dl == trace.delta.end()) continue;
      const S rhs(dl->second + beta_from[g0]);
      const S gap(rhs - lhs_after[g0]);
      if (!cert.gap_set || gap < cert.worst_gap) {
        cert.worst_gap = gap;
        cert.gap_set = true;
      }
      if (lhs_after[g0] > rhs) {
        cert.pass = false;
        cert.bottom = bottom;
        cert.anchor = chain[g0];
        return cert;
      }
    }
  }
  return cert;
}

} // namespace shiftdom
