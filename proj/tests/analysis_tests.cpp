// Endpoint functionals, the stopping-time decomposition, embedding
// calibrations, the kernel-smoothness series and the weighted constants.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "shiftdom/domination.hpp"
#include "shiftdom/instance_gen.hpp"
#include "shiftdom/modulus.hpp"
#include "shiftdom/weak_type.hpp"
#include "shiftdom/weights.hpp"

#include <cmath>

using namespace shiftdom;

namespace {

DyadicCube cube1(int level, std::int64_t i) { return DyadicCube{level, {i}}; }

} // namespace

TEST_CASE("level set functional walks distinct values") {
  const auto root = RootCube::unit(1, 2);
  const auto f = GridFunction<Rat>::from_leaves(
      root, {Rat(4), Rat(4), Rat(1), Rat(0)});
  // k=1: candidates 4*(1/2) = 2 and 1*(3/4); k=2 squares the measures.
  CHECK(level_set_functional(f, 1) == Rat(2));
  CHECK(level_set_functional(f, 2) == Rat(1));
  CHECK(level_set_functional(GridFunction<Rat>::zero(root), 1) == Rat(0));
}

TEST_CASE("weak type fixture at the root") {
  const auto root = RootCube::unit(1, 2);
  const auto inst = ShiftInstance<Rat>::make(
      root, 0,
      CoefficientSequence<Rat>::make(root, {{lattice_root(1), Rat(1)}}),
      {GridFunction<Rat>::constant(root, Rat(1))});
  const auto rep = weak_type_functional(inst);
  CHECK(rep.value == Rat(1));
  CHECK(rep.bound == Rat(64));
  CHECK(rep.pass);
}

TEST_CASE("maximal operator weak type has constant one") {
  const auto root = RootCube::unit(1, 3);
  const auto f = GridFunction<Rat>::indicator(root, cube1(2, 1));
  const auto rep = maximal_weak_type<Rat>({f});
  CHECK(rep.pass);
  CHECK(rep.bound == l1_norm(f));
  // The sharp case: the level set {M f >= 1} is the cube itself.
  CHECK(rep.value >= Rat(1, 4));
}

TEST_CASE("averaged coefficients shift up by the complexity") {
  const auto root = RootCube::unit(1, 2);
  const auto seq =
      CoefficientSequence<Rat>::make(root, {{cube1(1, 0), Rat(1)}});
  const auto avg = averaged_sequence(seq, 1);
  CHECK(avg.values ==
        std::map<DyadicCube, Rat>{{lattice_root(1), Rat(1, 2)}});
  CHECK(avg.norm <= seq.norm);
  CHECK_THROWS_AS(averaged_sequence(seq, 2), SupportLevelError);
}

TEST_CASE("l2 bound on fixtures and random instances") {
  const auto root = RootCube::unit(1, 2);
  const auto inst = ShiftInstance<Rat>::make(
      root, 1,
      CoefficientSequence<Rat>::make(root,
                                     {{cube1(1, 0), Rat(1)}, {cube1(1, 1), Rat(1)}}),
      {GridFunction<Rat>::indicator(root, cube1(1, 0))});
  const auto rep = l2_bound_check(inst);
  CHECK(rep.pass);
  CHECK(rep.exact);
  // ||1/2 * indicator of everything||_2 = 1/2 against 4 * 1 * sqrt(1/2).
  CHECK(rep.lhs == doctest::Approx(0.5));
  for (std::uint64_t seed = 30; seed < 40; ++seed) {
    GenOptions g;
    g.d = 1;
    g.k = 2;
    g.m = 1;
    g.depth = 4;
    const auto r = l2_bound_check(gen_instance(seed, g));
    CHECK(r.pass);
    CHECK(r.exact);
  }
}

TEST_CASE("stopping-time split, single stopping cube") {
  const auto root = RootCube::unit(1, 2);
  const auto f = GridFunction<Rat>::from_leaves(
      root, {Rat(4), Rat(0), Rat(0), Rat(0)});
  const auto dec = cz_decompose<Rat>({f}, Rat(2));
  CHECK_FALSE(dec.degenerate);
  CHECK(dec.stopping[0] == std::set<DyadicCube>{cube1(2, 0)});
  // The stopping cube is a single leaf, so g = f and b = 0 here.
  CHECK(dec.good[0] == f);
  CHECK(dec.bad[0] == GridFunction<Rat>::signed_from_leaves(
                          root, {Rat(0), Rat(0), Rat(0), Rat(0)}));
}

TEST_CASE("stopping-time split, proper bad part") {
  const auto root = RootCube::unit(1, 3);
  std::vector<Rat> leaves(8, Rat(0));
  leaves[0] = Rat(8);
  const auto f = GridFunction<Rat>::from_leaves(root, leaves);
  const auto dec = cz_decompose<Rat>({f}, Rat(2));
  // <f> = 4 > 2 first happens on [0, 1/4), which spans two leaves.
  CHECK(dec.stopping[0] == std::set<DyadicCube>{cube1(2, 0)});
  CHECK(dec.good[0][0] == Rat(4));
  CHECK(dec.good[0][1] == Rat(4));
  CHECK(dec.good[0][2] == Rat(0));
  CHECK(dec.bad[0][0] == Rat(4));
  CHECK(dec.bad[0][1] == Rat(-4));
  // Certificates: decomposition, mean zero, height bound, measure bound.
  for (std::uint64_t i = 0; i < 8; ++i)
    CHECK(Rat(dec.good[0][i] + dec.bad[0][i]) == f[i]);
  CHECK(average(dec.bad[0], cube1(2, 0)) == Rat(0));
  for (const auto& v : dec.good[0].leaves()) CHECK(v <= Rat(4)); // 2^d lambda
  CHECK(relative_measure(1, 2) * Rat(2) <= l1_norm(f));
}

TEST_CASE("stopping-time split, degenerate root") {
  const auto root = RootCube::unit(1, 1);
  const auto f = GridFunction<Rat>::constant(root, Rat(10));
  const auto dec = cz_decompose<Rat>({f}, Rat(2));
  CHECK(dec.degenerate);
  CHECK(dec.slot_degenerate[0]);
  CHECK(dec.stopping[0].empty());
  CHECK(dec.good[0] == f);
}

TEST_CASE("stopping-time split rejects bad input") {
  const auto root = RootCube::unit(1, 1);
  const auto f = GridFunction<Rat>::constant(root, Rat(1));
  CHECK_THROWS_AS(cz_decompose<Rat>({}, Rat(1)), ConfigError);
  CHECK_THROWS_AS(cz_decompose<Rat>({f}, Rat(0)), ConfigError);
  const auto g =
      GridFunction<Rat>::signed_from_leaves(root, {Rat(1), Rat(-1)});
  CHECK_THROWS_AS(cz_decompose<Rat>({g}, Rat(1)), Error);
}

TEST_CASE("shifts with a bad slot vanish outside the stopping region") {
  GenOptions g;
  g.d = 1;
  g.k = 2;
  g.m = 1;
  g.depth = 4;
  for (std::uint64_t seed = 50; seed < 56; ++seed) {
    const auto inst = gen_instance(seed, g);
    // Pick lambda above the root averages so no slot degenerates.
    Rat top(0);
    for (const auto& f : inst.fs) {
      const Rat a = average(f, lattice_root(1));
      const Rat p = ipow(a, 2);
      if (p > top) top = p;
    }
    const Rat lambda(top + Rat(1, 3));
    const auto dec = cz_decompose(inst.fs, lambda);
    REQUIRE_FALSE(dec.degenerate);
    for (std::size_t slot = 0; slot < inst.fs.size(); ++slot) {
      const auto rep = vanishing_check(inst.alpha, inst.m, dec, inst.fs, slot);
      CHECK(rep.pass);
    }
  }
}

TEST_CASE("embedding check validates exponents") {
  const auto root = RootCube::unit(1, 2);
  const auto seq =
      CoefficientSequence<Rat>::make(root, {{lattice_root(1), Rat(1)}});
  const auto f = GridFunction<Rat>::constant(root, Rat(1));
  CHECK_THROWS_AS(carleson_embedding_check<Rat>(seq, {f}, {2.0, 2.0}),
                  ExponentError);
  CHECK_THROWS_AS(carleson_embedding_check<Rat>(seq, {f}, {1.0}),
                  ExponentError);
}

TEST_CASE("embedding calibration on the unit fixture") {
  // norm(alpha) = 1 and ||g||_2 = 1: the bound is the conjugate exponent 2.
  const auto root = RootCube::unit(1, 2);
  const auto seq =
      CoefficientSequence<Rat>::make(root, {{lattice_root(1), Rat(1)}});
  const auto g = GridFunction<Rat>::constant(root, Rat(1));
  const auto rep = carleson_embedding_check<Rat>(seq, {g}, {2.0});
  CHECK(rep.pass);
  CHECK(rep.lhs == doctest::Approx(1.0));
  CHECK(rep.rhs == doctest::Approx(2.0));
}

TEST_CASE("kernel gauge presets and validation") {
  const auto pw = ModulusOfContinuity::power(0.5);
  CHECK(pw(1.0) == doctest::Approx(1.0));
  CHECK(pw(0.25) == doctest::Approx(0.5));
  CHECK(pw.has_closed_form());
  CHECK(pw.closed_form_integral() == doctest::Approx(2.0 + 4.0));
  const auto lp = ModulusOfContinuity::log_power(1.0);
  // t (1 + log(1/t)) at t = 1/e gives 2/e.
  CHECK(lp(std::exp(-1.0)) == doctest::Approx(2.0 * std::exp(-1.0)));
  CHECK(lp.closed_form_integral() == doctest::Approx(1.0 + 2.0 + 2.0));
  CHECK_THROWS_AS(ModulusOfContinuity::power(0.0), ConfigError);
  CHECK_THROWS_AS(ModulusOfContinuity::power(-1.0), ConfigError);
  CHECK_THROWS_AS(pw(0.0), ConfigError);
  CHECK_THROWS_AS(pw(1.5), ConfigError);
}

TEST_CASE("log-dini series against closed forms") {
  // omega(t) = t: series sum (j+1) 2^-j = 4, integral 1 + 1 = 2.
  const auto rep = log_dini_series(ModulusOfContinuity::power(1.0), 60);
  CHECK(std::abs(rep.series - 4.0) < 1e-12);
  CHECK(rep.integral == 2.0);
  CHECK(rep.integral_exact);
  CHECK_FALSE(rep.divergence_warning);
  CHECK(rep.ratio == doctest::Approx(2.0));

  // The log_power series has its own closed form:
  // 1/(1-x)^2 + log(2) 2x/(1-x)^3 at x = 2^-delta.
  for (double delta : {0.5, 1.0}) {
    const auto r = log_dini_series(ModulusOfContinuity::log_power(delta), 400);
    const double x = std::pow(2.0, -delta);
    const double oracle = 1.0 / ((1.0 - x) * (1.0 - x)) +
                          std::log(2.0) * 2.0 * x /
                              ((1.0 - x) * (1.0 - x) * (1.0 - x));
    CHECK(r.series == doctest::Approx(oracle).epsilon(1e-10));
  }

  // Truncating later only grows the series (monotone in the truncation).
  double prev = 0;
  for (int M : {5, 10, 20, 40}) {
    const auto r = log_dini_series(ModulusOfContinuity::power(0.25), M);
    CHECK(r.series >= prev);
    prev = r.series;
  }

  // A custom gauge matches quadrature against the power preset's closed
  // form. The integral is cut off at 2^-truncation, which for sqrt leaves a
  // tail near 2 * 2^-(M/2) * M, so M = 40 only reaches 1e-4 territory and
  // the tight comparison needs M = 80.
  const auto custom = ModulusOfContinuity::custom(
      [](double t) { return std::sqrt(t); });
  const auto coarse = log_dini_series(custom, 40);
  CHECK_FALSE(coarse.integral_exact);
  CHECK(coarse.integral == doctest::Approx(6.0).epsilon(1e-4));
  const auto qr = log_dini_series(custom, 80);
  CHECK_FALSE(qr.integral_exact);
  CHECK(qr.integral == doctest::Approx(6.0).epsilon(1e-8));

  // A non-Dini gauge trips the tail warning.
  const auto flat = ModulusOfContinuity::custom(
      [](double t) { return 1.0 / (1.0 + std::log(1.0 / t)); });
  CHECK(log_dini_series(flat, 60).divergence_warning);
}

TEST_CASE("ratio band for the divergence presets") {
  for (double delta : {0.25, 0.5, 1.0}) {
    const auto rep = log_dini_series(ModulusOfContinuity::power(delta), 60);
    CHECK(rep.ratio > 0.125);
    CHECK(rep.ratio < 8.0);
    CHECK_FALSE(rep.divergence_warning);
  }
}

TEST_CASE("flat weights have constant one") {
  const auto root = RootCube::unit(1, 3);
  const auto one = GridFunction<Rat>::constant(root, Rat(1));
  const auto wv = WeightVector<Rat>::make({one, one}, {4.0, 4.0});
  CHECK(a_p_constant(wv) == 1.0);
  CHECK(a_p_constant_exact(one, 2) == Rat(1));
}

TEST_CASE("two-valued weight fixture") {
  // w = 2 on the left half, 1/2 on the right: <w> = <1/w> = 5/4 at the root,
  // every smaller cube is flat, so the A_2 constant is 25/16.
  const auto root = RootCube::unit(1, 2);
  const auto w = GridFunction<Rat>::from_leaves(
      root, {Rat(2), Rat(2), Rat(1, 2), Rat(1, 2)});
  CHECK(a_p_constant_exact(w, 2) == Rat(25, 16));
  const auto wv = WeightVector<Rat>::make({w}, {2.0});
  CHECK(a_p_constant(wv) == doctest::Approx(25.0 / 16.0).epsilon(1e-12));
}

TEST_CASE("weight constant is scale invariant at exponent two") {
  const auto root = RootCube::unit(1, 2);
  const auto w = GridFunction<Rat>::from_leaves(
      root, {Rat(3), Rat(1), Rat(1, 2), Rat(4)});
  std::vector<Rat> scaled;
  for (const auto& v : w.leaves()) scaled.push_back(Rat(v * Rat(7)));
  const auto ws = GridFunction<Rat>::from_leaves(root, scaled);
  CHECK(a_p_constant_exact(w, 2) == a_p_constant_exact(ws, 2));
  const auto a = a_p_constant(WeightVector<Rat>::make({w}, {2.0}));
  const auto b = a_p_constant(WeightVector<Rat>::make({ws}, {2.0}));
  CHECK(a == doctest::Approx(b).epsilon(1e-12));
}

TEST_CASE("weighted check is degree-zero homogeneous in f") {
  GenOptions g;
  g.d = 1;
  g.k = 1;
  g.m = 1;
  g.depth = 3;
  const auto inst = gen_instance(77, g);
  const auto res = dominate_full(inst);
  REQUIRE(res.certified);
  const auto root = inst.root;
  const auto w = GridFunction<Rat>::from_leaves(
      root, {Rat(2), Rat(2), Rat(1), Rat(1), Rat(1), Rat(1), Rat(1, 2),
             Rat(1, 2)});
  const auto wv = WeightVector<Rat>::make({w}, {2.0});
  const auto base = sparse_weighted_check(res.family, wv, inst.fs);
  std::vector<Rat> scaled;
  for (const auto& v : inst.fs[0].leaves()) scaled.push_back(Rat(v * Rat(5)));
  const auto check2 = sparse_weighted_check(
      res.family, wv, {GridFunction<Rat>::from_leaves(root, scaled)});
  CHECK(check2.ratio == doctest::Approx(base.ratio).epsilon(1e-9));
  CHECK(check2.lhs == doctest::Approx(5.0 * base.lhs).epsilon(1e-9));
}
