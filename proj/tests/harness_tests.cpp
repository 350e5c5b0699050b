// Serialization round-trips, CSV assembly, seeded generation, the
// shifted-grid pipeline and a determinism smoke test of the command-line
// runner.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "shiftdom/csv.hpp"
#include "shiftdom/cz_pipeline.hpp"
#include "shiftdom/instance_gen.hpp"
#include "shiftdom/json_io.hpp"
#include "shiftdom/prng.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>

using namespace shiftdom;

namespace {

DyadicCube cube1(int level, std::int64_t i) { return DyadicCube{level, {i}}; }

std::filesystem::path fresh_dir(const std::string& tag) {
  const auto dir = std::filesystem::temp_directory_path() / ("shiftdom-" + tag);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

// Membership of a grid cell in a shifted cube, via the exact cell interval.
bool cell_in(const RootCube& root, const ShiftedCube& q,
             const std::vector<Int>& cell) {
  for (int a = 0; a < root.dim; ++a) {
    const auto [lo, hi] = cell_interval(root, q, a);
    if (cell[static_cast<std::size_t>(a)] < lo ||
        cell[static_cast<std::size_t>(a)] >= hi)
      return false;
  }
  return true;
}

} // namespace

TEST_CASE("instance json round-trips exactly") {
  GenOptions g;
  g.d = 2;
  g.k = 2;
  g.m = 1;
  g.depth = 3;
  const auto inst = gen_instance(9, g);
  const auto text = instance_to_json(inst);
  const auto back = instance_from_json(text);
  CHECK(back.root == inst.root);
  CHECK(back.m == inst.m);
  CHECK(back.alpha.values == inst.alpha.values);
  CHECK(back.alpha.norm == inst.alpha.norm);
  REQUIRE(back.fs.size() == inst.fs.size());
  for (std::size_t i = 0; i < inst.fs.size(); ++i)
    CHECK(back.fs[i] == inst.fs[i]);
  CHECK(instance_to_json(back) == text);
}

TEST_CASE("family json round-trips and validates") {
  const auto root = RootCube::unit(1, 2);
  const auto fam = SparseFamily::make(
      root, {lattice_root(1), cube1(1, 0), cube1(2, 3)}, Rat(1, 2));
  const auto text = family_to_json(fam);
  const auto back = family_from_json(text);
  CHECK(back.root == fam.root);
  CHECK(back.cubes == fam.cubes);
  CHECK(back.eta == fam.eta);
  CHECK_THROWS_AS(family_from_json("{"), ConfigError);
  CHECK_THROWS_AS(family_from_json("{\"eta\": \"1/2\"}"), ConfigError);
  CHECK_THROWS_AS(instance_from_json("[1, 2]"), ConfigError);
}

TEST_CASE("weighted families json round-trips") {
  std::vector<WeightedFamily<Rat>> fams(2);
  fams[0].rho = GridShift{{1}};
  fams[0].m = 1;
  fams[0].weight = Rat(1);
  fams[0].cubes = {ShiftedCube{fams[0].rho, 1, {0}},
                   ShiftedCube{fams[0].rho, 2, {-1}}};
  fams[1].rho = GridShift{{0}};
  fams[1].m = 2;
  fams[1].weight = Rat(1, 2);
  fams[1].cubes = {ShiftedCube{fams[1].rho, 1, {1}}};
  const auto text = weighted_families_to_json(fams);
  const auto back = weighted_families_from_json(text);
  REQUIRE(back.size() == 2);
  CHECK(back[0].rho.thirds == fams[0].rho.thirds);
  CHECK(back[0].cubes == fams[0].cubes);
  CHECK(back[1].weight == Rat(1, 2));
  CHECK(weighted_families_to_json(back) == text);
}

TEST_CASE("domination summaries serialize with pinned keys") {
  GenOptions g;
  g.d = 1;
  g.k = 1;
  g.m = 1;
  g.depth = 3;
  const auto res = dominate_full(gen_instance(4, g));
  const auto text = domination_to_json(summarize(res));
  CHECK(text.find("\"family\"") != std::string::npos);
  CHECK(text.find("\"c_theory\"") != std::string::npos);
  CHECK(text.find("\"empirical_ratio\"") != std::string::npos);
  CHECK(text.find("\"sparsity\"") != std::string::npos);
  CHECK(text.find("\"certified\"") != std::string::npos);
  // Key order is part of the format: family first, certified last.
  CHECK(text.find("\"family\"") < text.find("\"c_theory\""));
  CHECK(text.find("\"sparsity\"") < text.find("\"certified\""));
}

TEST_CASE("csv writer is strict about shape and content") {
  CsvWriter w({"a", "b"});
  w.add_row({"1", "2/3"});
  CHECK(w.str() == "a,b\n1,2/3\n");
  CHECK_THROWS_AS(w.add_row({"1"}), ConfigError);
  CHECK_THROWS_AS(w.add_row({"1", "x,y"}), ConfigError);
  CHECK_THROWS_AS(CsvWriter({}), ConfigError);
  CHECK(scalar_to_string(0.5) == "0.5");
  CHECK(scalar_to_string(Rat(7, 2)) == "7/2");
}

TEST_CASE("generation is deterministic and admissible") {
  GenOptions g;
  g.d = 2;
  g.k = 2;
  g.m = 2;
  g.depth = 4;
  const auto a = gen_instance(123, g);
  const auto b = gen_instance(123, g);
  CHECK(instance_to_json(a) == instance_to_json(b));
  CHECK(instance_to_json(a) != instance_to_json(gen_instance(124, g)));
  CHECK(a.alpha.norm == Rat(1));
  for (const auto& [q, v] : a.alpha.values) {
    CHECK(q.level >= g.m);
    CHECK(q.level <= g.depth);
  }
  // Unnormalized draws keep the raw value bounds.
  g.normalize = false;
  const auto raw = gen_instance(123, g);
  for (const auto& [q, v] : raw.alpha.values) {
    CHECK(v > Rat(0));
    CHECK(v <= Rat(1));
    CHECK(Rat(v).get_den() <= 1024);
  }
  // The functions do not depend on m, which is what makes m-sweep bound
  // columns comparable.
  GenOptions g2 = g;
  g2.m = 3;
  const auto other = gen_instance(123, g2);
  for (std::size_t i = 0; i < raw.fs.size(); ++i)
    CHECK(other.fs[i] == raw.fs[i]);
}

TEST_CASE("shifted carleson norm matches the base-grid walk") {
  const auto root = RootCube::unit(1, 3);
  std::map<DyadicCube, Rat> base{{lattice_root(1), Rat(1)},
                                 {cube1(2, 1), Rat(3, 4)},
                                 {cube1(3, 5), Rat(1, 2)}};
  std::map<ShiftedCube, Rat> lifted;
  for (const auto& [q, v] : base) lifted.emplace(as_shifted(q, 1), v);
  CHECK(shifted_carleson_norm<Rat>(1, lifted) ==
        carleson_norm_map<Rat>(1, base));
  CHECK(shifted_carleson_norm<Rat>(1, {}) == Rat(0));
}

TEST_CASE("regrouping merges by grid and audits the norm") {
  // Two half-sparse families in the same grid with weights 1 and 1/2; one
  // shared cube. The merged mass and the norm budget follow directly.
  const GridShift rho{{1}};
  std::vector<WeightedFamily<Rat>> fams(2);
  fams[0].rho = rho;
  fams[0].m = 1;
  fams[0].weight = Rat(1);
  fams[0].cubes = {ShiftedCube{rho, 1, {0}}, ShiftedCube{rho, 2, {1}}};
  fams[1].rho = rho;
  fams[1].m = 2;
  fams[1].weight = Rat(1, 2);
  fams[1].cubes = {ShiftedCube{rho, 1, {0}}};
  const auto grids = regroup_families<Rat>(1, fams);
  REQUIRE(grids.size() == 1);
  const auto& seq = grids.begin()->second;
  CHECK(seq.weight_sum == Rat(3, 2));
  CHECK(seq.mu.at(ShiftedCube{rho, 1, {0}}) == Rat(3, 2));
  CHECK(seq.mu.at(ShiftedCube{rho, 2, {1}}) == Rat(1));
  CHECK(seq.inputs_half_sparse);
  CHECK(seq.norm_bound_pass);
  CHECK(seq.norm <= Rat(3)); // 2 * weight_sum
  // Zero-weight families are dropped; negative weights are refused.
  auto drop = fams;
  drop[1].weight = Rat(0);
  CHECK(regroup_families<Rat>(1, drop).begin()->second.weight_sum == Rat(1));
  drop[1].weight = Rat(-1);
  CHECK_THROWS_AS(regroup_families<Rat>(1, drop), ConfigError);
}

TEST_CASE("regrouped evaluation is the weighted sum of the inputs") {
  const auto root = RootCube::unit(1, 3);
  GenOptions g;
  g.d = 1;
  g.k = 1;
  g.m = 1;
  g.depth = 3;
  const auto fs = gen_instance(21, g).fs;
  const ShiftedAverages<Rat> avg(fs);

  const GridShift base{{0}}, third{{1}};
  std::vector<WeightedFamily<Rat>> fams(3);
  fams[0] = {base, 1, Rat(2, 3), {ShiftedCube{base, 1, {0}}}};
  fams[1] = {third, 1, Rat(1, 2),
             {ShiftedCube{third, 1, {0}}, ShiftedCube{third, 2, {2}}}};
  fams[2] = {third, 2, Rat(1), {ShiftedCube{third, 1, {0}}}};

  // Evaluate both forms at every refinement cell.
  const long cells = 3l << root.depth;
  for (long c = 0; c < cells; ++c) {
    const std::vector<Int> cell{Int(c)};
    Rat direct(0);
    for (const auto& fam : fams)
      for (const auto& q : fam.cubes)
        if (cell_in(root, q, cell)) direct += Rat(fam.weight * avg(q));
    Rat grouped(0);
    for (const auto& [rho, seq] : regroup_families<Rat>(1, fams))
      for (const auto& [q, w] : seq.mu)
        if (cell_in(root, q, cell)) grouped += Rat(w * avg(q));
    CHECK(direct == grouped);
  }
}

TEST_CASE("shifted averages agree with lattice averages") {
  GenOptions g;
  g.d = 2;
  g.k = 2;
  g.m = 1;
  g.depth = 2;
  const auto fs = gen_instance(31, g).fs;
  const ShiftedAverages<Rat> avg(fs);
  const AverageProduct<Rat> direct(fs);
  for (int level = 0; level <= 2; ++level)
    for (const auto& q : descendants(lattice_root(2), 2, level))
      CHECK(avg(as_shifted(q, 2)) == direct(q));
}

TEST_CASE("shifted averages clamp to the root support") {
  // d=1, J=1, f = (a, b): the t=1/3 cube [-1/6, 1/3) sees only [0, 1/3),
  // so its average is (a/3) / (1/2) = 2a/3.
  const auto root = RootCube::unit(1, 1);
  const auto f =
      GridFunction<Rat>::from_leaves(root, {Rat(3), Rat(5)});
  const ShiftedAverages<Rat> avg({f});
  const ShiftedCube q{GridShift{{1}}, 1, {0}};
  CHECK(avg(q) == Rat(2));
  // A cube fully outside the root averages to zero.
  const ShiftedCube far{GridShift{{1}}, 1, {-4}};
  CHECK(avg(far) == Rat(0));
}

TEST_CASE("assembly certifies disjoint single-cube grids") {
  const auto root = RootCube::unit(1, 2);
  const auto f = GridFunction<Rat>::constant(root, Rat(1));
  const GridShift base{{0}};
  std::vector<WeightedFamily<Rat>> fams(1);
  fams[0] = {base, 1, Rat(1), {ShiftedCube{base, 0, {0}}}};
  const auto res = assemble_domination<Rat>(fams, {f});
  CHECK(res.certified);
  CHECK(res.ratio_finite);
  REQUIRE(res.grids.size() == 1);
  CHECK(res.grids[0].family.count(ShiftedCube{base, 0, {0}}) == 1);
  // lhs = 1 on the unit cube, rhs = c1 * 1 on the selected root: ratio 1/512.
  CHECK(res.empirical_ratio == Rat(1, 512));
}

TEST_CASE("assembly handles two grids and empty input") {
  GenOptions g;
  g.d = 1;
  g.k = 1;
  g.m = 1;
  g.depth = 3;
  const auto fs = gen_instance(41, g).fs;
  const GridShift base{{0}}, third{{1}};
  std::vector<WeightedFamily<Rat>> fams(2);
  fams[0] = {base, 1, Rat(1),
             {ShiftedCube{base, 1, {0}}, ShiftedCube{base, 2, {3}}}};
  fams[1] = {third, 1, Rat(1, 2),
             {ShiftedCube{third, 1, {0}}, ShiftedCube{third, 2, {-1}}}};
  const auto res = assemble_domination<Rat>(fams, fs);
  CHECK(res.grids.size() == 2);
  CHECK(res.beta_bound_pass);
  CHECK(res.sparsity_pass);
  CHECK(res.pointwise_pass);
  CHECK(res.certified);
  const auto empty = assemble_domination<Rat>({}, fs);
  CHECK(empty.certified);
  CHECK(empty.empirical_ratio == Rat(0));
  CHECK(empty.grids.empty());

  // Leaf-level family cubes have no child generation to relabel onto.
  std::vector<WeightedFamily<Rat>> leafy(1);
  leafy[0] = {base, 1, Rat(1), {ShiftedCube{base, 3, {0}}}};
  CHECK_THROWS_AS(assemble_domination<Rat>(leafy, fs), SupportLevelError);
}

TEST_CASE("assembly rejects grid mixups") {
  const auto root = RootCube::unit(1, 2);
  const auto f = GridFunction<Rat>::constant(root, Rat(1));
  std::vector<WeightedFamily<Rat>> fams(1);
  fams[0].rho = GridShift{{1}};
  fams[0].m = 1;
  fams[0].weight = Rat(1);
  fams[0].cubes = {ShiftedCube{GridShift{{2}}, 1, {0}}};
  CHECK_THROWS_AS(assemble_domination<Rat>(fams, {f}), GridMismatch);
}

TEST_CASE("cli runs are byte-identical and honor the format") {
  const std::string cli = SHIFTDOM_CLI_PATH;
  const auto dir1 = fresh_dir("cli-a");
  const auto dir2 = fresh_dir("cli-b");
  const std::string flags =
      " gen --d 1 --k 1 --m 1..2 --depth 3 --trials 2 --seed 9 --out ";
  REQUIRE(std::system((cli + flags + dir1.string() + " > /dev/null").c_str()) == 0);
  REQUIRE(std::system((cli + flags + dir2.string() + " > /dev/null").c_str()) == 0);
  int files = 0;
  for (const auto& entry : std::filesystem::directory_iterator(dir1)) {
    ++files;
    const auto twin = dir2 / entry.path().filename();
    REQUIRE(std::filesystem::exists(twin));
    CHECK(read_text_file(entry.path().string()) ==
          read_text_file(twin.string()));
  }
  CHECK(files == 4);

  // dominate consumes a generated file and certifies the fixture.
  const auto one = dir1 / "gen-d1k1J3s9-m1-t0.json";
  REQUIRE(std::filesystem::exists(one));
  const std::string run = cli + " dominate --in " + one.string() + " --out " +
                          dir1.string() + " > /dev/null";
  REQUIRE(std::system(run.c_str()) == 0);
  const auto csv = dir1 / "dominate-file.csv";
  REQUIRE(std::filesystem::exists(csv));
  const auto text = read_text_file(csv.string());
  CHECK(text.rfind("m,alpha_norm,c_theory,empirical_ratio,sparsity_pass\n", 0) ==
        0);
  CHECK(text.find("true") != std::string::npos);

  // weak-type emits the pinned header and exits zero.
  const std::string wt = cli + " weak-type --d 1 --k 1 --m 1 --depth 3" +
                         " --trials 2 --seed 9 --out " + dir2.string() +
                         " > /dev/null";
  REQUIRE(std::system(wt.c_str()) == 0);
  const auto wt_csv = dir2 / "weaktype-d1k1J3s9-m1.csv";
  REQUIRE(std::filesystem::exists(wt_csv));
  CHECK(read_text_file(wt_csv.string())
            .rfind("m,k,d,J,seed,value,bound,pass\n", 0) == 0);

  // dominate leaves a standalone family file that carleson chains on; it
  // matches what the engine produces for the same instance.
  const auto fam_path = dir1 / "family-file-m1-t0.json";
  REQUIRE(std::filesystem::exists(fam_path));
  const auto res = dominate_full(instance_from_json(read_text_file(one.string())));
  CHECK(read_text_file(fam_path.string()) == family_to_json(res.family));
  const std::string car = cli + " carleson --check-sparse --in " +
                          fam_path.string() + " --out " + dir1.string() +
                          " > /dev/null";
  REQUIRE(std::system(car.c_str()) == 0);
  const auto root = RootCube::unit(1, 2);
  const auto fat = SparseFamily::make(
      root, {lattice_root(1), cube1(1, 0), cube1(1, 1)}, Rat(1, 2));
  write_text_file(fam_path.string(), family_to_json(fat));
  const int rc = std::system(car.c_str());
  CHECK(rc != 0);

  std::filesystem::remove_all(dir1);
  std::filesystem::remove_all(dir2);
}
