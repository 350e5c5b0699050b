#pragma once

#include "shiftdom/cz_pipeline.hpp"
#include "shiftdom/domination.hpp"
#include "shiftdom/shift_ops.hpp"
#include "shiftdom/sparse_family.hpp"

#include <string>
#include <vector>

namespace shiftdom {

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

// Instances serialize with exact rational values; the float pipeline converts
// after parsing. Layout:
//   {"root": {"d": 1, "side": "1", "corner": ["0"], "depth": 2},
//    "m": 1,
//    "alpha": [{"cube": {"level": 1, "index": [0]}, "value": "1/2"}, ...],
//    "functions": [["1", "0", ...], ...]}
std::string instance_to_json(const ShiftInstance<Rat>& inst);
ShiftInstance<Rat> instance_from_json(const std::string& text);

// {"root": ..., "eta": "1/2", "cubes": [{"level": ..., "index": [...]}, ...]}
std::string family_to_json(const SparseFamily& fam);
SparseFamily family_from_json(const std::string& text);

// [{"rho": [0|1|2, ...], "m": 2, "weight": "3/4", "family": [cubes...]}, ...]
std::string weighted_families_to_json(
    const std::vector<WeightedFamily<Rat>>& families);
std::vector<WeightedFamily<Rat>> weighted_families_from_json(
    const std::string& text);

// Scalar-free snapshot of a domination run, ready for serialization in either
// arithmetic mode. An infinite empirical ratio prints as "inf".
struct DominationSummary {
  int m = 0;
  int k = 1;
  std::vector<DyadicCube> family;
  std::string c_theory;
  std::string empirical_ratio;
  Rat eta{1, 2};
  bool sparsity_pass = false;
  bool certified = false;
};

template <Scalar S>
DominationSummary summarize(const DominationResult<S>& res) {
  DominationSummary s;
  s.m = res.m;
  s.k = res.k;
  s.family.assign(res.family.cubes.begin(), res.family.cubes.end());
  s.c_theory = scalar_to_string(res.c_theory);
  s.empirical_ratio =
      res.ratio_finite ? scalar_to_string(res.empirical_ratio) : "inf";
  s.eta = res.family.eta;
  s.sparsity_pass = res.sparsity_pass;
  s.certified = res.certified;
  return s;
}

std::string domination_to_json(const DominationSummary& s);

} // namespace shiftdom
