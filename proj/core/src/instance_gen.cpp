#include "shiftdom/instance_gen.hpp"

#include "shiftdom/carleson.hpp"
#include "shiftdom/prng.hpp"

#include <map>
#include <vector>

namespace shiftdom {

namespace {

// Uniform cube among all lattice cubes with levels in [lo, hi]: ordinal
// decode against cumulative per-level counts.
DyadicCube draw_cube(Prng& rng, int dim, int lo, int hi) {
  std::uint64_t total = 0;
  for (int l = lo; l <= hi; ++l)
    total += std::uint64_t{1} << (std::uint64_t(dim) * l);
  std::uint64_t r = rng.below(total);
  int level = lo;
  while (r >= (std::uint64_t{1} << (std::uint64_t(dim) * level))) {
    r -= std::uint64_t{1} << (std::uint64_t(dim) * level);
    ++level;
  }
  DyadicCube q;
  q.level = level;
  q.index.resize(dim);
  for (int a = dim - 1; a >= 0; --a) {
    q.index[a] = static_cast<std::int64_t>(r & ((std::uint64_t{1} << level) - 1));
    r >>= level;
  }
  return q;
}

} // namespace

ShiftInstance<Rat> gen_instance(std::uint64_t seed, const GenOptions& opt) {
  if (opt.d < 1 || opt.k < 1 || opt.m < 0 || opt.depth < 1 || opt.support < 0)
    throw ConfigError("gen: nonsensical instance shape");
  if (opt.d * opt.depth > 20)
    throw ConfigError("gen: instance too large for desk scale");
  const int level_lo = opt.m >= 1 ? opt.m : 0;
  const int level_hi = opt.m >= 1 ? opt.depth : opt.depth - 1;
  if (level_lo > level_hi)
    throw ConfigError("gen: depth leaves no admissible coefficient level");

  const RootCube root = RootCube::unit(opt.d, opt.depth);

  Prng support_rng(Prng::derive(seed, 0x10000u + static_cast<std::uint64_t>(opt.m)));
  Prng value_rng(Prng::derive(seed, 1));

  std::map<DyadicCube, Rat> alpha;
  for (int i = 0; i < opt.support; ++i) {
    DyadicCube q = draw_cube(support_rng, opt.d, level_lo, level_hi);
    Rat v = frac(1 + static_cast<long>(value_rng.below(1024)), 1024);
    alpha.emplace(std::move(q), std::move(v)); // first draw wins
  }

  auto seq = CoefficientSequence<Rat>::make(root, std::move(alpha));
  if (opt.normalize && seq.norm != 0) {
    std::map<DyadicCube, Rat> scaled;
    for (const auto& [q, a] : seq.values) scaled[q] = Rat(a / seq.norm);
    seq = CoefficientSequence<Rat>::make(root, std::move(scaled));
  }

  std::vector<GridFunction<Rat>> fs;
  for (int i = 0; i < opt.k; ++i) {
    Prng leaf_rng(Prng::derive(seed, 2 + static_cast<std::uint64_t>(i)));
    std::vector<Rat> leaves(root.leaf_count());
    for (auto& leaf : leaves) {
      if (leaf_rng.chance(1, 4)) continue; // stays zero
      leaf = frac(1 + static_cast<long>(leaf_rng.below(4096)), 4);
    }
    fs.push_back(GridFunction<Rat>::from_leaves(root, std::move(leaves)));
  }

  return ShiftInstance<Rat>::make(root, opt.m, std::move(seq), std::move(fs));
}

} // namespace shiftdom
