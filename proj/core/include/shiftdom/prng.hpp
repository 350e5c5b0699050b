#pragma once

#include <cstdint>

namespace shiftdom {

// SplitMix64. The standard library's uniform_int_distribution is
// implementation-defined, and byte-identical reports across toolchains are
// part of the harness contract, so the whole sampling path is spelled out.
class Prng {
 public:
  explicit Prng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Uniform on [0, n), unbiased via rejection.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = (~0ull / n) * n;
    std::uint64_t v = next_u64();
    while (v >= limit) v = next_u64();
    return v % n;
  }

  // Uniform on [lo, hi], both ends included.
  std::int64_t range(std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(
                    below(static_cast<std::uint64_t>(hi - lo) + 1));
  }

  // True with probability num/den.
  bool chance(std::uint64_t num, std::uint64_t den) { return below(den) < num; }

  // Derives a decorrelated child seed (per trial, per slot).
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream) {
    Prng p(seed ^ (0xd1342543de82ef95ull * (stream + 1)));
    p.next_u64();
    return p.next_u64();
  }

 private:
  std::uint64_t state_;
};

} // namespace shiftdom
