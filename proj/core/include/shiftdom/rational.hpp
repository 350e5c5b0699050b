#pragma once

#include <gmpxx.h>

#include <string>

namespace shiftdom {

// Exact arithmetic value types. All geometry (cube sides, corners, measures)
// and every verification-mode scalar is an mpq_class; nothing in the library
// assumes values fit machine words.
using Rat = mpq_class;
using Int = mpz_class;

// Quotient reduced to lowest terms. mpq_class's two-argument constructor
// stores the pair verbatim, and GMP arithmetic is undefined on non-canonical
// values, so any quotient whose parts are not known coprime (or whose
// numerator may be zero with a denominator above 1) must come through here.
inline Rat frac(const Int& num, const Int& den) {
  Rat r(num, den);
  r.canonicalize();
  return r;
}

// 2^e as an exact rational; e may be negative.
inline Rat pow2(long e) {
  Int num = 1, den = 1;
  if (e >= 0) {
    mpz_mul_2exp(num.get_mpz_t(), num.get_mpz_t(), static_cast<mp_bitcnt_t>(e));
  } else {
    mpz_mul_2exp(den.get_mpz_t(), den.get_mpz_t(), static_cast<mp_bitcnt_t>(-e));
  }
  return Rat(num, den); // powers of two are already canonical
}

// b^e by squaring, e >= 0.
inline Rat ipow(const Rat& b, unsigned long e) {
  Rat r = 1, x = b;
  while (e != 0) {
    if (e & 1ul) r *= x;
    x *= x;
    e >>= 1;
  }
  return r;
}

inline Int rat_floor(const Rat& r) {
  Int q;
  mpz_fdiv_q(q.get_mpz_t(), r.get_num_mpz_t(), r.get_den_mpz_t());
  return q;
}

// Canonical text forms: "p/q", or just "p" when the denominator is 1.
// Parsing accepts both and rejects everything else (including q = 0).
Rat rat_from_string(const std::string& text);
std::string rat_to_string(const Rat& r);

} // namespace shiftdom
