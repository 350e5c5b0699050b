#pragma once

#include "shiftdom/rational.hpp"

#include <concepts>

namespace shiftdom {

// The numeric kernel is generic over its value scalar: exact rationals in
// verification mode, doubles in sweep mode. Geometry stays rational in both;
// from_rat is the one bridge between the two worlds.
template <class S>
concept Scalar = std::same_as<S, Rat> || std::same_as<S, double>;

template <Scalar S>
inline constexpr bool exact_mode = std::same_as<S, Rat>;

template <Scalar S> S from_rat(const Rat& r);
template <> inline Rat from_rat<Rat>(const Rat& r) { return r; }
template <> inline double from_rat<double>(const Rat& r) { return r.get_d(); }

inline double as_double(const Rat& x) { return x.get_d(); }
inline double as_double(double x) { return x; }

inline std::string scalar_to_string(const Rat& x) { return rat_to_string(x); }
std::string scalar_to_string(double x); // round-trip precision, in csv.cpp

} // namespace shiftdom
