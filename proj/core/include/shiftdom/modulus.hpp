#pragma once

#include <functional>

namespace shiftdom {

// Kernel smoothness gauge t -> omega(t) on (0,1], nonnegative and
// nondecreasing. Two parametric presets carry closed-form integrals; anything
// else goes through quadrature.
class ModulusOfContinuity {
 public:
  static ModulusOfContinuity power(double delta);     // t^delta
  static ModulusOfContinuity log_power(double delta); // t^delta (1 + log(1/t))
  static ModulusOfContinuity custom(std::function<double(double)> fn);

  double operator()(double t) const;

  bool has_closed_form() const { return kind_ != Kind::custom; }
  // integral of omega(t) (1 + log(1/t)) dt/t over (0,1], presets only
  double closed_form_integral() const;

 private:
  enum class Kind { custom, power, log_power };
  ModulusOfContinuity() = default;

  Kind kind_ = Kind::custom;
  double delta_ = 0;
  std::function<double(double)> fn_;
};

struct LogDiniReport {
  double series = 0;    // sum of omega(2^-m) (m+1) up to the truncation
  double integral = 0;  // integral of omega(t) (1 + log(1/t)) dt/t
  double ratio = 0;     // series / integral, 0 when the integral vanishes
  bool integral_exact = false;
  // The final retained term omega(2^-M) (M+1) has not decayed below
  // kTailTolerance, so the truncated sum says nothing about convergence.
  bool divergence_warning = false;
};

// Tail-size threshold behind divergence_warning. Small enough that the
// power presets down to delta = 1/4 stay quiet at the default truncation,
// large enough that a non-Dini modulus (terms bounded away from 0) trips it.
inline constexpr double kTailTolerance = 1e-2;

LogDiniReport log_dini_series(const ModulusOfContinuity& omega, int truncation);

} // namespace shiftdom
