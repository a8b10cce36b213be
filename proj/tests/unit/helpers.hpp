#pragma once

#include <cmath>

#include "vofc/fracops.hpp"

namespace testing {

using vofc::fracops::Interval;
using vofc::fracops::OrderField;
using vofc::fracops::Trajectory;

inline Trajectory monomial(Interval d, int k) {
  const double a = d.a();
  return Trajectory::closed_form(
      d, [a, k](double t) { return std::pow(t - a, k); },
      [a, k](double t) { return k == 0 ? 0.0 : k * std::pow(t - a, k - 1); });
}

inline Trajectory constant(Interval d, double c) {
  return Trajectory::closed_form(d, [c](double) { return c; }, [](double) { return 0.0; });
}

inline Trajectory affine(Interval d, double c0, double c1) {
  return Trajectory::closed_form(d, [c0, c1](double t) { return c0 + c1 * t; }, [c1](double) { return c1; });
}

inline OrderField bilinear_order(Interval d) {
  return OrderField(d, [](double t, double tau) { return 0.5 + 0.2 * t * tau; }, "0.5 + 0.2*t*tau");
}

inline double rel_err(double got, double want) { return std::abs(got - want) / std::abs(want); }

}  // namespace testing

namespace testing {

/// Constant-order left Caputo of (t - a)^k: Gamma(k+1)/Gamma(k+1-alpha) (t-a)^(k-alpha).
inline double left_caputo_monomial(int k, double alpha, double s) {
  return std::tgamma(k + 1.0) / std::tgamma(k + 1.0 - alpha) * std::pow(s, k - alpha);
}

/// Constant-order right Caputo of (t - a)^k on [a, b], with s = t - a and
/// r = b - t, from the binomial expansion of (s + u)^(k-1) in u = tau - t.
inline double right_caputo_monomial(int k, double alpha, double s, double r) {
  double sum = 0.0;
  double binom = 1.0;
  for (int j = 0; j < k; ++j) {
    sum += binom * std::pow(s, k - 1 - j) * std::pow(r, j + 1 - alpha) / (j + 1 - alpha);
    binom = binom * (k - 1 - j) / (j + 1);
  }
  return -k * sum / std::tgamma(1.0 - alpha);
}

}  // namespace testing
