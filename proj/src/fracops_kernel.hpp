#pragma once

// Product-integration kernel shared by the scalar operators and the
// parallel weight assembly.

#include <cmath>
#include <utility>

#include "vofc/fracops.hpp"

namespace vofc::fracops::detail {

/// Uniform nodes a + shift + i h. The shifted form carries the cell layout
/// along with a moving evaluation point.
struct Grid {
  Grid(const Interval& dom, int cells) : a(dom.a()), b(dom.b()), h(dom.length() / cells), n(cells) {}

  Grid shifted(double delta) const noexcept {
    Grid g = *this;
    g.shift = shift + delta;
    return g;
  }

  double node(int i) const noexcept { return shift == 0.0 ? (i >= n ? b : a + i * h) : a + shift + i * h; }

  double a;
  double b;
  double h;
  int n;
  double shift = 0.0;
};

enum class Kernel {
  integral,    ///< (t - tau)^(mu - 1) / Gamma(mu)
  derivative,  ///< (t - tau)^(-mu) / Gamma(1 - mu)
};

struct CellWeight {
  double exponent;
  double inv_gamma;
};

inline CellWeight cell_weight(Kernel k, double mu) {
  if (k == Kernel::integral) return {mu - 1.0, 1.0 / std::tgamma(mu)};
  return {-mu, 1.0 / std::tgamma(1.0 - mu)};
}

/// int_{s0}^{s1} s^e phi(s) ds for phi affine with phi(s0) = f0, phi(s1) = f1,
/// 0 <= s0 < s1 and e in (-1, 0).
inline double affine_moment(double s0, double s1, double e, double f0, double f1) {
  const double e1 = e + 1.0;
  const double p0 = s0 > 0.0 ? std::pow(s0, e1) : 0.0;
  const double p1 = std::pow(s1, e1);
  const double m0 = (p1 - p0) / e1;
  if (f0 == f1) return f0 * m0;
  const double m1 = (s1 * p1 - s0 * p0) / (e1 + 1.0) - s0 * m0;
  return f0 * m0 + (f1 - f0) / (s1 - s0) * m1;
}

/// Zeroth kernel moment int_{s0}^{s1} s^e ds.
inline double kernel_moment(double s0, double s1, double e) {
  const double e1 = e + 1.0;
  const double p0 = s0 > 0.0 ? std::pow(s0, e1) : 0.0;
  return (std::pow(s1, e1) - p0) / e1;
}

/// Calls fn(p, q) for the cells of [lo, hi] cut at the grid nodes strictly
/// inside. Nodes within a relative 1e-12 of lo or hi are not cut.
template <class Fn>
void for_each_cell(const Grid& g, double lo, double hi, Fn&& fn) {
  const double tol = 1e-12 * (g.b - g.a);
  if (hi - lo <= tol) return;
  int i = static_cast<int>(std::floor((lo - g.a - g.shift) / g.h)) + 1;
  while (g.node(i - 1) > lo + tol) --i;
  while (g.node(i) <= lo + tol) ++i;
  double p = lo;
  for (; g.node(i) < hi - tol; ++i) {
    const double q = g.node(i);
    fn(p, q);
    p = q;
  }
  fn(p, hi);
}

/// sum over cells of int_p^q (t - tau)^e(mu) phi(tau) / Gamma(.) dtau, with
/// mu = f(t, midpoint) frozen per cell; phi comes from factor(p, q).
template <class Factor>
double left_sum(const Factor& factor, const OrderField& f, Kernel k, double lo, double t, const Grid& g) {
  double acc = 0.0;
  for_each_cell(g, lo, t, [&](double p, double q) {
    const double mu = f(t, 0.5 * (p + q));
    const CellWeight w = cell_weight(k, mu);
    const auto [fp, fq] = factor(p, q);
    // s = t - tau maps tau = q to s0 and tau = p to s1
    acc += w.inv_gamma * affine_moment(t - q, t - p, w.exponent, fq, fp);
  });
  return acc;
}

/// left_sum over [lo, hi] with the kernel centred at t >= hi.
template <class Factor>
double left_sum_at(const Factor& factor, const OrderField& f, Kernel k, double lo, double hi, double t, const Grid& g) {
  double acc = 0.0;
  for_each_cell(g, lo, hi, [&](double p, double q) {
    const double mu = f(t, 0.5 * (p + q));
    const CellWeight w = cell_weight(k, mu);
    const auto [fp, fq] = factor(p, q);
    acc += w.inv_gamma * affine_moment(t - q, t - p, w.exponent, fq, fp);
  });
  return acc;
}

/// Mirror of left_sum over [t, hi] with kernel (tau - t)^e(mu), mu = f(midpoint, t).
template <class Factor>
double right_sum(const Factor& factor, const OrderField& f, Kernel k, double t, double hi, const Grid& g) {
  double acc = 0.0;
  for_each_cell(g, t, hi, [&](double p, double q) {
    const double mu = f(0.5 * (p + q), t);
    const CellWeight w = cell_weight(k, mu);
    const auto [fp, fq] = factor(p, q);
    acc += w.inv_gamma * affine_moment(p - t, q - t, w.exponent, fp, fq);
  });
  return acc;
}

}  // namespace vofc::fracops::detail
