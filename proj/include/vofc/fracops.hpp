#pragma once

// Variable-order fractional integrals and derivatives evaluated by
// frozen-order product integration on a uniform grid.
//
// Conventions, for an order field f(t, tau) with values in (0, 1):
//
//   left RL integral    _lo I_t^f x(t) = int_lo^t (t-tau)^(f(t,tau)-1) x(tau) / Gamma(f(t,tau)) dtau
//   right RL integral   _t I_hi^f x(t) = int_t^hi (tau-t)^(f(tau,t)-1) x(tau) / Gamma(f(tau,t)) dtau
//   left Caputo         int_a^t (t-tau)^(-f(t,tau)) x'(tau) / Gamma(1-f(t,tau)) dtau
//   right Caputo        int_t^b -(tau-t)^(-f(tau,t)) x'(tau) / Gamma(1-f(tau,t)) dtau
//   left RL derivative  d/dt int_lo^t (t-tau)^(-f(t,tau)) x(tau) / Gamma(1-f(t,tau)) dtau
//   right RL derivative d/dt int_t^hi -(tau-t)^(-f(tau,t)) x(tau) / Gamma(1-f(tau,t)) dtau
//
// On every grid cell the order is frozen at the cell midpoint and the smooth
// factor (x or x') is affine, so the kernel moments are integrated exactly,
// including the cell that touches the singularity at tau = t.

#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace vofc::fracops {

/// Closed, finite interval [a, b] with a < b.
class Interval {
 public:
  Interval(double a, double b);

  double a() const noexcept { return a_; }
  double b() const noexcept { return b_; }
  double length() const noexcept { return b_ - a_; }
  bool contains(double t, double tol = 0.0) const noexcept { return t >= a_ - tol && t <= b_ + tol; }

  friend bool operator==(const Interval&, const Interval&) = default;

 private:
  double a_;
  double b_;
};

/// Nodes a + i (b - a) / cells for i = 0..cells; the last node is exactly b.
std::vector<double> grid_nodes(const Interval& domain, int cells);

/// Values outside (kOrderEpsilon, 1 - kOrderEpsilon) are rejected.
inline constexpr double kOrderEpsilon = 1e-9;

/// A variable fractional order f : [a,b]^2 -> (0,1).
///
/// The field is sampled on a 64x64 lattice when constructed and every
/// evaluation is range-checked again, so quadrature never sees an order
/// outside the admissible range.
class OrderField {
 public:
  using Fn = std::function<double(double, double)>;

  OrderField(Interval domain, Fn eval, std::string descriptor);

  static OrderField constant(Interval domain, double value);

  /// Throws InvalidOrder if the value leaves the admissible range.
  double operator()(double t, double tau) const;

  const Interval& domain() const noexcept { return domain_; }
  const std::string& descriptor() const noexcept { return descriptor_; }

 private:
  Interval domain_;
  Fn eval_;
  std::string descriptor_;
};

/// (t, tau) -> 1 - f(t, tau).
OrderField order_complement(const OrderField& f);

/// A candidate function x on [a, b] with its derivative.
///
/// Sampled trajectories interpolate piecewise-linearly; their slope is the
/// piecewise-constant derivative of the interpolant, left-continuous at the
/// nodes, with slope(a) taken from the first cell.
class Trajectory {
 public:
  enum class Representation { closed_form, sampled };
  using Fn = std::function<double(double)>;

  static Trajectory closed_form(Interval domain, Fn value, Fn slope);
  static Trajectory sampled(std::vector<double> nodes, std::vector<double> values);

  double value(double t) const;
  double slope(double t) const;

  /// Endpoint values of the affine model of x' used on the cell [p, q].
  /// Closed forms use the exact slope at p and q; sampled trajectories use the
  /// secant of the interpolant over the cell.
  std::pair<double, double> slope_on_cell(double p, double q) const;

  Representation representation() const noexcept { return rep_; }
  const Interval& domain() const noexcept { return domain_; }
  std::span<const double> nodes() const noexcept { return nodes_; }
  std::span<const double> values() const noexcept { return values_; }

 private:
  Trajectory(Representation rep, Interval domain) : rep_(rep), domain_(domain) {}
  std::size_t cell_of(double t) const;

  Representation rep_;
  Interval domain_;
  Fn value_;
  Fn slope_;
  std::vector<double> nodes_;
  std::vector<double> values_;
};

/// Parameters (alpha, beta, gamma1, gamma2) of the combined operators.
class CombinedSpec {
 public:
  CombinedSpec(OrderField alpha, OrderField beta, double gamma1, double gamma2);

  const OrderField& alpha() const noexcept { return alpha_; }
  const OrderField& beta() const noexcept { return beta_; }
  double gamma1() const noexcept { return gamma1_; }
  double gamma2() const noexcept { return gamma2_; }
  const Interval& domain() const noexcept { return alpha_.domain(); }

 private:
  OrderField alpha_;
  OrderField beta_;
  double gamma1_;
  double gamma2_;
};

struct QuadratureConfig {
  int nodes = 256;           ///< cells of the uniform history grid
  double diff_step = 0.0;    ///< RL outer-derivative step; 0 selects (b - a) / (4 nodes)
  int refine_factor = 2;     ///< grid multiplier used by convergence probes

  /// Throws InvalidConfig for nodes < 8, refine_factor < 2 or a negative step.
  void validate() const;
  double step_for(const Interval& domain) const;
  /// True when the finite-difference step is coarser than one grid cell.
  bool diff_step_warning(const Interval& domain) const;
};

// Fractional integrals. The short forms integrate from a (left) or up to b
// (right) of the order field's domain; the long forms take explicit limits.
double left_rl_integral(const Trajectory& x, const OrderField& f, double t, const QuadratureConfig& cfg);
double left_rl_integral(const Trajectory& x, const OrderField& f, double lo, double t,
                        const QuadratureConfig& cfg);
double right_rl_integral(const Trajectory& x, const OrderField& f, double t, const QuadratureConfig& cfg);
double right_rl_integral(const Trajectory& x, const OrderField& f, double t, double hi,
                         const QuadratureConfig& cfg);

double left_caputo(const Trajectory& x, const OrderField& f, double t, const QuadratureConfig& cfg);
double right_caputo(const Trajectory& x, const OrderField& f, double t, const QuadratureConfig& cfg);

// RL derivatives differentiate the auxiliary integral by central differences.
// Near the lower limit of a left operator (upper limit of a right one) the
// step shrinks with the distance to that limit; near the opposite end of the
// domain a one-sided three-point stencil is used. The limits themselves are
// EndpointUndefined.
double left_rl_derivative(const Trajectory& x, const OrderField& f, double t, const QuadratureConfig& cfg);
double left_rl_derivative(const Trajectory& x, const OrderField& f, double lo, double t,
                          const QuadratureConfig& cfg);
/// _lo D_t^f x - _hi D_t^f x, the derivative of the history on [lo, hi], for t > hi.
double left_rl_derivative_between(const Trajectory& x, const OrderField& f, double lo, double hi, double t,
                                  const QuadratureConfig& cfg);
double right_rl_derivative(const Trajectory& x, const OrderField& f, double t, const QuadratureConfig& cfg);
double right_rl_derivative(const Trajectory& x, const OrderField& f, double t, double hi,
                           const QuadratureConfig& cfg);

/// gamma1 * left Caputo (alpha) + gamma2 * right Caputo (beta). Terms with a
/// zero weight are not evaluated.
double combined_caputo(const Trajectory& x, const CombinedSpec& spec, double t, const QuadratureConfig& cfg);
double combined_rl(const Trajectory& x, const CombinedSpec& spec, double t, const QuadratureConfig& cfg);

/// gamma2 * _aD_t^beta y(t) + gamma1 * _tD_c^alpha y(t).
double dual_derivative(const Trajectory& y, const CombinedSpec& spec, double c, double t,
                       const QuadratureConfig& cfg);

enum class Side { left, right };

struct IbpCheck {
  double lhs = 0.0;
  double rhs_plus_boundary = 0.0;
  double residual = 0.0;
};

/// Evaluates both sides of the variable-order integration-by-parts identity
///
///   left:  int y  cD_left x  = int x  D_right y + [x  I_right^(1-f) y]_a^b
///   right: int y  cD_right x = int x  D_left y  - [x  I_left^(1-f) y]_a^b
///
/// The outer integrals use composite Gauss-Legendre on a smootherstep-graded
/// map of [a, b], which keeps quadrature points off the endpoints where the
/// RL derivatives are singular.
IbpCheck check_integration_by_parts(const Trajectory& x, const Trajectory& y, const OrderField& f, Side side,
                                    const QuadratureConfig& cfg);

}  // namespace vofc::fracops
