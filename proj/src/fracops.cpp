#include "vofc/fracops.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <sstream>

#include "fracops_kernel.hpp"
#include "vofc/error.hpp"

namespace vofc::fracops {

namespace {

std::string fmt_point(double t, double tau) {
  std::ostringstream os;
  os.precision(17);
  os << "(" << t << ", " << tau << ")";
  return os.str();
}

}  // namespace

Interval::Interval(double a, double b) : a_(a), b_(b) {
  if (!std::isfinite(a) || !std::isfinite(b) || !(a < b)) {
    std::ostringstream os;
    os << "need finite a < b, got [" << a << ", " << b << "]";
    fail(ErrorKind::InvalidInterval, os.str());
  }
}

std::vector<double> grid_nodes(const Interval& domain, int cells) {
  const detail::Grid grid(domain, cells);
  std::vector<double> out(static_cast<std::size_t>(cells) + 1);
  for (int i = 0; i <= cells; ++i) out[static_cast<std::size_t>(i)] = grid.node(i);
  return out;
}

// ---------------------------------------------------------------------------
// OrderField

OrderField::OrderField(Interval domain, Fn eval, std::string descriptor)
    : domain_(domain), eval_(std::move(eval)), descriptor_(std::move(descriptor)) {
  if (!eval_) fail(ErrorKind::InvalidOrder, "empty order field '" + descriptor_ + "'");
  constexpr int kLattice = 64;
  for (int i = 0; i < kLattice; ++i) {
    const double t = domain_.a() + domain_.length() * i / (kLattice - 1);
    for (int j = 0; j < kLattice; ++j) {
      const double tau = domain_.a() + domain_.length() * j / (kLattice - 1);
      (void)(*this)(t, tau);
    }
  }
}

OrderField OrderField::constant(Interval domain, double value) {
  std::ostringstream os;
  os.precision(17);
  os << value;
  return OrderField(domain, [value](double, double) { return value; }, os.str());
}

double OrderField::operator()(double t, double tau) const {
  const double v = eval_(t, tau);
  if (!(v > kOrderEpsilon && v < 1.0 - kOrderEpsilon)) {
    std::ostringstream os;
    os.precision(17);
    os << "order '" << descriptor_ << "' = " << v << " at " << fmt_point(t, tau) << " is outside (0, 1)";
    fail(ErrorKind::InvalidOrder, os.str());
  }
  return v;
}

OrderField order_complement(const OrderField& f) {
  return OrderField(
      f.domain(), [f](double t, double tau) { return 1.0 - f(t, tau); }, "1 - (" + f.descriptor() + ")");
}

// ---------------------------------------------------------------------------
// Trajectory

Trajectory Trajectory::closed_form(Interval domain, Fn value, Fn slope) {
  if (!value || !slope) fail(ErrorKind::InvalidProblem, "closed-form trajectory needs value and slope");
  Trajectory x(Representation::closed_form, domain);
  x.value_ = std::move(value);
  x.slope_ = std::move(slope);
  return x;
}

Trajectory Trajectory::sampled(std::vector<double> nodes, std::vector<double> values) {
  if (nodes.size() < 2 || nodes.size() != values.size())
    fail(ErrorKind::InvalidProblem, "sampled trajectory needs at least two nodes and one value per node");
  for (std::size_t i = 1; i < nodes.size(); ++i)
    if (!(nodes[i] > nodes[i - 1])) fail(ErrorKind::InvalidProblem, "trajectory nodes must be strictly increasing");
  for (double v : values)
    if (!std::isfinite(v)) fail(ErrorKind::NonFiniteValue, "trajectory sample is not finite");
  Trajectory x(Representation::sampled, Interval(nodes.front(), nodes.back()));
  x.nodes_ = std::move(nodes);
  x.values_ = std::move(values);
  return x;
}

std::size_t Trajectory::cell_of(double t) const {
  // Cell i spans (nodes[i], nodes[i+1]]; t = nodes[0] belongs to cell 0.
  const auto it = std::lower_bound(nodes_.begin(), nodes_.end(), t);
  const auto idx = static_cast<std::size_t>(it - nodes_.begin());
  if (idx == 0) return 0;
  return std::min(idx - 1, nodes_.size() - 2);
}

double Trajectory::value(double t) const {
  const double tol = 1e-12 * domain_.length();
  if (!domain_.contains(t, tol)) {
    std::ostringstream os;
    os.precision(17);
    os << "trajectory probed at " << t << " outside [" << domain_.a() << ", " << domain_.b() << "]";
    fail(ErrorKind::EndpointUndefined, os.str());
  }
  if (rep_ == Representation::closed_form) {
    const double v = value_(t);
    if (!std::isfinite(v)) fail(ErrorKind::NonFiniteValue, "trajectory value is not finite");
    return v;
  }
  const std::size_t i = cell_of(t);
  const double p = nodes_[i], q = nodes_[i + 1];
  if (t == p) return values_[i];
  if (t == q) return values_[i + 1];
  const double w = (t - p) / (q - p);
  return values_[i] + w * (values_[i + 1] - values_[i]);
}

double Trajectory::slope(double t) const {
  const double tol = 1e-12 * domain_.length();
  if (!domain_.contains(t, tol)) fail(ErrorKind::EndpointUndefined, "trajectory slope probed outside its domain");
  if (rep_ == Representation::closed_form) {
    const double v = slope_(t);
    if (!std::isfinite(v)) fail(ErrorKind::NonFiniteValue, "trajectory slope is not finite");
    return v;
  }
  const std::size_t i = cell_of(t);
  return (values_[i + 1] - values_[i]) / (nodes_[i + 1] - nodes_[i]);
}

std::pair<double, double> Trajectory::slope_on_cell(double p, double q) const {
  if (rep_ == Representation::closed_form) return {slope(p), slope(q)};
  const double s = (value(q) - value(p)) / (q - p);
  return {s, s};
}

// ---------------------------------------------------------------------------
// CombinedSpec / QuadratureConfig

CombinedSpec::CombinedSpec(OrderField alpha, OrderField beta, double gamma1, double gamma2)
    : alpha_(std::move(alpha)), beta_(std::move(beta)), gamma1_(gamma1), gamma2_(gamma2) {
  if (!(gamma1 >= 0.0 && gamma1 <= 1.0 && gamma2 >= 0.0 && gamma2 <= 1.0))
    fail(ErrorKind::InvalidProblem, "gamma weights must lie in [0, 1]");
  if (!(alpha_.domain() == beta_.domain()))
    fail(ErrorKind::InvalidInterval, "alpha and beta must share the same interval");
}

void QuadratureConfig::validate() const {
  if (nodes < 8) fail(ErrorKind::InvalidConfig, "quadrature needs at least 8 cells");
  if (refine_factor < 2) fail(ErrorKind::InvalidConfig, "refine_factor must be at least 2");
  if (!(diff_step >= 0.0) || !std::isfinite(diff_step))
    fail(ErrorKind::InvalidConfig, "diff_step must be a non-negative finite number");
}

double QuadratureConfig::step_for(const Interval& domain) const {
  return diff_step > 0.0 ? diff_step : domain.length() / (4.0 * nodes);
}

bool QuadratureConfig::diff_step_warning(const Interval& domain) const {
  return step_for(domain) > domain.length() / nodes;
}

// ---------------------------------------------------------------------------
// Operators

namespace {

using detail::Grid;
using detail::Kernel;

void require_in_domain(const Interval& dom, double t, const char* what) {
  if (!dom.contains(t, 1e-12 * dom.length())) {
    std::ostringstream os;
    os.precision(17);
    os << what << " evaluated at t = " << t << " outside [" << dom.a() << ", " << dom.b() << "]";
    fail(ErrorKind::EndpointUndefined, os.str());
  }
}

void require_same_domain(const Trajectory& x, const OrderField& f) {
  const Interval& dx = x.domain();
  const Interval& df = f.domain();
  const double tol = 1e-12 * df.length();
  if (std::abs(dx.a() - df.a()) > tol || std::abs(dx.b() - df.b()) > tol)
    fail(ErrorKind::InvalidInterval, "trajectory and order field live on different intervals");
}

double finite_or_fail(double v, const char* what) {
  if (!std::isfinite(v)) fail(ErrorKind::NonFiniteValue, std::string(what) + " produced a non-finite value");
  return v;
}

auto value_factor(const Trajectory& x) {
  return [&x](double p, double q) { return std::pair{x.value(p), x.value(q)}; };
}

auto slope_factor(const Trajectory& x) {
  return [&x](double p, double q) { return x.slope_on_cell(p, q); };
}

// Shared step selection for RL derivatives. `room_singular` is the distance
// from t to the limit at which the auxiliary integral starts; `room_other`
// is the distance to the opposite end of the domain. Returns the step and the
// stencil: 0 central, +1 one-sided away from the singular limit.
struct Stencil {
  double h;
  int kind;
};

Stencil choose_stencil(double h_d, double room_singular, double room_other) {
  constexpr double kShrink = 0.25;
  const double h = std::min(h_d, kShrink * room_singular);
  if (h <= room_other) return {h, 0};
  return {h, 1};
}

// Inside the shrink zone the auxiliary integral behaves like a power of the
// distance to its limit, so the h^2 term is removed by Richardson extrapolation.
template <class Aux>
double central_difference(const Aux& aux, double t, double h, bool extrapolate) {
  const double coarse = (aux(t + h) - aux(t - h)) / (2.0 * h);
  if (!extrapolate) return coarse;
  const double hh = 0.5 * h;
  const double fine = (aux(t + hh) - aux(t - hh)) / (2.0 * hh);
  return (4.0 * fine - coarse) / 3.0;
}

}  // namespace

double left_rl_integral(const Trajectory& x, const OrderField& f, double t, const QuadratureConfig& cfg) {
  return left_rl_integral(x, f, f.domain().a(), t, cfg);
}

double left_rl_integral(const Trajectory& x, const OrderField& f, double lo, double t, const QuadratureConfig& cfg) {
  cfg.validate();
  require_same_domain(x, f);
  require_in_domain(f.domain(), lo, "left RL integral");
  require_in_domain(f.domain(), t, "left RL integral");
  if (t <= lo) return 0.0;
  const Grid grid(f.domain(), cfg.nodes);
  return finite_or_fail(detail::left_sum(value_factor(x), f, Kernel::integral, lo, t, grid), "left RL integral");
}

double right_rl_integral(const Trajectory& x, const OrderField& f, double t, const QuadratureConfig& cfg) {
  return right_rl_integral(x, f, t, f.domain().b(), cfg);
}

double right_rl_integral(const Trajectory& x, const OrderField& f, double t, double hi,
                         const QuadratureConfig& cfg) {
  cfg.validate();
  require_same_domain(x, f);
  require_in_domain(f.domain(), t, "right RL integral");
  require_in_domain(f.domain(), hi, "right RL integral");
  if (t >= hi) return 0.0;
  const Grid grid(f.domain(), cfg.nodes);
  return finite_or_fail(detail::right_sum(value_factor(x), f, Kernel::integral, t, hi, grid), "right RL integral");
}

double left_caputo(const Trajectory& x, const OrderField& f, double t, const QuadratureConfig& cfg) {
  cfg.validate();
  require_same_domain(x, f);
  require_in_domain(f.domain(), t, "left Caputo derivative");
  const double a = f.domain().a();
  if (t <= a) return 0.0;
  const Grid grid(f.domain(), cfg.nodes);
  return finite_or_fail(detail::left_sum(slope_factor(x), f, Kernel::derivative, a, t, grid),
                        "left Caputo derivative");
}

double right_caputo(const Trajectory& x, const OrderField& f, double t, const QuadratureConfig& cfg) {
  cfg.validate();
  require_same_domain(x, f);
  require_in_domain(f.domain(), t, "right Caputo derivative");
  const double b = f.domain().b();
  if (t >= b) return 0.0;
  const Grid grid(f.domain(), cfg.nodes);
  return finite_or_fail(-detail::right_sum(slope_factor(x), f, Kernel::derivative, t, b, grid),
                        "right Caputo derivative");
}

double left_rl_derivative(const Trajectory& x, const OrderField& f, double t, const QuadratureConfig& cfg) {
  return left_rl_derivative(x, f, f.domain().a(), t, cfg);
}

double left_rl_derivative(const Trajectory& x, const OrderField& f, double lo, double t,
                          const QuadratureConfig& cfg) {
  cfg.validate();
  require_same_domain(x, f);
  const Interval& dom = f.domain();
  require_in_domain(dom, lo, "left RL derivative");
  if (!(t > lo && t < dom.b())) {
    std::ostringstream os;
    os.precision(17);
    os << "left RL derivative from " << lo << " is undefined at t = " << t;
    fail(ErrorKind::EndpointUndefined, os.str());
  }
  const Grid grid(dom, cfg.nodes);
  const auto fac = value_factor(x);
  auto aux = [&](double s) {
    return s <= lo ? 0.0 : detail::left_sum(fac, f, Kernel::derivative, lo, s, grid.shifted(s - t));
  };
  const double h_d = cfg.step_for(dom);
  const Stencil st = choose_stencil(h_d, t - lo, dom.b() - t);
  double d;
  if (st.kind == 0) {
    d = central_difference(aux, t, st.h, st.h < h_d);
  } else {
    // backward three-point; t - 2h stays at or above lo by the shrink rule
    d = (3.0 * aux(t) - 4.0 * aux(t - st.h) + aux(t - 2.0 * st.h)) / (2.0 * st.h);
  }
  return finite_or_fail(d, "left RL derivative");
}

double left_rl_derivative_between(const Trajectory& x, const OrderField& f, double lo, double hi, double t,
                                  const QuadratureConfig& cfg) {
  cfg.validate();
  require_same_domain(x, f);
  const Interval& dom = f.domain();
  require_in_domain(dom, lo, "left RL derivative");
  require_in_domain(dom, hi, "left RL derivative");
  require_in_domain(dom, t, "left RL derivative");
  if (!(t > hi)) {
    std::ostringstream os;
    os.precision(17);
    os << "history derivative over [" << lo << ", " << hi << "] needs t > " << hi << ", got " << t;
    fail(ErrorKind::EndpointUndefined, os.str());
  }
  if (hi <= lo) return 0.0;
  const Grid grid(dom, cfg.nodes);
  const auto fac = value_factor(x);
  auto aux = [&](double s) { return detail::left_sum_at(fac, f, Kernel::derivative, lo, hi, s, grid); };
  const double h_d = cfg.step_for(dom);
  const Stencil st = choose_stencil(h_d, t - hi, dom.b() - t);
  double d;
  if (st.kind == 0) {
    d = central_difference(aux, t, st.h, st.h < h_d);
  } else {
    d = (3.0 * aux(t) - 4.0 * aux(t - st.h) + aux(t - 2.0 * st.h)) / (2.0 * st.h);
  }
  return finite_or_fail(d, "left RL derivative");
}

double right_rl_derivative(const Trajectory& x, const OrderField& f, double t, const QuadratureConfig& cfg) {
  return right_rl_derivative(x, f, t, f.domain().b(), cfg);
}

double right_rl_derivative(const Trajectory& x, const OrderField& f, double t, double hi,
                           const QuadratureConfig& cfg) {
  cfg.validate();
  require_same_domain(x, f);
  const Interval& dom = f.domain();
  require_in_domain(dom, hi, "right RL derivative");
  if (!(t < hi && t > dom.a())) {
    std::ostringstream os;
    os.precision(17);
    os << "right RL derivative up to " << hi << " is undefined at t = " << t;
    fail(ErrorKind::EndpointUndefined, os.str());
  }
  const Grid grid(dom, cfg.nodes);
  const auto fac = value_factor(x);
  auto aux = [&](double s) {
    return s >= hi ? 0.0 : -detail::right_sum(fac, f, Kernel::derivative, s, hi, grid.shifted(s - t));
  };
  const double h_d = cfg.step_for(dom);
  const Stencil st = choose_stencil(h_d, hi - t, t - dom.a());
  double d;
  if (st.kind == 0) {
    d = central_difference(aux, t, st.h, st.h < h_d);
  } else {
    d = (-3.0 * aux(t) + 4.0 * aux(t + st.h) - aux(t + 2.0 * st.h)) / (2.0 * st.h);
  }
  return finite_or_fail(d, "right RL derivative");
}

double combined_caputo(const Trajectory& x, const CombinedSpec& spec, double t, const QuadratureConfig& cfg) {
  double out = 0.0;
  if (spec.gamma1() != 0.0) out = spec.gamma1() * left_caputo(x, spec.alpha(), t, cfg);
  if (spec.gamma2() != 0.0) {
    const double r = spec.gamma2() * right_caputo(x, spec.beta(), t, cfg);
    out = spec.gamma1() != 0.0 ? out + r : r;
  }
  return out;
}

double combined_rl(const Trajectory& x, const CombinedSpec& spec, double t, const QuadratureConfig& cfg) {
  double out = 0.0;
  if (spec.gamma1() != 0.0) out = spec.gamma1() * left_rl_derivative(x, spec.alpha(), t, cfg);
  if (spec.gamma2() != 0.0) {
    const double r = spec.gamma2() * right_rl_derivative(x, spec.beta(), t, cfg);
    out = spec.gamma1() != 0.0 ? out + r : r;
  }
  return out;
}

double dual_derivative(const Trajectory& y, const CombinedSpec& spec, double c, double t,
                       const QuadratureConfig& cfg) {
  const Interval& dom = spec.domain();
  if (!(c > dom.a() && c <= dom.b() + 1e-12 * dom.length()))
    fail(ErrorKind::EndpointUndefined, "dual derivative needs c in (a, b]");
  double out = 0.0;
  if (spec.gamma2() != 0.0) out = spec.gamma2() * left_rl_derivative(y, spec.beta(), dom.a(), t, cfg);
  if (spec.gamma1() != 0.0) {
    const double r = spec.gamma1() * right_rl_derivative(y, spec.alpha(), t, c, cfg);
    out = spec.gamma2() != 0.0 ? out + r : r;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Integration by parts

namespace {

// Smootherstep grading: w(s) = s^3 (10 - 15 s + 6 s^2), w'(s) = 30 s^2 (1 - s)^2.
double graded_integral(const Interval& dom, int panels, const std::function<double(double)>& g) {
  using boost::math::quadrature::gauss;
  double total = 0.0;
  for (int k = 0; k < panels; ++k) {
    const double s0 = static_cast<double>(k) / panels;
    const double s1 = static_cast<double>(k + 1) / panels;
    total += gauss<double, 8>::integrate(
        [&](double s) {
          const double w = s * s * s * (10.0 - 15.0 * s + 6.0 * s * s);
          const double dw = 30.0 * s * s * (1.0 - s) * (1.0 - s);
          if (dw == 0.0) return 0.0;
          return g(dom.a() + dom.length() * w) * dom.length() * dw;
        },
        s0, s1);
  }
  return total;
}

}  // namespace

IbpCheck check_integration_by_parts(const Trajectory& x, const Trajectory& y, const OrderField& f, Side side,
                                    const QuadratureConfig& cfg) {
  cfg.validate();
  require_same_domain(x, f);
  require_same_domain(y, f);
  const Interval& dom = f.domain();
  const int panels = std::max(8, cfg.nodes / 8);
  const OrderField comp = order_complement(f);

  IbpCheck out;
  if (side == Side::left) {
    out.lhs = graded_integral(dom, panels, [&](double t) { return y.value(t) * left_caputo(x, f, t, cfg); });
    const double body =
        graded_integral(dom, panels, [&](double t) { return x.value(t) * right_rl_derivative(y, f, t, cfg); });
    // [x I_right y]_a^b: the right integral vanishes at t = b.
    const double bracket = 0.0 - x.value(dom.a()) * right_rl_integral(y, comp, dom.a(), cfg);
    out.rhs_plus_boundary = body + bracket;
  } else {
    out.lhs = graded_integral(dom, panels, [&](double t) { return y.value(t) * right_caputo(x, f, t, cfg); });
    const double body =
        graded_integral(dom, panels, [&](double t) { return x.value(t) * left_rl_derivative(y, f, t, cfg); });
    // [x I_left y]_a^b: the left integral vanishes at t = a.
    const double bracket = x.value(dom.b()) * left_rl_integral(y, comp, dom.b(), cfg) - 0.0;
    out.rhs_plus_boundary = body - bracket;
  }
  out.residual = out.lhs - out.rhs_plus_boundary;
  if (!std::isfinite(out.residual)) fail(ErrorKind::NonFiniteValue, "integration-by-parts check");
  return out;
}

}  // namespace vofc::fracops
