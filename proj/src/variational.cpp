#include "vofc/variational.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <sstream>

#include "vofc/error.hpp"
#include "vofc/parallel.hpp"

namespace vofc::variational {

using fracops::OrderField;
using parallel::tabulate_indexed;

// ---------------------------------------------------------------------------
// ScalarField

template <std::size_t N>
ScalarField<N>::ScalarField() : value_([](const Args&) { return 0.0; }), descriptor_("0") {
  for (auto& p : partials_) p = [](const Args&) { return 0.0; };
}

template <std::size_t N>
ScalarField<N>::ScalarField(Fn value, std::array<Fn, N> partials, std::string descriptor)
    : value_(std::move(value)), partials_(std::move(partials)), descriptor_(std::move(descriptor)) {
  if (!value_) fail(ErrorKind::InvalidProblem, "scalar field without a value function");
}

template <std::size_t N>
double ScalarField<N>::operator()(const Args& args) const {
  const double v = value_(args);
  if (!std::isfinite(v)) fail(ErrorKind::NonFiniteValue, "integrand '" + descriptor_ + "' is not finite");
  return v;
}

template <std::size_t N>
double ScalarField<N>::partial(std::size_t i, const Args& args) const {
  if (i < 1 || i > N) fail(ErrorKind::InvalidProblem, "partial derivative index out of range");
  if (const Fn& d = partials_[i - 1]) {
    const double v = d(args);
    if (!std::isfinite(v)) fail(ErrorKind::NonFiniteValue, "partial of '" + descriptor_ + "' is not finite");
    return v;
  }
  const double x = args[i - 1];
  const double h = 1e-6 * (1.0 + std::abs(x));
  auto at = [&](double s) {
    Args shifted = args;
    shifted[i - 1] = s;
    return (*this)(shifted);
  };
  if (i == 1 && time_domain_) {
    if (x - h < time_domain_->a()) return (-3.0 * at(x) + 4.0 * at(x + h) - at(x + 2.0 * h)) / (2.0 * h);
    if (x + h > time_domain_->b()) return (3.0 * at(x) - 4.0 * at(x - h) + at(x - 2.0 * h)) / (2.0 * h);
  }
  return (at(x + h) - at(x - h)) / (2.0 * h);
}

template <std::size_t N>
ScalarField<N> ScalarField<N>::with_time_domain(Interval domain) const {
  ScalarField out = *this;
  out.time_domain_ = domain;
  return out;
}

template class ScalarField<2>;
template class ScalarField<3>;
template class ScalarField<5>;

// ---------------------------------------------------------------------------
// Problem data

double IsoConstraintI::psi_at(double T) const {
  if (!psi) fail(ErrorKind::InvalidProblem, "isoperimetric constraint without psi");
  const double v = psi(T);
  if (!std::isfinite(v)) fail(ErrorKind::NonFiniteValue, "psi(T) is not finite");
  return v;
}

double IsoConstraintI::psi_prime_at(double T) const {
  if (psi_prime) return psi_prime(T);
  const double h = 1e-6 * (1.0 + std::abs(T));
  return (psi_at(T + h) - psi_at(T - h)) / (2.0 * h);
}

IsoConstraintI IsoConstraintI::from_integrand(Lagrangian g, Interval domain, std::function<double(double)> integrand) {
  IsoConstraintI c;
  c.g = std::move(g);
  const double a = domain.a();
  c.psi = [a, integrand](double T) {
    if (T == a) return 0.0;
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, a, T, 20, 1e-13);
  };
  c.psi_prime = integrand;
  return c;
}

void MultiplierPair::validate() const {
  if (lambda0 == 0.0 && lambda == 0.0) fail(ErrorKind::DegenerateMultipliers, "(lambda0, lambda) = (0, 0)");
  if (!(lambda0 >= 0.0)) fail(ErrorKind::InvalidProblem, "lambda0 must be non-negative");
  if (!std::isfinite(lambda0) || !std::isfinite(lambda)) fail(ErrorKind::InvalidProblem, "multipliers must be finite");
}

std::string to_string(Variant v) {
  switch (v) {
    case Variant::iso1: return "iso1";
    case Variant::iso2: return "iso2";
    case Variant::holonomic: return "holonomic";
  }
  return "unknown";
}

const Lagrangian& ProblemSpec::g() const {
  return constraint.index() == 0 ? std::get<IsoConstraintI>(constraint).g : std::get<IsoConstraintII>(constraint).g;
}

const SampledFamily& ResidualReport::family(const std::string& name) const {
  for (const auto& f : families)
    if (f.name == name) return f;
  fail(ErrorKind::InvalidProblem, "no residual family named '" + name + "'");
}

double ResidualReport::scalar(const std::string& name) const {
  for (const auto& s : transversality)
    if (s.name == name) return s.value;
  fail(ErrorKind::InvalidProblem, "no transversality scalar named '" + name + "'");
}

double ResidualReport::max_family_sup() const {
  double m = 0.0;
  for (const auto& f : families) m = std::max(m, f.sup_norm);
  return m;
}

// ---------------------------------------------------------------------------
// Sampling helpers

Path along(const Trajectory& x, const CombinedSpec& spec, const QuadratureConfig& cfg) {
  Path p;
  p.t = fracops::grid_nodes(spec.domain(), cfg.nodes);
  p.x.resize(p.t.size());
  for (std::size_t i = 0; i < p.t.size(); ++i) p.x[i] = x.value(p.t[i]);
  p.v = tabulate_indexed(p.t.size(), [&](std::size_t i) { return fracops::combined_caputo(x, spec, p.t[i], cfg); });
  return p;
}

double trapezoid_to(std::span<const double> t, std::span<const double> f, double T, double integrand_at_T) {
  const double tol = 1e-12 * (t.back() - t.front());
  double acc = 0.0;
  std::size_t k = 0;
  for (; k + 1 < t.size() && t[k + 1] < T - tol; ++k) acc += 0.5 * (t[k + 1] - t[k]) * (f[k] + f[k + 1]);
  if (T - t[k] > tol) acc += 0.5 * (T - t[k]) * (f[k] + integrand_at_T);
  return acc;
}

std::vector<std::size_t> retained_nodes(std::span<const double> t, double lo, double hi, double h) {
  const double tol = 1e-9 * h;
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < t.size(); ++i)
    if (t[i] >= lo + 2.0 * h - tol && t[i] <= hi - 2.0 * h + tol) out.push_back(i);
  return out;
}

namespace {

void require_boundary(const Trajectory& x, double xa, const char* what) {
  const double x0 = x.value(x.domain().a());
  if (std::abs(x0 - xa) > 1e-12) {
    std::ostringstream os;
    os.precision(17);
    os << what << "(a) = " << x0 << " but the boundary condition requires " << xa;
    fail(ErrorKind::BoundaryViolation, os.str());
  }
}

void require_T(const Interval& dom, double T) {
  if (!(T > dom.a() && T <= dom.b() + 1e-12 * dom.length())) {
    std::ostringstream os;
    os.precision(17);
    os << "terminal time " << T << " is outside (" << dom.a() << ", " << dom.b() << "]";
    fail(ErrorKind::InvalidProblem, os.str());
  }
}

double cell_width(const Interval& dom, const QuadratureConfig& cfg) { return dom.length() / cfg.nodes; }

void require_inner_grid(const Interval& dom, double T, const QuadratureConfig& cfg) {
  if ((T - dom.a()) / cell_width(dom, cfg) < 8.0 - 1e-9)
    fail(ErrorKind::InnerGridTooCoarse, "fewer than 8 grid cells in [a, T]");
}

/// d_i F along the path, as a sampled trajectory.
template <std::size_t N, class ArgsAt>
Trajectory sample_partial(const ScalarField<N>& F, std::size_t i, const std::vector<double>& t, ArgsAt args_at) {
  std::vector<double> vals(t.size());
  for (std::size_t k = 0; k < t.size(); ++k) vals[k] = F.partial(i, args_at(k));
  return Trajectory::sampled(t, vals);
}

Trajectory inner(const Lagrangian& F, std::size_t i, const Path& p) {
  return sample_partial(F, i, p.t, [&](std::size_t k) { return Lagrangian::Args{p.t[k], p.x[k], p.v[k]}; });
}

SampledFamily finish(std::string name, const Path& p, const std::vector<std::size_t>& idx,
                     const std::function<double(std::size_t)>& residual_at_node) {
  SampledFamily fam;
  fam.name = std::move(name);
  fam.value = tabulate_indexed(idx.size(), [&](std::size_t j) { return residual_at_node(idx[j]); });
  for (std::size_t j : idx) fam.t.push_back(p.t[j]);
  for (double v : fam.value) {
    if (!std::isfinite(v)) fail(ErrorKind::NonFiniteValue, "residual family " + fam.name);
    fam.sup_norm = std::max(fam.sup_norm, std::abs(v));
  }
  return fam;
}

// Euler-Lagrange operators on an already tabulated inner function u.
double interior_operator(double d2F, const Trajectory& u, const CombinedSpec& spec, double T, double t,
                         const QuadratureConfig& cfg) {
  return d2F + fracops::dual_derivative(u, spec, T, t, cfg);
}

// aD_t^beta uA - TD_t^beta uT for t > T, written as the history of uA on
// [a, T] plus TD_t^beta (uA - uT) so that equal inner functions cancel exactly.
double tail_operator(const Trajectory& uA, const Trajectory& uT, const CombinedSpec& spec, double T, double t,
                     const QuadratureConfig& cfg) {
  const double a = spec.domain().a();
  double out = fracops::left_rl_derivative_between(uA, spec.beta(), a, T, t, cfg);
  if (&uA != &uT) {
    const auto va = uA.values(), vt = uT.values();
    std::vector<double> diff(va.size());
    for (std::size_t k = 0; k < diff.size(); ++k) diff[k] = va[k] - vt[k];
    const auto nodes = uA.nodes();
    out += fracops::left_rl_derivative(Trajectory::sampled({nodes.begin(), nodes.end()}, diff), spec.beta(), T, t,
                                       cfg);
  }
  return out;
}

// [gamma1 tI_T^(1-alpha) u - gamma2 TI_t^(1-beta) u] at t = T. Both integrals
// run over empty ranges at t = T and are evaluated as such.
double bracket_at_T(const Trajectory& u, const CombinedSpec& spec, double T, const QuadratureConfig& cfg) {
  double out = 0.0;
  if (spec.gamma1() != 0.0)
    out += spec.gamma1() * fracops::right_rl_integral(u, fracops::order_complement(spec.alpha()), T, T, cfg);
  if (spec.gamma2() != 0.0)
    out -= spec.gamma2() * fracops::left_rl_integral(u, fracops::order_complement(spec.beta()), T, T, cfg);
  return out;
}

// gamma2 [TI_t^(1-beta) u_T - aI_t^(1-beta) u_a] at t = b.
double bracket_at_b(const Trajectory& u_T, const Trajectory& u_a, const CombinedSpec& spec, double T,
                    const QuadratureConfig& cfg) {
  if (spec.gamma2() == 0.0) return 0.0;
  const Interval& dom = spec.domain();
  const OrderField comp = fracops::order_complement(spec.beta());
  return spec.gamma2() * (fracops::left_rl_integral(u_T, comp, T, dom.b(), cfg) -
                          fracops::left_rl_integral(u_a, comp, dom.a(), dom.b(), cfg));
}

double psi_prime_term(const ProblemSpec& p, double T, MultiplierPair m) {
  if (p.variant() != Variant::iso1) fail(ErrorKind::InvalidProblem, "CT1/CT2 apply to Problem I only");
  return m.lambda == 0.0 ? 0.0 : m.lambda * std::get<IsoConstraintI>(p.constraint).psi_prime_at(T);
}

struct TerminalData {
  double xT;
  double vT;
  double slope;
};

TerminalData terminal(const ProblemSpec& p, const Trajectory& x, double T, const QuadratureConfig& cfg) {
  return {x.value(T), fracops::combined_caputo(x, p.spec, T, cfg), x.slope(T)};
}

}  // namespace

// ---------------------------------------------------------------------------
// Functional and scalarization

double evaluate_functional(const ProblemSpec& p, const Trajectory& x, double T, const QuadratureConfig& cfg) {
  cfg.validate();
  require_boundary(x, p.xa, "x");
  require_T(p.domain(), T);
  const Path path = along(x, p.spec, cfg);
  std::vector<double> f(path.t.size());
  for (std::size_t k = 0; k < f.size(); ++k) {
    if (path.t[k] > T) break;
    f[k] = p.L({path.t[k], path.x[k], path.v[k]});
  }
  const TerminalData td = terminal(p, x, T, cfg);
  const double fT = p.L({T, td.xT, td.vT});
  return trapezoid_to(path.t, f, T, fT) + p.phi({T, td.xT});
}

Lagrangian scalarize(const Lagrangian& L, const Lagrangian& g, MultiplierPair m) {
  m.validate();
  const double l0 = m.lambda0, l = m.lambda;
  using Args = Lagrangian::Args;
  std::array<Lagrangian::Fn, 3> partials;
  for (std::size_t i = 0; i < 3; ++i)
    partials[i] = [L, g, l0, l, i](const Args& a) { return l0 * L.partial(i + 1, a) - l * g.partial(i + 1, a); };
  std::ostringstream os;
  os.precision(17);
  os << l0 << "*(" << L.descriptor() << ") - " << l << "*(" << g.descriptor() << ")";
  return Lagrangian([L, g, l0, l](const Args& a) { return l0 * L(a) - l * g(a); }, partials, os.str());
}

// ---------------------------------------------------------------------------
// Problem I residuals

double el_residual_interior(const Lagrangian& F, const ProblemSpec& p, const Trajectory& x, double T, double t,
                            const QuadratureConfig& cfg) {
  cfg.validate();
  require_T(p.domain(), T);
  require_inner_grid(p.domain(), T, cfg);
  const Path path = along(x, p.spec, cfg);
  const Trajectory u = inner(F, 3, path);
  const double vt = fracops::combined_caputo(x, p.spec, t, cfg);
  return interior_operator(F.partial(2, {t, x.value(t), vt}), u, p.spec, T, t, cfg);
}

double el_residual_tail(const Lagrangian& F, const ProblemSpec& p, const Trajectory& x, double T, double t,
                        const QuadratureConfig& cfg) {
  cfg.validate();
  require_T(p.domain(), T);
  if (p.spec.gamma2() == 0.0) return 0.0;
  require_inner_grid(p.domain(), T, cfg);
  const Path path = along(x, p.spec, cfg);
  const Trajectory u = inner(F, 3, path);
  return p.spec.gamma2() * tail_operator(u, u, p.spec, T, t, cfg);
}

std::array<SampledFamily, 2> el_families(const Lagrangian& F, const ProblemSpec& p, const Trajectory& x, double T,
                                         const QuadratureConfig& cfg, const std::string& prefix) {
  cfg.validate();
  require_T(p.domain(), T);
  require_inner_grid(p.domain(), T, cfg);
  const Interval& dom = p.domain();
  const double h = cell_width(dom, cfg);
  const Path path = along(x, p.spec, cfg);
  const Trajectory u = inner(F, 3, path);
  auto interior = finish(prefix + "interior", path, retained_nodes(path.t, dom.a(), T, h), [&](std::size_t k) {
    return interior_operator(F.partial(2, {path.t[k], path.x[k], path.v[k]}), u, p.spec, T, path.t[k], cfg);
  });
  auto tail = finish(prefix + "tail", path, retained_nodes(path.t, T, dom.b(), h), [&](std::size_t k) {
    if (p.spec.gamma2() == 0.0) return 0.0;
    return p.spec.gamma2() * tail_operator(u, u, p.spec, T, path.t[k], cfg);
  });
  return {std::move(interior), std::move(tail)};
}

std::array<SampledFamily, 2> constraint_el_residuals(const ProblemSpec& p, const Trajectory& x, double T,
                                                     const QuadratureConfig& cfg) {
  return el_families(p.g(), p, x, T, cfg, "constraint_el_");
}

double transversality_ct1_r1(const Lagrangian& F, const ProblemSpec& p, const Trajectory& x, double T,
                             MultiplierPair m, const QuadratureConfig& cfg) {
  cfg.validate();
  require_T(p.domain(), T);
  const TerminalData td = terminal(p, x, T, cfg);
  const TerminalCost phi = p.phi.with_time_domain(p.domain());
  return F({T, td.xT, td.vT}) + phi.partial(1, {T, td.xT}) + phi.partial(2, {T, td.xT}) * td.slope +
         psi_prime_term(p, T, m);
}

Transversality transversality_ct1(const Lagrangian& F, const ProblemSpec& p, const Trajectory& x, double T,
                                  MultiplierPair m, const QuadratureConfig& cfg) {
  cfg.validate();
  require_T(p.domain(), T);
  const TerminalData td = terminal(p, x, T, cfg);
  const TerminalCost phi = p.phi.with_time_domain(p.domain());
  const double d1phi = phi.partial(1, {T, td.xT});
  const double d2phi = phi.partial(2, {T, td.xT});
  const Path path = along(x, p.spec, cfg);
  const Trajectory u = inner(F, 3, path);
  Transversality r;
  r.r1 = F({T, td.xT, td.vT}) + d1phi + d2phi * td.slope + psi_prime_term(p, T, m);
  r.r2 = bracket_at_T(u, p.spec, T, cfg) + d2phi;
  r.r3 = bracket_at_b(u, u, p.spec, T, cfg);
  return r;
}

Transversality transversality_ct2(const Lagrangian& F, const ProblemSpec& p, const Trajectory& x, double T,
                                  MultiplierPair m, const QuadratureConfig& cfg) {
  cfg.validate();
  require_T(p.domain(), T);
  const TerminalData td = terminal(p, x, T, cfg);
  const TerminalCost phi = p.phi.with_time_domain(p.domain());
  const double d1phi = phi.partial(1, {T, td.xT});
  const double d2phi = phi.partial(2, {T, td.xT});
  const Path path = along(x, p.spec, cfg);
  const Trajectory u = inner(F, 3, path);
  const double bracket = bracket_at_T(u, p.spec, T, cfg);
  Transversality r;
  // [gamma2 TI_t u - gamma1 tI_T u]_{t=T} is the negated CT1 bracket
  r.r1 = F({T, td.xT, td.vT}) + d1phi + psi_prime_term(p, T, m) - td.slope * bracket;
  r.r2 = bracket + d2phi;
  r.r3 = bracket_at_b(u, u, p.spec, T, cfg);
  return r;
}

Transversality transversality_ct3(const ProblemSpec& p, const Trajectory& x, double T, MultiplierPair m,
                                  const QuadratureConfig& cfg) {
  cfg.validate();
  require_T(p.domain(), T);
  if (p.variant() != Variant::iso2) fail(ErrorKind::InvalidProblem, "CT3 applies to Problem II only");
  const Interval& dom = p.domain();
  const TerminalData td = terminal(p, x, T, cfg);
  const TerminalCost phi = p.phi.with_time_domain(dom);
  const double d1phi = phi.partial(1, {T, td.xT});
  const double d2phi = phi.partial(2, {T, td.xT});
  const Path path = along(x, p.spec, cfg);
  const Lagrangian F = scalarize(p.L, p.g(), m);
  const Trajectory uL = inner(p.L, 3, path);
  const Trajectory uF = inner(F, 3, path);
  Transversality r;
  r.r1 = p.L({T, td.xT, td.vT}) + d1phi + d2phi * td.slope;
  r.r2 = bracket_at_T(uL, p.spec, T, cfg) + d2phi;
  r.r3 = bracket_at_b(uL, uF, p.spec, T, cfg);
  if (m.lambda != 0.0 && p.spec.gamma1() != 0.0) {
    // -lambda gamma1 tI_b^(1-alpha) d3g at t = b: an empty range
    const Trajectory ug = inner(p.g(), 3, path);
    r.r3 -= m.lambda * p.spec.gamma1() *
            fracops::right_rl_integral(ug, fracops::order_complement(p.spec.alpha()), dom.b(), dom.b(), cfg);
  }
  return r;
}

// ---------------------------------------------------------------------------
// Problem II residuals

namespace {

struct Problem2Inner {
  Lagrangian F;
  Trajectory uL;
  Trajectory uF;
  std::optional<Trajectory> ug;
};

Problem2Inner problem2_inner(const ProblemSpec& p, const Path& path, MultiplierPair m) {
  Lagrangian F = scalarize(p.L, p.g(), m);
  Trajectory uL = inner(p.L, 3, path);
  Trajectory uF = inner(F, 3, path);
  std::optional<Trajectory> ug;
  if (m.lambda != 0.0) ug = inner(p.g(), 3, path);
  return {std::move(F), std::move(uL), std::move(uF), std::move(ug)};
}

double problem2_at(const ProblemSpec& p, const Problem2Inner& in, MultiplierPair m, double T, double t, double xt,
                   double vt, const QuadratureConfig& cfg) {
  const CombinedSpec& s = p.spec;
  const double b = p.domain().b();
  if (t <= T) {
    double r = interior_operator(in.F.partial(2, {t, xt, vt}), in.uL, s, T, t, cfg);
    if (m.lambda != 0.0) r -= m.lambda * fracops::dual_derivative(*in.ug, s, b, t, cfg);
    return r;
  }
  double r = 0.0;
  if (s.gamma2() != 0.0) r = s.gamma2() * tail_operator(in.uF, in.uL, s, T, t, cfg);
  if (m.lambda != 0.0) {
    double g_part = p.g().partial(2, {t, xt, vt});
    if (s.gamma1() != 0.0) g_part += s.gamma1() * fracops::right_rl_derivative(*in.ug, s.alpha(), t, b, cfg);
    r -= m.lambda * g_part;
  }
  return r;
}

}  // namespace

double el_residual_problem2(const ProblemSpec& p, const Trajectory& x, double T, MultiplierPair m, double t,
                            const QuadratureConfig& cfg) {
  cfg.validate();
  require_T(p.domain(), T);
  require_inner_grid(p.domain(), T, cfg);
  const Path path = along(x, p.spec, cfg);
  const Problem2Inner in = problem2_inner(p, path, m);
  return problem2_at(p, in, m, T, t, x.value(t), fracops::combined_caputo(x, p.spec, t, cfg), cfg);
}

std::array<SampledFamily, 2> el_residuals_problem2(const ProblemSpec& p, const Trajectory& x, double T,
                                                   MultiplierPair m, const QuadratureConfig& cfg) {
  cfg.validate();
  require_T(p.domain(), T);
  require_inner_grid(p.domain(), T, cfg);
  const Interval& dom = p.domain();
  const double h = cell_width(dom, cfg);
  const Path path = along(x, p.spec, cfg);
  const Problem2Inner in = problem2_inner(p, path, m);
  auto at = [&](std::size_t k) { return problem2_at(p, in, m, T, path.t[k], path.x[k], path.v[k], cfg); };
  auto interior = finish("el_interior", path, retained_nodes(path.t, dom.a(), T, h), at);
  auto tail = finish("el_tail", path, retained_nodes(path.t, T, dom.b(), h), at);
  return {std::move(interior), std::move(tail)};
}

double isoperimetric_gap(const ProblemSpec& p, const Trajectory& x, double T, const QuadratureConfig& cfg) {
  cfg.validate();
  const Interval& dom = p.domain();
  const bool variant1 = p.variant() == Variant::iso1;
  const double upper = variant1 ? T : dom.b();
  require_T(dom, upper);
  const Path path = along(x, p.spec, cfg);
  std::vector<double> f(path.t.size());
  for (std::size_t k = 0; k < f.size(); ++k) f[k] = p.g()({path.t[k], path.x[k], path.v[k]});
  const double fT = p.g()({upper, x.value(upper), fracops::combined_caputo(x, p.spec, upper, cfg)});
  const double integral = trapezoid_to(path.t, f, upper, fT);
  if (variant1) return integral - std::get<IsoConstraintI>(p.constraint).psi_at(T);
  return integral - std::get<IsoConstraintII>(p.constraint).C;
}

ResidualReport iso_residuals(const ProblemSpec& p, const Trajectory& x, double T, MultiplierPair m,
                             const QuadratureConfig& cfg) {
  m.validate();
  require_boundary(x, p.xa, "x");
  ResidualReport rep;
  rep.T = T;
  rep.grid = cfg;
  if (p.variant() == Variant::iso1) {
    const Lagrangian F = scalarize(p.L, p.g(), m);
    auto fams = el_families(F, p, x, T, cfg);
    rep.families = {std::move(fams[0]), std::move(fams[1])};
    const Transversality c1 = transversality_ct1(F, p, x, T, m, cfg);
    const Transversality c2 = transversality_ct2(F, p, x, T, m, cfg);
    rep.transversality = {{"ct1_r1", c1.r1}, {"ct1_r2", c1.r2}, {"ct1_r3", c1.r3}, {"ct2_r1", c2.r1}};
  } else {
    auto fams = el_residuals_problem2(p, x, T, m, cfg);
    rep.families = {std::move(fams[0]), std::move(fams[1])};
    const Transversality c3 = transversality_ct3(p, x, T, m, cfg);
    rep.transversality = {{"ct3_r1", c3.r1}, {"ct3_r2", c3.r2}, {"ct3_r3", c3.r3}};
  }
  rep.constraint_gap = isoperimetric_gap(p, x, T, cfg);
  return rep;
}

// ---------------------------------------------------------------------------
// Holonomic problems

namespace {

struct HolonomicInner {
  Path p1;
  Path p2;
  Trajectory u4;  ///< d4 L along the candidate
  Trajectory u5;  ///< d5 L along the candidate
};

Lagrangian2::Args args5(const HolonomicInner& in, std::size_t k) {
  return {in.p1.t[k], in.p1.x[k], in.p2.x[k], in.p1.v[k], in.p2.v[k]};
}

HolonomicInner holonomic_inner(const HolonomicProblem& hp, const TrajectoryPair& x, const QuadratureConfig& cfg) {
  Path p1 = along(x.x1, hp.spec, cfg);
  Path p2 = along(x.x2, hp.spec, cfg);
  auto args = [&](std::size_t k) { return Lagrangian2::Args{p1.t[k], p1.x[k], p2.x[k], p1.v[k], p2.v[k]}; };
  Trajectory u4 = sample_partial(hp.L, 4, p1.t, args);
  Trajectory u5 = sample_partial(hp.L, 5, p1.t, args);
  return {std::move(p1), std::move(p2), std::move(u4), std::move(u5)};
}

double d3g_checked(const HolonomicProblem& hp, double t, double x1, double x2) {
  const double d = hp.g.partial(3, {t, x1, x2});
  if (std::abs(d) < 1e-12) {
    std::ostringstream os;
    os.precision(17);
    os << "d3 g vanishes at t = " << t;
    fail(ErrorKind::SingularConstraint, os.str());
  }
  return d;
}

// Numerator of the multiplier formula without the leading minus sign.
double multiplier_numerator(const HolonomicProblem& hp, const HolonomicInner& in, double T, double t,
                            const Lagrangian2::Args& a, const QuadratureConfig& cfg) {
  if (t <= T) return hp.L.partial(3, a) + fracops::dual_derivative(in.u5, hp.spec, T, t, cfg);
  return tail_operator(in.u5, in.u5, hp.spec, T, t, cfg);
}

}  // namespace

double holonomic_multiplier(const HolonomicProblem& hp, const TrajectoryPair& x, double T, double t,
                            const QuadratureConfig& cfg) {
  cfg.validate();
  require_T(hp.domain(), T);
  const double x1 = x.x1.value(t), x2 = x.x2.value(t);
  const double d3g = d3g_checked(hp, t, x1, x2);
  const HolonomicInner in = holonomic_inner(hp, x, cfg);
  const Lagrangian2::Args a{t, x1, x2, fracops::combined_caputo(x.x1, hp.spec, t, cfg),
                            fracops::combined_caputo(x.x2, hp.spec, t, cfg)};
  return -multiplier_numerator(hp, in, T, t, a, cfg) / d3g;
}

ResidualReport holonomic_residuals(const HolonomicProblem& hp, const TrajectoryPair& x, double T,
                                   const QuadratureConfig& cfg) {
  cfg.validate();
  const Interval& dom = hp.domain();
  require_T(dom, T);
  require_inner_grid(dom, T, cfg);
  require_boundary(x.x1, hp.x1a, "x1");
  require_boundary(x.x2, hp.x2a, "x2");

  const HolonomicInner in = holonomic_inner(hp, x, cfg);
  const std::vector<double>& t = in.p1.t;
  double gap = 0.0;
  for (std::size_t k = 0; k < t.size(); ++k) {
    const double gk = hp.g({t[k], in.p1.x[k], in.p2.x[k]});
    if (std::abs(gk) > gap) gap = std::abs(gk);
    if (std::abs(gk) > 1e-8) {
      std::ostringstream os;
      os.precision(17);
      os << "holonomic constraint violated: g = " << gk << " at t = " << t[k];
      fail(ErrorKind::ConstraintViolated, os.str());
    }
    (void)d3g_checked(hp, t[k], in.p1.x[k], in.p2.x[k]);
  }

  const double h = cell_width(dom, cfg);
  const auto idx_in = retained_nodes(t, dom.a(), T, h);
  const auto idx_tail = retained_nodes(t, T, dom.b(), h);
  const CombinedSpec& s = hp.spec;

  // multiplier on every retained node
  std::vector<std::size_t> all = idx_in;
  all.insert(all.end(), idx_tail.begin(), idx_tail.end());
  SampledFamily lam = finish("multiplier", in.p1, all, [&](std::size_t k) {
    const auto a = args5(in, k);
    return -multiplier_numerator(hp, in, T, t[k], a, cfg) / hp.g.partial(3, {t[k], a[1], a[2]});
  });
  std::vector<double> lambda_by_node(t.size(), 0.0);
  for (std::size_t j = 0; j < all.size(); ++j) lambda_by_node[all[j]] = lam.value[j];
  auto lambda_at = [&](std::size_t k) { return lambda_by_node[k]; };

  ResidualReport rep;
  rep.T = T;
  rep.grid = cfg;
  rep.constraint_gap = gap;
  rep.families.push_back(finish("el_x1_interior", in.p1, idx_in, [&](std::size_t k) {
    const auto a = args5(in, k);
    return hp.L.partial(2, a) + fracops::dual_derivative(in.u4, s, T, t[k], cfg) +
           lambda_at(k) * hp.g.partial(2, {t[k], a[1], a[2]});
  }));
  rep.families.push_back(finish("el_x2_interior", in.p1, idx_in, [&](std::size_t k) {
    const auto a = args5(in, k);
    return hp.L.partial(3, a) + fracops::dual_derivative(in.u5, s, T, t[k], cfg) +
           lambda_at(k) * hp.g.partial(3, {t[k], a[1], a[2]});
  }));
  rep.families.back().analytically_zero = true;
  rep.families.push_back(finish("el_x1_tail", in.p1, idx_tail, [&](std::size_t k) {
    if (s.gamma2() == 0.0) return 0.0;
    const auto a = args5(in, k);
    return s.gamma2() * (tail_operator(in.u4, in.u4, s, T, t[k], cfg) +
                         lambda_at(k) * hp.g.partial(2, {t[k], a[1], a[2]}));
  }));
  rep.families.push_back(finish("el_x2_tail", in.p1, idx_tail, [&](std::size_t k) {
    const auto a = args5(in, k);
    return tail_operator(in.u5, in.u5, s, T, t[k], cfg) + lambda_at(k) * hp.g.partial(3, {t[k], a[1], a[2]});
  }));
  rep.families.back().analytically_zero = true;
  rep.multiplier = std::move(lam);

  const double x1T = x.x1.value(T), x2T = x.x2.value(T);
  const double v1T = fracops::combined_caputo(x.x1, s, T, cfg);
  const double v2T = fracops::combined_caputo(x.x2, s, T, cfg);
  const TerminalCost2 phi = hp.phi.with_time_domain(dom);
  const TerminalCost2::Args pa{T, x1T, x2T};
  const double d2phi = phi.partial(2, pa), d3phi = phi.partial(3, pa);
  rep.transversality = {
      {"cth1_1", hp.L({T, x1T, x2T, v1T, v2T}) + phi.partial(1, pa) + d2phi * x.x1.slope(T) + d3phi * x.x2.slope(T)},
      {"cth1_2", bracket_at_T(in.u4, s, T, cfg) + d2phi},
      {"cth1_3", bracket_at_T(in.u5, s, T, cfg) + d3phi},
      {"cth1_4", bracket_at_b(in.u4, in.u4, s, T, cfg)},
      {"cth1_5", bracket_at_b(in.u5, in.u5, s, T, cfg)},
  };
  return rep;
}

}  // namespace vofc::variational
