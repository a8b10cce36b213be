#include "vofc/examples.hpp"

#include <cmath>

#include "vofc/error.hpp"

namespace vofc::examples {

using variational::Lagrangian;
using variational::Lagrangian2;

std::string to_string(SignConvention s) { return s == SignConvention::paper ? "paper" : "derived"; }

SignConvention parse_sign_convention(const std::string& name) {
  if (name == "paper") return SignConvention::paper;
  if (name == "derived") return SignConvention::derived;
  fail(ErrorKind::InvalidProblem, "unknown sign convention '" + name + "'");
}

CombinedSpec default_spec(double b) {
  const Interval dom(0.0, b);
  return CombinedSpec(OrderField::constant(dom, 0.5), OrderField::constant(dom, 0.5), 0.5, 0.5);
}

double forcing(const CombinedSpec& spec, SignConvention s, double t) {
  const double b = spec.domain().b();
  const double al = spec.alpha()(t, t);
  const double be = spec.beta()(t, t);
  const double left = t > 0.0 ? std::pow(t, 1.0 - al) / (2.0 * std::tgamma(2.0 - al)) : 0.0;
  const double right = b - t > 0.0 ? std::pow(b - t, 1.0 - be) / (2.0 * std::tgamma(2.0 - be)) : 0.0;
  return s == SignConvention::paper ? left + right : left - right;
}

variational::ProblemSpec iso_problem(const CombinedSpec& spec, SignConvention s) {
  using Args = Lagrangian::Args;
  auto A = [spec, s](double t) { return forcing(spec, s, t); };
  auto alpha = spec.alpha();
  Lagrangian L([A, alpha](const Args& a) { return alpha(a[0], a[0]) + a[2] * a[2] + A(a[0]) * A(a[0]); },
               {nullptr, [](const Args&) { return 0.0; }, [](const Args& a) { return 2.0 * a[2]; }},
               "alpha(t) + v^2 + A(t)^2");
  Lagrangian g([A](const Args& a) { return a[2] * A(a[0]); },
               {nullptr, [](const Args&) { return 0.0; }, [A](const Args& a) { return A(a[0]); }}, "v A(t)");
  auto c = variational::IsoConstraintI::from_integrand(g, spec.domain(), [A](double t) { return A(t) * A(t); });
  return {spec, std::move(L), variational::TerminalCost(), std::move(c), 0.0};
}

Trajectory iso_candidate(const Interval& domain) {
  return Trajectory::closed_form(domain, [](double t) { return t; }, [](double) { return 1.0; });
}

variational::HolonomicProblem holonomic_problem(const CombinedSpec& spec, SignConvention s) {
  using Args = Lagrangian2::Args;
  using GArgs = variational::HolonomicConstraint::Args;
  auto A = [spec, s](double t) { return forcing(spec, s, t); };
  auto alpha = spec.alpha();
  auto zero = [](const Args&) { return 0.0; };
  Lagrangian2 L(
      [A, alpha](const Args& a) {
        const double d = a[3] - A(a[0]);
        return alpha(a[0], a[0]) + d * d + a[4] * a[4];
      },
      {nullptr, zero, zero, [A](const Args& a) { return 2.0 * (a[3] - A(a[0])); },
       [](const Args& a) { return 2.0 * a[4]; }},
      "alpha(t) + (v1 - A(t))^2 + v2^2");
  variational::HolonomicConstraint g([](const GArgs& a) { return a[1] + a[2] - (a[0] + 1.0); },
                                     {[](const GArgs&) { return -1.0; }, [](const GArgs&) { return 1.0; },
                                      [](const GArgs&) { return 1.0; }},
                                     "x1 + x2 - (t + 1)");
  return {spec, std::move(L), variational::TerminalCost2(), std::move(g), 0.0, 1.0,
          [](double t, double x1) { return t + 1.0 - x1; }};
}

variational::TrajectoryPair holonomic_candidate(const Interval& domain) {
  return {Trajectory::closed_form(domain, [](double t) { return t; }, [](double) { return 1.0; }),
          Trajectory::closed_form(domain, [](double) { return 1.0; }, [](double) { return 0.0; })};
}

IsoAudit audit_iso(const CombinedSpec& spec, SignConvention s, double T, const fracops::QuadratureConfig& cfg,
                   int sweep_points) {
  const auto p = iso_problem(spec, s);
  const auto x = iso_candidate(spec.domain());
  const variational::MultiplierPair m{1.0, kIsoLambda};
  IsoAudit out{s, T, variational::iso_residuals(p, x, T, m, cfg), {}};
  const double a = spec.domain().a(), b = spec.domain().b();
  std::vector<double> grid;
  for (int k = 1; k <= sweep_points; ++k) grid.push_back(a + (b - a) * k / (sweep_points + 1.0));
  out.sweep = solver::sweep_terminal_condition(p, variational::scalarize(p.L, p.g(), m), x, m, grid, cfg);
  out.el_pass = out.report.max_family_sup() <= kAuditTolerance;
  out.ct_pass = std::abs(out.report.scalar("ct1_r2")) <= kAuditTolerance &&
                std::abs(out.report.scalar("ct1_r3")) <= kAuditTolerance;
  return out;
}

HolonomicAudit audit_holonomic(const CombinedSpec& spec, SignConvention s, double T,
                               const fracops::QuadratureConfig& cfg) {
  HolonomicAudit out{s, T,
                     variational::holonomic_residuals(holonomic_problem(spec, s), holonomic_candidate(spec.domain()), T,
                                                      cfg)};
  out.el_pass = out.report.max_family_sup() <= kAuditTolerance && out.report.multiplier->sup_norm <= kAuditTolerance;
  out.brackets_pass = true;
  for (const char* name : {"cth1_2", "cth1_3", "cth1_4", "cth1_5"})
    out.brackets_pass = out.brackets_pass && std::abs(out.report.scalar(name)) <= kAuditTolerance;
  out.terminal_pass = std::abs(out.report.scalar("cth1_1")) <= kAuditTolerance;
  return out;
}

}  // namespace vofc::examples
