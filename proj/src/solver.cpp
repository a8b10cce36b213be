#include "vofc/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <sstream>

#include "vofc/parallel.hpp"

namespace vofc::solver {

using variational::HolonomicConstraint;
using variational::IsoConstraintI;
using variational::IsoConstraintII;
using variational::Lagrangian2;
using variational::Variant;

// ---------------------------------------------------------------------------
// Plan

void DiscretizationPlan::validate(const Interval& domain) const {
  if (nodes < 9) fail(ErrorKind::InvalidConfig, "a discretization needs at least 9 nodes");
  if (!initial.empty() && static_cast<int>(initial.size()) != nodes)
    fail(ErrorKind::InvalidConfig, "initial guess has " + std::to_string(initial.size()) + " values for " +
                                       std::to_string(nodes) + " nodes");
  const Box box = terminal_box(domain);
  if (!(box.lo > domain.a() && box.lo <= box.hi && box.hi <= domain.b()))
    fail(ErrorKind::InvalidConfig, "terminal-time box must lie in (a, b]");
  if (!(root_box.lo < root_box.hi)) fail(ErrorKind::InvalidConfig, "root box must have lo < hi");
}

Box DiscretizationPlan::terminal_box(const Interval& domain) const {
  if (T_box) return *T_box;
  return {domain.a() + 8.0 * domain.length() / cells(), domain.b()};
}

Trajectory SolveReport::trajectory() const { return Trajectory::sampled(t, x); }

std::optional<Trajectory> SolveReport::trajectory2() const {
  if (x2.empty()) return std::nullopt;
  return Trajectory::sampled(t, x2);
}

// ---------------------------------------------------------------------------
// Nelder-Mead

namespace {

double simplex_diameter(const std::vector<std::vector<double>>& s, std::size_t best) {
  double d = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t j = 0; j < s[i].size(); ++j) d = std::max(d, std::abs(s[i][j] - s[best][j]));
  return d;
}

struct Run {
  std::vector<double> x;
  double f;
  long iterations = 0;
  double diameter = 0.0;
  bool converged = false;
};

Run nelder_mead_run(const std::function<double(const std::vector<double>&)>& f, const std::vector<double>& x0,
                    double f0, double step, double tol, long& evals, long max_evals) {
  const std::size_t n = x0.size();
  const double dn = static_cast<double>(n);
  const double c_reflect = 1.0;
  const double c_expand = 1.0 + 2.0 / dn;
  const double c_contract = 0.75 - 1.0 / (2.0 * dn);
  const double c_shrink = 1.0 - 1.0 / dn;

  std::vector<std::vector<double>> s(n + 1, x0);
  std::vector<double> fs(n + 1, f0);
  auto eval = [&](const std::vector<double>& x) {
    ++evals;
    return f(x);
  };
  for (std::size_t i = 0; i < n; ++i) {
    s[i + 1][i] += step * std::max(1.0, std::abs(x0[i]));
    fs[i + 1] = eval(s[i + 1]);
  }

  std::vector<std::size_t> order(n + 1);
  std::vector<double> centroid(n), xr(n), xe(n), xc(n);
  Run run;
  while (true) {
    std::iota(order.begin(), order.end(), 0);
    // ties keep the older vertex first, which makes the search reproducible
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fs[a] < fs[b]; });
    const std::size_t best = order.front(), worst = order.back(), second = order[n - 1];
    run.diameter = simplex_diameter(s, best);
    const double spread = fs[worst] - fs[best];
    if (run.diameter <= tol && spread <= tol * (1.0 + std::abs(fs[best]))) {
      run.converged = true;
      break;
    }
    if (evals >= max_evals) break;
    ++run.iterations;

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t j = 0; j < n; ++j) centroid[j] += s[order[k]][j] / dn;
    for (std::size_t j = 0; j < n; ++j) xr[j] = centroid[j] + c_reflect * (centroid[j] - s[worst][j]);
    const double fr = eval(xr);
    if (fr < fs[best]) {
      for (std::size_t j = 0; j < n; ++j) xe[j] = centroid[j] + c_expand * (xr[j] - centroid[j]);
      const double fe = eval(xe);
      if (fe < fr) {
        s[worst] = xe;
        fs[worst] = fe;
      } else {
        s[worst] = xr;
        fs[worst] = fr;
      }
      continue;
    }
    if (fr < fs[second]) {
      s[worst] = xr;
      fs[worst] = fr;
      continue;
    }
    const bool outside = fr < fs[worst];
    for (std::size_t j = 0; j < n; ++j)
      xc[j] = outside ? centroid[j] + c_contract * (xr[j] - centroid[j])
                      : centroid[j] - c_contract * (centroid[j] - s[worst][j]);
    const double fc = eval(xc);
    if (fc < (outside ? fr : fs[worst])) {
      s[worst] = xc;
      fs[worst] = fc;
      continue;
    }
    for (std::size_t k = 1; k <= n; ++k) {
      std::vector<double>& v = s[order[k]];
      for (std::size_t j = 0; j < n; ++j) v[j] = s[best][j] + c_shrink * (v[j] - s[best][j]);
      fs[order[k]] = eval(v);
    }
  }
  const std::size_t best = order.front();
  run.x = s[best];
  run.f = fs[best];
  return run;
}

}  // namespace

NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f, std::vector<double> x0,
                             double step, double tol, long max_evaluations) {
  NelderMeadResult out;
  out.evaluations = 1;
  out.f = f(x0);
  out.x = std::move(x0);
  if (out.x.empty()) {
    out.converged = true;
    return out;
  }
  double current_step = step;
  for (int restart = 0; restart < 50; ++restart) {
    const Run run = nelder_mead_run(f, out.x, out.f, current_step, tol, out.evaluations, max_evaluations);
    out.iterations += run.iterations;
    out.diameter = run.diameter;
    out.converged = run.converged;
    const double gain = out.f - run.f;
    if (run.f <= out.f) {
      out.x = run.x;
      out.f = run.f;
    }
    if (!run.converged || out.evaluations >= max_evaluations) break;
    // a converged restart that no longer moves the best point ends the search
    if (gain <= tol * (1.0 + std::abs(out.f)) && restart > 0) break;
    current_step = std::max(10.0 * tol, 0.5 * current_step);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Discretized objectives

namespace {

/// Linear interpolation on the uniform grid.
double interpolate(const std::vector<double>& t, const std::vector<double>& f, double T) {
  const double h = t[1] - t[0];
  std::size_t k = static_cast<std::size_t>(std::clamp((T - t.front()) / h, 0.0, static_cast<double>(t.size() - 2)));
  const double w = (T - t[k]) / (t[k + 1] - t[k]);
  return (1.0 - w) * f[k] + w * f[k + 1];
}

double map_T(const Box& box, double theta) { return box.lo + 0.5 * (box.hi - box.lo) * (1.0 + std::sin(theta)); }

struct Discretization {
  Discretization(const fracops::CombinedSpec& spec, const DiscretizationPlan& plan) : cfg() {
    cfg.nodes = plan.cells();
    t = fracops::grid_nodes(spec.domain(), cfg.nodes);
    W = std::make_unique<parallel::CaputoMatrix>(parallel::combined_caputo_matrix(spec, cfg));
    box = plan.terminal_box(spec.domain());
    free_T = box.hi > box.lo;
  }
  QuadratureConfig cfg;
  std::vector<double> t;
  std::unique_ptr<parallel::CaputoMatrix> W;
  Box box;
  bool free_T;

  double T_of(const std::vector<double>& z) const { return free_T ? map_T(box, z.back()) : box.lo; }
};

/// Augmented-Lagrangian outer loop shared by the isoperimetric variants.
/// `evaluate` returns (J, gap) for a decision vector.
struct Outer {
  std::vector<double> z;
  double lambda_al = 0.0;
  double J = 0.0;
  double gap = 0.0;
  NelderMeadResult last;
  long iterations = 0;
  long evaluations = 0;
  int outer = 0;
  std::vector<double> gap_history;
  std::vector<double> objective_history;
  bool converged = false;
  std::string reason;
};

Outer augmented_lagrangian(const std::function<std::pair<double, double>(const std::vector<double>&)>& evaluate,
                           std::vector<double> z0, const SolverOptions& opts, bool constrained) {
  Outer o;
  o.z = std::move(z0);
  double mu = opts.mu0;
  const int max_outer = constrained ? opts.max_outer : 1;
  for (int k = 0; k < max_outer; ++k) {
    const double lam = o.lambda_al, m = mu;
    auto phi = [&](const std::vector<double>& z) {
      const auto [J, gap] = evaluate(z);
      const double v = J + lam * gap + m * gap * gap;
      return std::isfinite(v) ? v : std::numeric_limits<double>::max();
    };
    const double step = std::max(10.0 * opts.tol, opts.initial_step * std::pow(0.3, k));
    o.last = nelder_mead(phi, o.z, step, opts.tol, opts.budget - o.evaluations);
    o.z = o.last.x;
    o.iterations += o.last.iterations;
    o.evaluations += o.last.evaluations;
    ++o.outer;
    std::tie(o.J, o.gap) = evaluate(o.z);
    o.gap_history.push_back(std::abs(o.gap));
    o.objective_history.push_back(o.J);
    if (std::abs(o.gap) <= opts.tol && o.last.converged) {
      o.converged = true;
      o.reason = "gap and simplex diameter within tolerance";
      return o;
    }
    if (o.evaluations >= opts.budget) {
      o.reason = "evaluation budget exhausted";
      return o;
    }
    o.lambda_al += 2.0 * mu * o.gap;
    mu = std::min(10.0 * mu, opts.mu_max);
  }
  std::ostringstream os;
  os.precision(6);
  if (!o.last.converged)
    os << "simplex did not contract below " << opts.tol;
  else
    os << "constraint gap " << o.gap << " persists after " << o.outer << " multiplier updates";
  o.reason = os.str();
  return o;
}

std::vector<double> initial_nodes(const DiscretizationPlan& plan, double xa, const char* what) {
  if (plan.initial.empty()) return std::vector<double>(static_cast<std::size_t>(plan.nodes), xa);
  if (std::abs(plan.initial.front() - xa) > 1e-12) {
    std::ostringstream os;
    os.precision(17);
    os << "initial guess has " << what << "(a) = " << plan.initial.front() << ", expected " << xa;
    fail(ErrorKind::InfeasibleStart, os.str());
  }
  return plan.initial;
}

std::vector<double> decision_vector(const std::vector<double>& nodes, bool free_T) {
  std::vector<double> z(nodes.begin() + 1, nodes.end());
  if (free_T) z.push_back(0.0);  // midpoint of the box
  return z;
}

std::vector<double> nodes_from(const std::vector<double>& z, std::size_t count, double xa) {
  std::vector<double> x(count);
  x[0] = xa;
  std::copy(z.begin(), z.begin() + static_cast<std::ptrdiff_t>(count - 1), x.begin() + 1);
  return x;
}

[[noreturn]] void raise_no_convergence(const std::string& reason, SolveReport report) {
  throw NoConvergence(reason, std::move(report));
}

SolveReport solve_iso_impl(const ProblemSpec& p, const DiscretizationPlan& plan, const SolverOptions& opts) {
  const Interval& dom = p.domain();
  plan.validate(dom);
  const Discretization d(p.spec, plan);
  const std::size_t count = d.t.size();
  const std::vector<double> x0 = initial_nodes(plan, p.xa, "x");
  const bool variant1 = p.variant() == Variant::iso1;
  const Lagrangian& g = p.g();
  // psi is an adaptive quadrature; with T fixed it is evaluated once
  const std::optional<double> psi_fixed =
      variant1 && !d.free_T ? std::optional(std::get<IsoConstraintI>(p.constraint).psi_at(d.box.lo)) : std::nullopt;

  auto evaluate = [&](const std::vector<double>& z) -> std::pair<double, double> {
    const std::vector<double> x = nodes_from(z, count, p.xa);
    const std::vector<double> v = d.W->apply(x);
    const double T = d.T_of(z);
    std::vector<double> fl(count), fg(count);
    for (std::size_t k = 0; k < count; ++k) {
      fl[k] = p.L({d.t[k], x[k], v[k]});
      fg[k] = g({d.t[k], x[k], v[k]});
    }
    const double xT = interpolate(d.t, x, T), vT = interpolate(d.t, v, T);
    const double J = variational::trapezoid_to(d.t, fl, T, p.L({T, xT, vT})) + p.phi({T, xT});
    double gap;
    if (variant1) {
      const double psi = psi_fixed ? *psi_fixed : std::get<IsoConstraintI>(p.constraint).psi_at(T);
      gap = variational::trapezoid_to(d.t, fg, T, g({T, xT, vT})) - psi;
    } else {
      gap = variational::trapezoid_to(d.t, fg, dom.b(), fg.back()) - std::get<IsoConstraintII>(p.constraint).C;
    }
    return {J, gap};
  };

  Outer o = augmented_lagrangian(evaluate, decision_vector(x0, d.free_T), opts, true);

  SolveReport r;
  r.variant = p.variant();
  r.t = d.t;
  r.x = nodes_from(o.z, count, p.xa);
  r.T = d.T_of(o.z);
  r.multipliers = {1.0, -o.lambda_al};
  r.iterations = o.iterations;
  r.evaluations = o.evaluations;
  r.outer_iterations = o.outer;
  r.simplex_diameter = o.last.diameter;
  r.gap_history = o.gap_history;
  r.objective_history = o.objective_history;
  r.converged = o.converged;
  r.reason = o.reason;
  r.options = opts;
  r.nodes = plan.nodes;
  const Trajectory x = r.trajectory();
  r.objective = variational::evaluate_functional(p, x, r.T, d.cfg);
  r.constraint_gap = variational::isoperimetric_gap(p, x, r.T, d.cfg);
  r.residuals = variational::iso_residuals(p, x, r.T, r.multipliers, d.cfg);
  if (!r.converged) {
    const std::string reason = r.reason;
    raise_no_convergence(reason, std::move(r));
  }
  return r;
}

}  // namespace

SolveReport solve_iso1(const ProblemSpec& p, const DiscretizationPlan& plan, const SolverOptions& opts) {
  if (p.variant() != Variant::iso1) fail(ErrorKind::InvalidProblem, "solve_iso1 needs a Problem I constraint");
  return solve_iso_impl(p, plan, opts);
}

SolveReport solve_iso2(const ProblemSpec& p, const DiscretizationPlan& plan, const SolverOptions& opts) {
  if (p.variant() != Variant::iso2) fail(ErrorKind::InvalidProblem, "solve_iso2 needs a Problem II constraint");
  return solve_iso_impl(p, plan, opts);
}

SolveReport solve_iso(const ProblemSpec& p, const DiscretizationPlan& plan, const SolverOptions& opts) {
  return solve_iso_impl(p, plan, opts);
}

// ---------------------------------------------------------------------------
// Holonomic

double resolve_x2(const HolonomicConstraint& g, double t, double x1, Box box) {
  double lo = box.lo, hi = box.hi;
  double glo = g({t, x1, lo});
  const double ghi = g({t, x1, hi});
  if (glo == 0.0) return lo;
  if (ghi == 0.0) return hi;
  if ((glo > 0.0) == (ghi > 0.0)) {
    std::ostringstream os;
    os.precision(17);
    os << "g(" << t << ", " << x1 << ", x2) has no sign change on [" << lo << ", " << hi << "]";
    fail(ErrorKind::RootNotBracketed, os.str());
  }
  while (hi - lo > 1e-10) {
    const double mid = 0.5 * (lo + hi);
    const double gm = g({t, x1, mid});
    if (gm == 0.0) return mid;
    if ((gm > 0.0) == (glo > 0.0)) {
      lo = mid;
      glo = gm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

SolveReport solve_holonomic(const HolonomicProblem& hp, const DiscretizationPlan& plan, const SolverOptions& opts) {
  const Interval& dom = hp.domain();
  plan.validate(dom);
  if (std::abs(hp.g({dom.a(), hp.x1a, hp.x2a})) > 1e-8)
    fail(ErrorKind::InfeasibleStart, "boundary values violate the holonomic constraint at a");
  const Discretization d(hp.spec, plan);
  const std::size_t count = d.t.size();
  const std::vector<double> x0 = initial_nodes(plan, hp.x1a, "x1");

  auto second = [&](const std::vector<double>& x1) {
    std::vector<double> x2(count);
    x2[0] = hp.x2a;
    for (std::size_t k = 1; k < count; ++k)
      x2[k] = hp.resolver ? hp.resolver(d.t[k], x1[k]) : resolve_x2(hp.g, d.t[k], x1[k], plan.root_box);
    return x2;
  };
  auto evaluate = [&](const std::vector<double>& z) -> std::pair<double, double> {
    const std::vector<double> x1 = nodes_from(z, count, hp.x1a);
    const std::vector<double> x2 = second(x1);
    const std::vector<double> v1 = d.W->apply(x1), v2 = d.W->apply(x2);
    const double T = d.T_of(z);
    std::vector<double> fl(count);
    for (std::size_t k = 0; k < count; ++k) fl[k] = hp.L({d.t[k], x1[k], x2[k], v1[k], v2[k]});
    const double x1T = interpolate(d.t, x1, T), x2T = interpolate(d.t, x2, T);
    const double LT = hp.L({T, x1T, x2T, interpolate(d.t, v1, T), interpolate(d.t, v2, T)});
    return {variational::trapezoid_to(d.t, fl, T, LT) + hp.phi({T, x1T, x2T}), 0.0};
  };

  // the first evaluation surfaces RootNotBracketed before the search starts
  std::vector<double> z0 = decision_vector(x0, d.free_T);
  (void)evaluate(z0);
  Outer o = augmented_lagrangian(evaluate, std::move(z0), opts, false);

  SolveReport r;
  r.variant = Variant::holonomic;
  r.t = d.t;
  r.x = nodes_from(o.z, count, hp.x1a);
  r.x2 = second(r.x);
  r.T = d.T_of(o.z);
  r.objective = o.J;
  r.iterations = o.iterations;
  r.evaluations = o.evaluations;
  r.outer_iterations = o.outer;
  r.simplex_diameter = o.last.diameter;
  r.gap_history = o.gap_history;
  r.objective_history = o.objective_history;
  r.converged = o.converged;
  r.reason = o.reason;
  r.options = opts;
  r.nodes = plan.nodes;
  r.residuals = variational::holonomic_residuals(hp, {r.trajectory(), *r.trajectory2()}, r.T, d.cfg);
  r.constraint_gap = r.residuals->constraint_gap;
  if (!r.converged) {
    const std::string reason = r.reason;
    raise_no_convergence(reason, std::move(r));
  }
  return r;
}

// ---------------------------------------------------------------------------
// Terminal-condition sweep

SweepReport sweep_function(const std::function<double(double)>& r1, std::vector<double> T_grid) {
  if (T_grid.empty()) fail(ErrorKind::EmptyGrid, "terminal-time grid is empty");
  std::sort(T_grid.begin(), T_grid.end());
  SweepReport rep;
  rep.rows.reserve(T_grid.size());
  for (double T : T_grid) rep.rows.push_back({T, r1(T)});
  rep.min_abs_r1 = std::abs(rep.rows.front().r1);
  rep.argmin_T = rep.rows.front().T;
  for (const auto& row : rep.rows)
    if (std::abs(row.r1) < rep.min_abs_r1) {
      rep.min_abs_r1 = std::abs(row.r1);
      rep.argmin_T = row.T;
    }
  for (std::size_t k = 0; k < rep.rows.size(); ++k) {
    const SweepRow& a = rep.rows[k];
    if (a.r1 == 0.0) {
      rep.sign_change = true;
      rep.root = a.T;
      break;
    }
    if (k + 1 < rep.rows.size()) {
      const SweepRow& b = rep.rows[k + 1];
      if ((a.r1 < 0.0) != (b.r1 < 0.0) && b.r1 != 0.0) {
        rep.sign_change = true;
        rep.root = a.T - a.r1 * (b.T - a.T) / (b.r1 - a.r1);
        break;
      }
    }
  }
  return rep;
}

SweepReport sweep_terminal_condition(const ProblemSpec& p, const Lagrangian& F, const Trajectory& x,
                                     MultiplierPair m, std::vector<double> T_grid,
                                     const QuadratureConfig& cfg) {
  if (T_grid.empty()) fail(ErrorKind::EmptyGrid, "terminal-time grid is empty");
  std::sort(T_grid.begin(), T_grid.end());
  const std::vector<double> r1 = parallel::tabulate(
      T_grid, [&](double T) { return variational::transversality_ct1_r1(F, p, x, T, m, cfg); });
  std::size_t k = 0;
  return sweep_function([&](double) { return r1[k++]; }, std::move(T_grid));
}

}  // namespace vofc::solver
