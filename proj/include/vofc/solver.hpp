#pragma once

// Direct solvers: the trajectory is discretized by its node values on a
// uniform grid, the combined Caputo derivative is a fixed matrix applied to
// them, and the resulting finite-dimensional problem is minimized with a
// Nelder-Mead search inside an augmented-Lagrangian loop.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "vofc/error.hpp"
#include "vofc/variational.hpp"

namespace vofc::solver {

using fracops::Interval;
using fracops::QuadratureConfig;
using fracops::Trajectory;
using variational::HolonomicProblem;
using variational::Lagrangian;
using variational::MultiplierPair;
using variational::ProblemSpec;
using variational::ResidualReport;

struct Box {
  double lo = 0.0;
  double hi = 0.0;
};

struct DiscretizationPlan {
  int nodes = 33;  ///< grid points on [a, b], including both ends
  /// Terminal time search box; a degenerate box fixes T. Defaults to
  /// [a + 8 h, b], the smallest T that keeps eight cells in [a, T].
  std::optional<Box> T_box;
  /// Bracket for x2 when the holonomic constraint is solved by bisection.
  Box root_box{-1e3, 1e3};
  /// Initial node values (size `nodes`); a constant xa otherwise.
  std::vector<double> initial;

  int cells() const noexcept { return nodes - 1; }
  /// Throws InvalidConfig when nodes < 9 or the box leaves (a, b].
  void validate(const Interval& domain) const;
  Box terminal_box(const Interval& domain) const;
};

struct SolverOptions {
  double tol = 1e-6;       ///< constraint gap and simplex diameter
  long budget = 2000000;   ///< objective evaluations over the whole solve
  int max_outer = 12;      ///< multiplier updates
  double mu0 = 1.0;
  double mu_max = 1e6;
  double initial_step = 0.1;
};

struct NelderMeadResult {
  std::vector<double> x;
  double f = 0.0;
  long iterations = 0;
  long evaluations = 0;
  double diameter = 0.0;
  bool converged = false;
};

/// Adaptive Nelder-Mead (dimension-dependent coefficients) with restarts
/// from the best vertex until a restart no longer improves f.
NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f, std::vector<double> x0,
                             double step, double tol, long max_evaluations);

struct SolveReport {
  variational::Variant variant = variational::Variant::iso1;
  std::vector<double> t;
  std::vector<double> x;   ///< x, or x1 for holonomic problems
  std::vector<double> x2;  ///< holonomic problems only
  double T = 0.0;
  MultiplierPair multipliers;
  double objective = 0.0;
  double constraint_gap = 0.0;
  std::optional<ResidualReport> residuals;
  long iterations = 0;
  long evaluations = 0;
  int outer_iterations = 0;
  double simplex_diameter = 0.0;
  std::vector<double> gap_history;        ///< |gap| after each outer iteration
  std::vector<double> objective_history;  ///< J after each outer iteration
  bool converged = false;
  std::string reason;
  SolverOptions options;
  int nodes = 0;

  Trajectory trajectory() const;
  std::optional<Trajectory> trajectory2() const;
};

/// Raised when the budget or the outer loop runs out; carries the best
/// candidate found.
class NoConvergence : public Error {
 public:
  NoConvergence(const std::string& what, SolveReport partial)
      : Error(ErrorKind::NoConvergence, what), report_(std::move(partial)) {}
  const SolveReport& report() const noexcept { return report_; }

 private:
  SolveReport report_;
};

SolveReport solve_iso1(const ProblemSpec& p, const DiscretizationPlan& plan, const SolverOptions& opts = {});
SolveReport solve_iso2(const ProblemSpec& p, const DiscretizationPlan& plan, const SolverOptions& opts = {});
/// Dispatches on the constraint variant.
SolveReport solve_iso(const ProblemSpec& p, const DiscretizationPlan& plan, const SolverOptions& opts = {});
SolveReport solve_holonomic(const HolonomicProblem& hp, const DiscretizationPlan& plan, const SolverOptions& opts = {});

/// x2 solving g(t, x1, x2) = 0 by bisection on `box` to 1e-10.
/// Throws RootNotBracketed when g has the same sign at both ends.
double resolve_x2(const variational::HolonomicConstraint& g, double t, double x1, Box box);

struct SweepRow {
  double T = 0.0;
  double r1 = 0.0;
};

struct SweepReport {
  std::vector<SweepRow> rows;
  double argmin_T = 0.0;
  double min_abs_r1 = 0.0;
  bool sign_change = false;
  std::optional<double> root;  ///< linear interpolation across the first sign change
};

/// First transversality residual of CT1 over T_grid (sorted on output).
SweepReport sweep_terminal_condition(const ProblemSpec& p, const Lagrangian& F, const Trajectory& x,
                                     MultiplierPair m, std::vector<double> T_grid,
                                     const QuadratureConfig& cfg);
/// Same bookkeeping for an arbitrary r1(T).
SweepReport sweep_function(const std::function<double(double)>& r1, std::vector<double> T_grid);

}  // namespace vofc::solver
