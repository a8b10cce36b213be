#include <CLI11.hpp>
#include <iostream>

#include "commands.hpp"
#include "vofc/error.hpp"

namespace {

int exit_code_for(vofc::ErrorKind k) {
  using vofc::ErrorKind;
  switch (k) {
    case ErrorKind::ConstraintViolated: return vofc::cli::constraint;
    case ErrorKind::NoConvergence: return vofc::cli::no_convergence;
    case ErrorKind::NonFiniteValue:
    case ErrorKind::EndpointUndefined:
    case ErrorKind::InnerGridTooCoarse:
    case ErrorKind::SingularConstraint:
    case ErrorKind::RootNotBracketed:
    case ErrorKind::EmptyGrid:
    case ErrorKind::EvaluationError: return vofc::cli::numeric;
    default: return vofc::cli::usage;
  }
}

}  // namespace

int main(int argc, char** argv) {
  using namespace vofc::cli;
  CLI::App app{"Variable-order fractional operators and constrained variational problems"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for all subcommands");

  DerivArgs deriv;
  auto* c_deriv = app.add_subcommand("deriv", "Evaluate a fractional operator at probe points");
  c_deriv->add_option("file", deriv.file, "Problem file")->required()->check(CLI::ExistingFile);
  c_deriv->add_option("--which", deriv.which, "Operator")
      ->check(CLI::IsMember({"left-caputo", "right-caputo", "left-rl", "right-rl", "combined", "dual"}));
  c_deriv->add_option("--x", deriv.x, "Trajectory expression in t")->required();
  c_deriv->add_option("--at", deriv.at, "Comma-separated probe times")->required();
  c_deriv->add_option("--nodes", deriv.nodes, "Grid cells (overrides the file)");
  c_deriv->add_option("--out", deriv.out, "CSV output path, '-' for stdout");

  IbpArgs ibp;
  auto* c_ibp = app.add_subcommand("check-ibp", "Check fractional integration by parts under refinement");
  c_ibp->add_option("file", ibp.file, "Problem file")->required()->check(CLI::ExistingFile);
  c_ibp->add_option("--x", ibp.x, "First function of t")->required();
  c_ibp->add_option("--y", ibp.y, "Second function of t")->required();
  c_ibp->add_option("--side", ibp.side, "Caputo side")->check(CLI::IsMember({"left", "right"}));
  c_ibp->add_option("--refine", ibp.refine, "Number of grids, each with twice the cells of the last")->check(CLI::Range(1, 8));
  c_ibp->add_option("--nodes", ibp.nodes, "Coarsest grid (overrides the file)");
  c_ibp->add_option("--out", ibp.out, "CSV output path, '-' for stdout");

  ResidualArgs res;
  auto* c_res = app.add_subcommand("residuals", "Audit a candidate against the optimality conditions");
  c_res->add_option("file", res.file, "Problem file")->required()->check(CLI::ExistingFile);
  c_res->add_option("--candidate", res.candidate, "x (or x1) as an expression in t, or a CSV with t,x[,x2]")
      ->required();
  c_res->add_option("--candidate2", res.candidate2, "x2 as an expression in t (holonomic)");
  c_res->add_option("--T", res.T, "Terminal time (default b)");
  c_res->add_option("--lambda0", res.lambda0, "Cost multiplier");
  c_res->add_option("--lambda", res.lambda, "Constraint multiplier");
  c_res->add_option("--nodes", res.nodes, "Grid cells (overrides the file)");
  c_res->add_option("--out", res.out, "CSV output path, '-' for stdout");

  SolveArgs sol;
  auto* c_sol = app.add_subcommand("solve", "Solve the problem by direct discretization");
  c_sol->add_option("file", sol.file, "Problem file")->required()->check(CLI::ExistingFile);
  c_sol->add_option("--nodes", sol.nodes, "Grid points on [a, b]")->check(CLI::Range(9, 257));
  c_sol->add_option("--budget", sol.budget, "Objective evaluations")->check(CLI::PositiveNumber);
  c_sol->add_option("--out", sol.out, "Trajectory CSV path, '-' for stdout");

  ExampleArgs ex;
  auto* c_ex = app.add_subcommand("example", "Reproduce a worked example");
  c_ex->add_option("name", ex.name, "paper-iso or paper-holonomic")
      ->required()
      ->check(CLI::IsMember({"paper-iso", "paper-holonomic"}));
  c_ex->add_option("--b", ex.b, "Right end of [0, b]")->check(CLI::PositiveNumber);
  c_ex->add_option("--alpha", ex.alpha, "alpha(t)");
  c_ex->add_option("--beta", ex.beta, "beta(t)");
  c_ex->add_option("--sign-convention", ex.sign, "Sign of the right term in the forcing")
      ->check(CLI::IsMember({"paper", "derived", "both"}));
  c_ex->add_option("--nodes", ex.nodes, "Grid cells")->check(CLI::Range(16, 1 << 16));
  c_ex->add_option("--T", ex.T, "Terminal time of the audit (default b/2)");
  c_ex->add_option("--sweep-points", ex.sweep_points, "Terminal times in the r1 sweep")->check(CLI::Range(1, 10000));
  c_ex->add_flag("--resolve", ex.resolve, "Also solve the holonomic example from a perturbed start");
  c_ex->add_option("--out", ex.out_dir, "Directory for CSV output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? ok : usage;
  }

  try {
    if (*c_deriv) return run_deriv(deriv, std::cout);
    if (*c_ibp) return run_check_ibp(ibp, std::cout);
    if (*c_res) return run_residuals(res, std::cout);
    if (*c_sol) return run_solve(sol, std::cout);
    if (*c_ex) return run_example(ex, std::cout);
  } catch (const vofc::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return usage;
  }
  return usage;
}
