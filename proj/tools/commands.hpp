#pragma once

#include <iosfwd>
#include <optional>
#include <string>

namespace vofc::cli {

enum ExitCode { ok = 0, usage = 2, numeric = 3, constraint = 4, no_convergence = 5 };

struct DerivArgs {
  std::string file;
  std::string which = "combined";
  std::string x;
  std::string at;
  std::optional<int> nodes;
  std::string out;
};

struct IbpArgs {
  std::string file;
  std::string x;
  std::string y;
  std::string side = "left";
  int refine = 3;
  std::optional<int> nodes;
  std::string out;
};

struct ResidualArgs {
  std::string file;
  std::string candidate;
  std::string candidate2;
  std::optional<double> T;
  double lambda0 = 1.0;
  double lambda = 0.0;
  std::optional<int> nodes;
  std::string out;
};

struct SolveArgs {
  std::string file;
  int nodes = 33;
  std::optional<long> budget;
  std::string out;
};

struct ExampleArgs {
  std::string name;
  double b = 1.0;
  std::string alpha = "0.5";
  std::string beta = "0.5";
  std::string sign = "both";
  int nodes = 1024;
  std::optional<double> T;
  int sweep_points = 99;
  bool resolve = false;
  std::string out_dir;
};

// Each command prints its report to `out` and returns an exit code; library
// errors propagate to the caller, which maps them onto exit codes.
int run_deriv(const DerivArgs& a, std::ostream& out);
int run_check_ibp(const IbpArgs& a, std::ostream& out);
int run_residuals(const ResidualArgs& a, std::ostream& out);
int run_solve(const SolveArgs& a, std::ostream& out);
int run_example(const ExampleArgs& a, std::ostream& out);

}  // namespace vofc::cli
