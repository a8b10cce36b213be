#pragma once

// Sectioned key/value problem files:
//
//   [domain]     a, b
//   [operator]   alpha, beta (in t, tau), gamma1, gamma2
//   [problem]    variant = iso1 | iso2 | holonomic
//                lagrangian (t, x, v | t, x1, x2, v1, v2), phi (T, xT | T, x1T, x2T)
//                xa | x1a, x2a
//   [constraint] g, psi (in T) or psi_integrand (in t) for iso1, C for iso2,
//                resolver (in t, x1) for holonomic
//   [numerics]   nodes, diff_step, tol, T_box = lo, hi
//
// Expressions may be quoted. Lines starting with ';' or '#' are comments.

#include <filesystem>
#include <optional>
#include <string>
#include <variant>

#include "vofc/solver.hpp"
#include "vofc/variational.hpp"

namespace vofc::problem_file {

struct Numerics {
  fracops::QuadratureConfig cfg;
  double tol = 1e-6;
  std::optional<solver::Box> T_box;
};

struct ProblemFile {
  std::string name;
  fracops::CombinedSpec spec;
  std::optional<variational::Variant> variant;  ///< empty when [problem] is absent
  std::optional<variational::ProblemSpec> iso;
  std::optional<variational::HolonomicProblem> holonomic;
  Numerics numerics;

  const fracops::Interval& domain() const noexcept { return spec.domain(); }
};

/// Parses the text of a problem file. `name` is used in messages.
/// Throws SyntaxError (with the line) on malformed input, InvalidProblem on
/// missing or unknown keys and the expression errors of the parser.
ProblemFile parse(const std::string& text, const std::string& name = "<input>");
ProblemFile load(const std::filesystem::path& path);

/// A closed-form trajectory from an expression in t; its slope is a central
/// difference with step 1e-6 (1 + |t|), one-sided at the ends of `domain`.
fracops::Trajectory trajectory_from_expression(const std::string& source, const fracops::Interval& domain);

/// An order field from an expression in t and tau.
fracops::OrderField order_from_expression(const std::string& source, const fracops::Interval& domain);

}  // namespace vofc::problem_file
