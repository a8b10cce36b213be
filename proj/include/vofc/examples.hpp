#pragma once

// The two worked examples: an isoperimetric problem of type I with candidate
// x(t) = t, and a holonomic problem with candidate (x1, x2) = (t, 1).
//
// Both are built on [0, b] around the forcing term
//   A(t) = t^(1-alpha)/(2 Gamma(2-alpha)) + s (b-t)^(1-beta)/(2 Gamma(2-beta))
// with alpha = alpha(t, t), beta = beta(t, t). For x(t) = t the combined Caputo
// derivative with gamma = (1/2, 1/2) equals A with s = -1; s = +1 is the sign
// printed with the example.

#include <string>

#include "vofc/solver.hpp"
#include "vofc/variational.hpp"

namespace vofc::examples {

using fracops::CombinedSpec;
using fracops::Interval;
using fracops::OrderField;
using fracops::Trajectory;

enum class SignConvention { paper, derived };

std::string to_string(SignConvention s);
/// Throws InvalidProblem for anything but "paper" or "derived".
SignConvention parse_sign_convention(const std::string& name);

inline constexpr double kIsoLambda = 2.0;

/// alpha = beta = 1/2, gamma = (1/2, 1/2) on [0, b].
CombinedSpec default_spec(double b = 1.0);

double forcing(const CombinedSpec& spec, SignConvention s, double t);

/// L = alpha + v^2 + A^2, g = v A, psi(T) = int_0^T A^2, phi = 0, x(0) = 0.
variational::ProblemSpec iso_problem(const CombinedSpec& spec, SignConvention s);
Trajectory iso_candidate(const Interval& domain);

/// L = alpha + (v1 - A)^2 + v2^2, g = x1 + x2 - (t + 1), phi = 0,
/// x1(0) = 0, x2(0) = 1, with the resolver x2 = t + 1 - x1.
variational::HolonomicProblem holonomic_problem(const CombinedSpec& spec, SignConvention s);
variational::TrajectoryPair holonomic_candidate(const Interval& domain);

inline constexpr double kAuditTolerance = 5e-3;

struct IsoAudit {
  SignConvention sign;
  double T;
  variational::ResidualReport report;
  solver::SweepReport sweep;  ///< CT1 r1 over T in (0, b)
  bool el_pass = false;       ///< both EL families within tolerance
  bool ct_pass = false;       ///< CT1 r2 and r3 within tolerance
};

/// Residuals of x(t) = t with lambda = 2 at T, plus the r1 sweep over
/// `sweep_points` equally spaced interior values of T.
IsoAudit audit_iso(const CombinedSpec& spec, SignConvention s, double T, const fracops::QuadratureConfig& cfg,
                   int sweep_points = 99);

struct HolonomicAudit {
  SignConvention sign;
  double T;
  variational::ResidualReport report;
  bool el_pass = false;          ///< all four EL families and the multiplier
  bool brackets_pass = false;    ///< CTh1 scalars two to five
  bool terminal_pass = false;    ///< CTh1 scalar one
};

HolonomicAudit audit_holonomic(const CombinedSpec& spec, SignConvention s, double T,
                               const fracops::QuadratureConfig& cfg);

}  // namespace vofc::examples
