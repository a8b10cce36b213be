#pragma once

// Variational problems with a combined Caputo derivative of variable order and
// the residuals of their necessary optimality conditions.
//
// Problem I:   min J(x,T) = int_a^T L[x](t) dt + phi(T, x(T))
//              s.t. x(a) = xa, int_a^T g[x](t) dt = psi(T)
// Problem II:  as above with int_a^b g[x](t) dt = C
// Holonomic:   min int_a^T L(t, x1, x2, v1, v2) dt + phi(T, x1(T), x2(T))
//              s.t. g(t, x1, x2) = 0, x1(a) = x1a, x2(a) = x2a
//
// where [x](t) = (t, x(t), v(t)) and v is the combined Caputo derivative of x.

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "vofc/fracops.hpp"

namespace vofc::variational {

using fracops::CombinedSpec;
using fracops::Interval;
using fracops::QuadratureConfig;
using fracops::Trajectory;

/// A scalar function of N arguments with partial derivatives. Partials that
/// are not supplied are central differences with step 1e-6 (1 + |arg|).
/// Partial indices are 1-based, matching the argument positions.
template <std::size_t N>
class ScalarField {
 public:
  using Args = std::array<double, N>;
  using Fn = std::function<double(const Args&)>;

  /// The zero function.
  ScalarField();
  explicit ScalarField(Fn value, std::array<Fn, N> partials = {}, std::string descriptor = {});

  double operator()(const Args& args) const;
  double partial(std::size_t i, const Args& args) const;
  bool analytic(std::size_t i) const { return static_cast<bool>(partials_.at(i - 1)); }

  /// Keeps the stencil of the first argument inside `domain`; one-sided
  /// differences are used at its ends.
  ScalarField with_time_domain(Interval domain) const;

  const std::string& descriptor() const noexcept { return descriptor_; }

 private:
  Fn value_;
  std::array<Fn, N> partials_;
  std::optional<Interval> time_domain_;
  std::string descriptor_;
};

using Lagrangian = ScalarField<3>;           ///< (t, x, v)
using TerminalCost = ScalarField<2>;         ///< (T, xT)
using Lagrangian2 = ScalarField<5>;          ///< (t, x1, x2, v1, v2)
using TerminalCost2 = ScalarField<3>;        ///< (T, x1T, x2T)
using HolonomicConstraint = ScalarField<3>;  ///< (t, x1, x2)

extern template class ScalarField<2>;
extern template class ScalarField<3>;
extern template class ScalarField<5>;

struct IsoConstraintI {
  Lagrangian g;
  std::function<double(double)> psi;
  std::function<double(double)> psi_prime;  ///< optional; central differences of psi otherwise

  double psi_at(double T) const;
  double psi_prime_at(double T) const;

  /// psi(T) = int_a^T integrand(t) dt by adaptive Gauss-Kronrod, psi' = integrand.
  static IsoConstraintI from_integrand(Lagrangian g, Interval domain, std::function<double(double)> integrand);
};

struct IsoConstraintII {
  Lagrangian g;
  double C = 0.0;
};

struct MultiplierPair {
  double lambda0 = 1.0;
  double lambda = 0.0;

  /// Throws DegenerateMultipliers for (0, 0) and InvalidProblem for lambda0 < 0.
  void validate() const;
};

enum class Variant { iso1, iso2, holonomic };

std::string to_string(Variant v);

struct ProblemSpec {
  CombinedSpec spec;
  Lagrangian L;
  TerminalCost phi;
  std::variant<IsoConstraintI, IsoConstraintII> constraint;
  double xa = 0.0;

  Variant variant() const noexcept { return constraint.index() == 0 ? Variant::iso1 : Variant::iso2; }
  const Interval& domain() const noexcept { return spec.domain(); }
  const Lagrangian& g() const;
};

struct HolonomicProblem {
  CombinedSpec spec;
  Lagrangian2 L;
  TerminalCost2 phi;
  HolonomicConstraint g;
  double x1a = 0.0;
  double x2a = 0.0;
  /// Optional explicit solution x2 = resolver(t, x1) of g(t, x1, x2) = 0.
  std::function<double(double, double)> resolver;

  const Interval& domain() const noexcept { return spec.domain(); }
};

struct TrajectoryPair {
  Trajectory x1;
  Trajectory x2;
};

/// A residual sampled on retained grid nodes.
struct SampledFamily {
  std::string name;
  std::vector<double> t;
  std::vector<double> value;
  double sup_norm = 0.0;
  /// Vanishes by construction of the multiplier; reported as a numerical check.
  bool analytically_zero = false;
};

struct NamedScalar {
  std::string name;
  double value = 0.0;
};

struct ResidualReport {
  std::vector<SampledFamily> families;
  std::vector<NamedScalar> transversality;
  double constraint_gap = 0.0;
  double T = 0.0;
  QuadratureConfig grid;
  int excluded_cells = 2;  ///< cells skipped next to each of a, T and b
  /// Reconstructed multiplier on the grid (holonomic problems only).
  std::optional<SampledFamily> multiplier;

  const SampledFamily& family(const std::string& name) const;
  double scalar(const std::string& name) const;
  /// Largest sup-norm over all families.
  double max_family_sup() const;
};

/// Samples of a candidate on the uniform grid: node times, x and its combined
/// Caputo derivative v.
struct Path {
  std::vector<double> t;
  std::vector<double> x;
  std::vector<double> v;
};

Path along(const Trajectory& x, const CombinedSpec& spec, const QuadratureConfig& cfg);

/// Composite trapezoid over the grid nodes below T plus the point T itself.
/// `integrand_at_T` is the integrand value at T.
double trapezoid_to(std::span<const double> t, std::span<const double> f, double T, double integrand_at_T);

double evaluate_functional(const ProblemSpec& p, const Trajectory& x, double T, const QuadratureConfig& cfg);

/// F = lambda0 L - lambda g, partials combined linearly.
Lagrangian scalarize(const Lagrangian& L, const Lagrangian& g, MultiplierPair m);

// Euler-Lagrange residuals of Problem I (and of the unconstrained problem with
// F = L). u(s) = d3 F(s, x(s), v(s)) is tabulated on the grid and treated as a
// sampled trajectory.
//   interior, t in [a, T]: d2 F + D_{gbar,T}^{beta,alpha} u
//   tail,     t in (T, b]: gamma2 (aD_t^beta u - TD_t^beta u)
double el_residual_interior(const Lagrangian& F, const ProblemSpec& p, const Trajectory& x, double T, double t,
                            const QuadratureConfig& cfg);
double el_residual_tail(const Lagrangian& F, const ProblemSpec& p, const Trajectory& x, double T, double t,
                        const QuadratureConfig& cfg);

/// Both families on the retained nodes, named "<prefix>interior" and "<prefix>tail".
std::array<SampledFamily, 2> el_families(const Lagrangian& F, const ProblemSpec& p, const Trajectory& x, double T,
                                         const QuadratureConfig& cfg, const std::string& prefix = "el_");

/// The same families with F replaced by g; a vanishing pair signals the
/// abnormal case lambda0 = 0.
std::array<SampledFamily, 2> constraint_el_residuals(const ProblemSpec& p, const Trajectory& x, double T,
                                                     const QuadratureConfig& cfg);

struct Transversality {
  double r1 = 0.0;
  double r2 = 0.0;
  double r3 = 0.0;
};

Transversality transversality_ct1(const Lagrangian& F, const ProblemSpec& p, const Trajectory& x, double T,
                                  MultiplierPair m, const QuadratureConfig& cfg);
/// r1 of CT1 alone; needs no inner-function tabulation.
double transversality_ct1_r1(const Lagrangian& F, const ProblemSpec& p, const Trajectory& x, double T,
                             MultiplierPair m, const QuadratureConfig& cfg);
/// First condition in increment form; r2 and r3 as in ct1.
Transversality transversality_ct2(const Lagrangian& F, const ProblemSpec& p, const Trajectory& x, double T,
                                  MultiplierPair m, const QuadratureConfig& cfg);
Transversality transversality_ct3(const ProblemSpec& p, const Trajectory& x, double T, MultiplierPair m,
                                  const QuadratureConfig& cfg);

/// Problem II residuals at one t: the interior value for t <= T, the tail value otherwise.
///   interior: d2 F + D_{gbar,T}(d3 L) - lambda D_{gbar,b}(d3 g)
///   tail:     gamma2 (aD_t^beta d3 F - TD_t^beta d3 L) - lambda (d2 g + gamma1 tD_b^alpha d3 g)
double el_residual_problem2(const ProblemSpec& p, const Trajectory& x, double T, MultiplierPair m, double t,
                            const QuadratureConfig& cfg);
std::array<SampledFamily, 2> el_residuals_problem2(const ProblemSpec& p, const Trajectory& x, double T,
                                                   MultiplierPair m, const QuadratureConfig& cfg);

/// int_a^T g - psi(T) (Problem I) or int_a^b g - C (Problem II), trapezoid on the grid.
double isoperimetric_gap(const ProblemSpec& p, const Trajectory& x, double T, const QuadratureConfig& cfg);

/// Full audit of an isoperimetric candidate: EL families, transversality
/// scalars and gap. F is built from `m`.
ResidualReport iso_residuals(const ProblemSpec& p, const Trajectory& x, double T, MultiplierPair m,
                             const QuadratureConfig& cfg);

/// The multiplier function of the holonomic theorem at t; the interior branch
/// owns t = T. Throws SingularConstraint when |d3 g| < 1e-12.
double holonomic_multiplier(const HolonomicProblem& hp, const TrajectoryPair& x, double T, double t,
                            const QuadratureConfig& cfg);

/// Checks x1(a) = x1a, x2(a) = x2a and g = 0 on the grid (tolerance 1e-8),
/// then evaluates the four EL families and the five transversality scalars.
ResidualReport holonomic_residuals(const HolonomicProblem& hp, const TrajectoryPair& x, double T,
                                   const QuadratureConfig& cfg);

/// Indices of retained nodes in [lo + 2h, hi - 2h].
std::vector<std::size_t> retained_nodes(std::span<const double> t, double lo, double hi, double h);

}  // namespace vofc::variational
