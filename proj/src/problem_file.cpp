#include "vofc/problem_file.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "vofc/error.hpp"
#include "vofc/expr.hpp"

namespace vofc::problem_file {

namespace pt = boost::property_tree;
using fracops::Interval;
using fracops::OrderField;
using fracops::Trajectory;
using variational::Variant;

namespace {

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  s = s.substr(b, e - b + 1);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

// Boost's INI reader only knows ';' comments; '#' lines are blanked first so
// line numbers in its messages stay valid.
std::string strip_hash_comments(const std::string& text) {
  std::istringstream is(text);
  std::string out, line;
  while (std::getline(is, line)) {
    const auto b = line.find_first_not_of(" \t");
    if (b != std::string::npos && line[b] == '#') line.clear();
    out += line;
    out += '\n';
  }
  return out;
}

class Sections {
 public:
  Sections(pt::ptree tree, std::string name) : tree_(std::move(tree)), name_(std::move(name)) {}

  bool has_section(const std::string& s) const { return tree_.get_child_optional(s).has_value(); }

  std::optional<std::string> get(const std::string& section, const std::string& key) {
    used_.insert(section + "." + key);
    const auto child = tree_.get_child_optional(pt::ptree::path_type(section + "." + key, '.'));
    if (!child) return std::nullopt;
    return trim(child->data());
  }

  std::string require(const std::string& section, const std::string& key) {
    if (auto v = get(section, key)) return *v;
    fail(ErrorKind::InvalidProblem, name_ + ": missing key '" + key + "' in [" + section + "]");
  }

  double number(const std::string& section, const std::string& key, std::optional<double> fallback = {}) {
    const auto v = get(section, key);
    if (!v) {
      if (fallback) return *fallback;
      fail(ErrorKind::InvalidProblem, name_ + ": missing key '" + key + "' in [" + section + "]");
    }
    return parse_number(*v, section, key);
  }

  double parse_number(const std::string& text, const std::string& section, const std::string& key) const {
    std::size_t used = 0;
    double out = 0.0;
    try {
      out = std::stod(text, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || trim(text.substr(used)) != "" || !std::isfinite(out))
      fail(ErrorKind::InvalidProblem, name_ + ": [" + section + "] " + key + " = '" + text + "' is not a number");
    return out;
  }

  /// Every key present must have been read.
  void reject_unknown() const {
    for (const auto& [section, body] : tree_) {
      if (body.empty() && !body.data().empty())
        fail(ErrorKind::InvalidProblem, name_ + ": key '" + section + "' outside any section");
      static const std::set<std::string> known{"domain", "operator", "problem", "constraint", "numerics"};
      if (!known.count(section)) fail(ErrorKind::InvalidProblem, name_ + ": unknown section [" + section + "]");
      for (const auto& [key, value] : body)
        if (!used_.count(section + "." + key))
          fail(ErrorKind::InvalidProblem, name_ + ": unknown key '" + key + "' in [" + section + "]");
    }
  }

  const std::string& name() const noexcept { return name_; }

 private:
  pt::ptree tree_;
  std::string name_;
  std::set<std::string> used_;
};

[[noreturn]] void rethrow_in(const expr::ParseError& err, const std::string& what, const std::string& source) {
  // keep the parser's own wording, dropping its kind prefix and position suffix
  std::string detail = err.what();
  const std::string prefix = std::string(to_string(err.kind())) + ": ";
  if (detail.rfind(prefix, 0) == 0) detail.erase(0, prefix.size());
  if (const auto at = detail.rfind(" at position "); at != std::string::npos) detail.erase(at);
  throw expr::ParseError(err.kind(), err.position(), "in " + what + " '" + source + "': " + detail);
}

expr::Expr parse_in(const std::string& source, std::vector<std::string> vars, const std::string& what) {
  try {
    return expr::parse(source, std::move(vars));
  } catch (const expr::ParseError& err) {
    rethrow_in(err, what, source);
  }
}

template <std::size_t N>
variational::ScalarField<N> field_from(const std::string& source, std::vector<std::string> vars, const std::string& what) {
  const expr::Expr e = parse_in(source, std::move(vars), what);
  return variational::ScalarField<N>([e](const typename variational::ScalarField<N>::Args& a) { return e.evaluate(a); },
                                     {}, source);
}

expr::Expr scalar_expr(const std::string& source, const std::string& var, const std::string& what) {
  return parse_in(source, {var}, what);
}

Variant parse_variant(const std::string& s, const std::string& name) {
  if (s == "iso1") return Variant::iso1;
  if (s == "iso2") return Variant::iso2;
  if (s == "holonomic") return Variant::holonomic;
  fail(ErrorKind::InvalidProblem, name + ": variant must be iso1, iso2 or holonomic, not '" + s + "'");
}

}  // namespace

OrderField order_from_expression(const std::string& source, const Interval& domain) {
  const expr::Expr e = parse_in(source, {"t", "tau"}, "order field");
  return OrderField(domain, [e](double t, double tau) { return e.evaluate(std::array{t, tau}); }, source);
}

Trajectory trajectory_from_expression(const std::string& source, const Interval& domain) {
  const expr::Expr e = scalar_expr(source, "t", "trajectory");
  auto value = [e](double t) { return e.evaluate(std::array{t}); };
  auto slope = [value, domain](double t) {
    const double h = 1e-6 * (1.0 + std::abs(t));
    if (t - h < domain.a()) return (-3.0 * value(t) + 4.0 * value(t + h) - value(t + 2.0 * h)) / (2.0 * h);
    if (t + h > domain.b()) return (3.0 * value(t) - 4.0 * value(t - h) + value(t - 2.0 * h)) / (2.0 * h);
    return (value(t + h) - value(t - h)) / (2.0 * h);
  };
  return Trajectory::closed_form(domain, value, slope);
}

ProblemFile parse(const std::string& text, const std::string& name) {
  pt::ptree tree;
  try {
    std::istringstream is(strip_hash_comments(text));
    pt::ini_parser::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    fail(ErrorKind::SyntaxError, name + ":" + std::to_string(e.line()) + ": " + e.message());
  }
  Sections s(std::move(tree), name);

  const Interval dom(s.number("domain", "a"), s.number("domain", "b"));
  const OrderField alpha = order_from_expression(s.get("operator", "alpha").value_or("0.5"), dom);
  const OrderField beta = order_from_expression(s.get("operator", "beta").value_or("0.5"), dom);
  ProblemFile pf{name,
                 fracops::CombinedSpec(alpha, beta, s.number("operator", "gamma1", 0.5),
                                       s.number("operator", "gamma2", 0.5)),
                 std::nullopt,
                 std::nullopt,
                 std::nullopt,
                 {}};

  Numerics& num = pf.numerics;
  const double nodes = s.number("numerics", "nodes", 256.0);
  if (nodes != std::floor(nodes) || nodes < 8 || nodes > 1 << 20)
    fail(ErrorKind::InvalidConfig, name + ": nodes must be an integer >= 8");
  num.cfg.nodes = static_cast<int>(nodes);
  num.cfg.diff_step = s.number("numerics", "diff_step", 0.0);
  num.cfg.validate();
  num.tol = s.number("numerics", "tol", 1e-6);
  if (!(num.tol > 0.0)) fail(ErrorKind::InvalidConfig, name + ": tol must be positive");
  if (const auto box = s.get("numerics", "T_box")) {
    const auto comma = box->find(',');
    if (comma == std::string::npos) fail(ErrorKind::InvalidConfig, name + ": T_box must read 'lo, hi'");
    num.T_box = solver::Box{s.parse_number(trim(box->substr(0, comma)), "numerics", "T_box"),
                            s.parse_number(trim(box->substr(comma + 1)), "numerics", "T_box")};
  }

  if (s.has_section("problem")) {
    const Variant v = parse_variant(s.require("problem", "variant"), name);
    pf.variant = v;
    const std::string phi_src = s.get("problem", "phi").value_or("0");
    if (v == Variant::holonomic) {
      variational::HolonomicProblem hp{
          pf.spec,
          field_from<5>(s.require("problem", "lagrangian"), {"t", "x1", "x2", "v1", "v2"}, "lagrangian"),
          field_from<3>(phi_src, {"T", "x1T", "x2T"}, "phi"),
          field_from<3>(s.require("constraint", "g"), {"t", "x1", "x2"}, "g"),
          s.number("problem", "x1a"),
          s.number("problem", "x2a"),
          nullptr};
      if (const auto r = s.get("constraint", "resolver")) {
        const expr::Expr e = parse_in(*r, {"t", "x1"}, "resolver");
        hp.resolver = [e](double t, double x1) { return e.evaluate(std::array{t, x1}); };
      }
      pf.holonomic = std::move(hp);
    } else {
      auto L = field_from<3>(s.require("problem", "lagrangian"), {"t", "x", "v"}, "lagrangian");
      auto phi = field_from<2>(phi_src, {"T", "xT"}, "phi");
      auto g = field_from<3>(s.require("constraint", "g"), {"t", "x", "v"}, "g");
      std::variant<variational::IsoConstraintI, variational::IsoConstraintII> c;
      if (v == Variant::iso1) {
        const auto psi = s.get("constraint", "psi");
        const auto integrand = s.get("constraint", "psi_integrand");
        if (psi.has_value() == integrand.has_value())
          fail(ErrorKind::InvalidProblem, name + ": iso1 needs exactly one of psi and psi_integrand in [constraint]");
        if (psi) {
          const expr::Expr e = scalar_expr(*psi, "T", "psi");
          c = variational::IsoConstraintI{std::move(g), [e](double T) { return e.evaluate(std::array{T}); }, nullptr};
        } else {
          const expr::Expr e = scalar_expr(*integrand, "t", "psi_integrand");
          c = variational::IsoConstraintI::from_integrand(std::move(g), dom,
                                                          [e](double t) { return e.evaluate(std::array{t}); });
        }
      } else {
        c = variational::IsoConstraintII{std::move(g), s.number("constraint", "C")};
      }
      pf.iso = variational::ProblemSpec{pf.spec, std::move(L), std::move(phi), std::move(c), s.number("problem", "xa")};
    }
  }
  s.reject_unknown();
  return pf;
}

ProblemFile load(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(ErrorKind::InvalidProblem, "cannot open problem file " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse(ss.str(), path.filename().string());
}

}  // namespace vofc::problem_file
