#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "vofc/examples.hpp"
#include "vofc/io.hpp"
#include "vofc/problem_file.hpp"
#include "vofc/solver.hpp"

namespace vofc::cli {

using fracops::Interval;
using fracops::QuadratureConfig;
using fracops::Trajectory;
using io::CsvTable;
using io::format_number;
using variational::ResidualReport;
using variational::Variant;

namespace {

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6e", v);
  return buf;
}

std::vector<double> parse_times(const std::string& list) {
  std::vector<double> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || item.find_first_not_of(" \t", used) != std::string::npos)
      fail(ErrorKind::InvalidProblem, "'" + item + "' is not a time");
    out.push_back(v);
  }
  if (out.empty()) fail(ErrorKind::InvalidProblem, "no probe times given");
  return out;
}

QuadratureConfig grid_for(const problem_file::ProblemFile& pf, std::optional<int> nodes) {
  QuadratureConfig cfg = pf.numerics.cfg;
  if (nodes) cfg.nodes = *nodes;
  cfg.validate();
  return cfg;
}

/// Writes the table, or prints it when the path is "-". Returns a line for the report.
std::string emit(const CsvTable& table, const std::string& requested, const std::string& default_name,
                 std::ostream& out) {
  if (requested == "-") {
    out << table.render();
    return {};
  }
  const auto path = io::output_path(requested, default_name);
  io::write_file_atomic(path, table.render());
  return "csv: " + path.string();
}

bool looks_like_csv(const std::string& s) {
  return s.size() > 4 && s.substr(s.size() - 4) == ".csv" && std::filesystem::exists(s);
}

void add_families(CsvTable& table, const ResidualReport& r) {
  for (const auto& f : r.families)
    for (std::size_t k = 0; k < f.t.size(); ++k) table.add_row({format_number(f.t[k]), f.name, format_number(f.value[k])});
  if (r.multiplier)
    for (std::size_t k = 0; k < r.multiplier->t.size(); ++k)
      table.add_row({format_number(r.multiplier->t[k]), r.multiplier->name, format_number(r.multiplier->value[k])});
}

/// With a tolerance, each entry is marked ok or EXCEEDS, except those in `unaudited`.
void print_residuals(const ResidualReport& r, std::ostream& out, double tolerance = -1.0,
                     const std::vector<std::string>& unaudited = {}) {
  auto mark = [tolerance](double v) {
    if (tolerance < 0.0) return std::string();
    return std::abs(v) <= tolerance ? std::string("  ok") : std::string("  EXCEEDS ") + sci(tolerance);
  };
  out << "grid: " << r.grid.nodes << " cells, " << r.excluded_cells
      << " cells excluded next to each of a, T and b\n";
  for (const auto& f : r.families) {
    out << "  " << f.name << ": sup " << sci(f.sup_norm) << " over " << f.t.size() << " nodes";
    if (f.analytically_zero) out << " (zero by construction)";
    out << mark(f.sup_norm) << '\n';
  }
  if (r.multiplier) out << "  multiplier: sup " << sci(r.multiplier->sup_norm) << mark(r.multiplier->sup_norm) << '\n';
  for (const auto& s : r.transversality) {
    const bool skip = std::find(unaudited.begin(), unaudited.end(), s.name) != unaudited.end();
    out << "  " << s.name << " = " << sci(s.value) << (skip ? "  (fixes T, see sweep)" : mark(s.value)) << '\n';
  }
  out << "  constraint gap = " << sci(r.constraint_gap) << '\n';
}

CsvTable residual_table() { return CsvTable{{"t", "family", "value"}, {}}; }

}  // namespace

int run_deriv(const DerivArgs& a, std::ostream& out) {
  const auto pf = problem_file::load(a.file);
  const QuadratureConfig cfg = grid_for(pf, a.nodes);
  const Trajectory x = problem_file::trajectory_from_expression(a.x, pf.domain());
  const auto times = parse_times(a.at);
  const auto& s = pf.spec;
  const bool fd = a.which == "left-rl" || a.which == "right-rl" || a.which == "dual";
  CsvTable table{{"t", "value", "nodes", "scheme"}, {}};
  for (double t : times) {
    double v = 0.0;
    if (a.which == "left-caputo") v = fracops::left_caputo(x, s.alpha(), t, cfg);
    else if (a.which == "right-caputo") v = fracops::right_caputo(x, s.beta(), t, cfg);
    else if (a.which == "left-rl") v = fracops::left_rl_derivative(x, s.alpha(), t, cfg);
    else if (a.which == "right-rl") v = fracops::right_rl_derivative(x, s.beta(), t, cfg);
    else if (a.which == "combined") v = fracops::combined_caputo(x, s, t, cfg);
    else v = fracops::dual_derivative(x, s, pf.domain().b(), t, cfg);
    table.add_row({format_number(t), format_number(v), std::to_string(cfg.nodes), fd ? "product+fd" : "product"});
  }
  if (cfg.diff_step_warning(pf.domain()) && fd)
    std::cerr << "warning: finite-difference step is wider than a grid cell\n";
  const std::string line = emit(table, a.out, "deriv.csv", out);
  if (!line.empty()) out << line << '\n';
  return ok;
}

int run_check_ibp(const IbpArgs& a, std::ostream& out) {
  const auto pf = problem_file::load(a.file);
  QuadratureConfig cfg = grid_for(pf, a.nodes);
  const Trajectory x = problem_file::trajectory_from_expression(a.x, pf.domain());
  const Trajectory y = problem_file::trajectory_from_expression(a.y, pf.domain());
  const auto side = a.side == "left" ? fracops::Side::left : fracops::Side::right;
  CsvTable table{{"nodes", "lhs", "rhs_plus_boundary", "residual"}, {}};
  for (int k = 0; k < a.refine; ++k) {
    const auto r = fracops::check_integration_by_parts(x, y, pf.spec.alpha(), side, cfg);
    table.add_row({std::to_string(cfg.nodes), format_number(r.lhs), format_number(r.rhs_plus_boundary),
                   format_number(r.residual)});
    cfg.nodes *= 2;
  }
  const std::string line = emit(table, a.out, "ibp.csv", out);
  if (!line.empty()) out << line << '\n';
  return ok;
}

int run_residuals(const ResidualArgs& a, std::ostream& out) {
  const auto pf = problem_file::load(a.file);
  if (!pf.variant) fail(ErrorKind::InvalidProblem, pf.name + " has no [problem] section");
  const QuadratureConfig cfg = grid_for(pf, a.nodes);
  const Interval& dom = pf.domain();
  const double T = a.T.value_or(dom.b());
  ResidualReport r;
  std::ostringstream head;
  head << "problem: " << pf.name << " (" << variational::to_string(*pf.variant) << ")\n";
  head << "T = " << format_number(T) << '\n';

  std::optional<io::NumericCsv> csv;
  if (looks_like_csv(a.candidate)) csv = io::read_numeric_csv(a.candidate);
  auto sampled = [&](const char* column) { return Trajectory::sampled(csv->column("t"), csv->column(column)); };

  if (*pf.variant == Variant::holonomic) {
    const auto& hp = *pf.holonomic;
    Trajectory x1 = csv ? sampled(csv->has("x1") ? "x1" : "x") : problem_file::trajectory_from_expression(a.candidate, dom);
    std::optional<Trajectory> x2;
    if (csv && csv->has("x2")) {
      x2 = sampled("x2");
    } else if (!a.candidate2.empty()) {
      x2 = problem_file::trajectory_from_expression(a.candidate2, dom);
    } else if (hp.resolver) {
      const auto nodes = fracops::grid_nodes(dom, cfg.nodes);
      std::vector<double> v(nodes.size());
      for (std::size_t k = 0; k < nodes.size(); ++k) v[k] = hp.resolver(nodes[k], x1.value(nodes[k]));
      x2 = Trajectory::sampled(nodes, v);
    } else {
      fail(ErrorKind::InvalidProblem, "holonomic candidates need --candidate2 or a resolver");
    }
    r = variational::holonomic_residuals(hp, {x1, *x2}, T, cfg);
  } else {
    const variational::MultiplierPair m{a.lambda0, a.lambda};
    const Trajectory x = csv ? sampled("x") : problem_file::trajectory_from_expression(a.candidate, dom);
    r = variational::iso_residuals(*pf.iso, x, T, m, cfg);
    head << "lambda0 = " << format_number(m.lambda0) << ", lambda = " << format_number(m.lambda) << '\n';
    const auto cons = variational::constraint_el_residuals(*pf.iso, x, T, cfg);
    const double cons_sup = std::max(cons[0].sup_norm, cons[1].sup_norm);
    head << "constraint EL sup = " << sci(cons_sup)
         << (cons_sup <= 1e-10 ? " (candidate is extremal for the constraint: abnormal case)\n" : "\n");
  }

  CsvTable table = residual_table();
  add_families(table, r);
  out << head.str();
  print_residuals(r, out);
  const std::string line = emit(table, a.out, "residuals.csv", out);
  if (!line.empty()) out << line << '\n';
  return ok;
}

namespace {

void print_solve(const solver::SolveReport& r, std::ostream& out) {
  out << "variant: " << variational::to_string(r.variant) << '\n';
  out << "converged: " << (r.converged ? "yes" : "no") << " (" << r.reason << ")\n";
  out << "objective = " << format_number(r.objective) << '\n';
  out << "T = " << format_number(r.T) << '\n';
  if (r.variant != Variant::holonomic)
    out << "lambda0 = " << format_number(r.multipliers.lambda0) << ", lambda = " << format_number(r.multipliers.lambda)
        << '\n';
  out << "constraint gap = " << sci(r.constraint_gap) << '\n';
  out << "nodes = " << r.nodes << ", evaluations = " << r.evaluations << ", outer iterations = " << r.outer_iterations
      << ", simplex diameter = " << sci(r.simplex_diameter) << '\n';
  if (r.residuals) {
    out << "residuals:\n";
    print_residuals(*r.residuals, out);
  }
}

CsvTable trajectory_table(const solver::SolveReport& r) {
  CsvTable t{r.x2.empty() ? std::vector<std::string>{"t", "x"} : std::vector<std::string>{"t", "x1", "x2"}, {}};
  for (std::size_t k = 0; k < r.t.size(); ++k) {
    std::vector<std::string> row{format_number(r.t[k]), format_number(r.x[k])};
    if (!r.x2.empty()) row.push_back(format_number(r.x2[k]));
    t.add_row(std::move(row));
  }
  return t;
}

}  // namespace

int run_solve(const SolveArgs& a, std::ostream& out) {
  const auto pf = problem_file::load(a.file);
  if (!pf.variant) fail(ErrorKind::InvalidProblem, pf.name + " has no [problem] section");
  solver::DiscretizationPlan plan;
  plan.nodes = a.nodes;
  plan.T_box = pf.numerics.T_box;
  solver::SolverOptions opts;
  opts.tol = pf.numerics.tol;
  if (a.budget) opts.budget = *a.budget;
  auto finish = [&](const solver::SolveReport& r) {
    print_solve(r, out);
    const std::string line = emit(trajectory_table(r), a.out, "trajectory.csv", out);
    if (!line.empty()) out << line << '\n';
  };
  try {
    const auto r = *pf.variant == Variant::holonomic ? solver::solve_holonomic(*pf.holonomic, plan, opts)
                                                     : solver::solve_iso(*pf.iso, plan, opts);
    finish(r);
    return ok;
  } catch (const solver::NoConvergence& e) {
    finish(e.report());
    std::cerr << "error: " << e.what() << '\n';
    return no_convergence;
  }
}

namespace {

void write_sweep(const solver::SweepReport& s, const std::filesystem::path& path) {
  CsvTable t{{"T", "r1"}, {}};
  for (const auto& row : s.rows) t.add_row({format_number(row.T), format_number(row.r1)});
  io::write_file_atomic(path, t.render());
}

}  // namespace

int run_example(const ExampleArgs& a, std::ostream& out) {
  const Interval dom(0.0, a.b);
  auto alpha_t = problem_file::order_from_expression(a.alpha, dom);
  auto beta_t = problem_file::order_from_expression(a.beta, dom);
  // alpha(t, tau) = alpha(t), beta(t, tau) = beta(tau)
  const fracops::CombinedSpec spec(
      fracops::OrderField(dom, [alpha_t](double t, double) { return alpha_t(t, t); }, a.alpha + " (in t)"),
      fracops::OrderField(dom, [beta_t](double, double tau) { return beta_t(tau, tau); }, a.beta + " (in tau)"), 0.5,
      0.5);
  QuadratureConfig cfg;
  cfg.nodes = a.nodes;
  const double T = a.T.value_or(0.5 * a.b);
  std::vector<examples::SignConvention> signs;
  if (a.sign != "derived") signs.push_back(examples::SignConvention::paper);
  if (a.sign != "paper") signs.push_back(examples::SignConvention::derived);
  const double tol = examples::kAuditTolerance;
  std::filesystem::path dir;
  if (!a.out_dir.empty()) dir = a.out_dir;
  else if (const char* env = std::getenv("VOFC_OUTPUT_DIR"); env && *env) dir = env;

  out << "example: " << a.name << " on [0, " << format_number(a.b) << "], alpha(t) = " << a.alpha
      << ", beta(t) = " << a.beta << ", gamma = (1/2, 1/2)\n";
  out << "audit at T = " << format_number(T) << ", tolerance " << sci(tol) << "\n";

  std::vector<std::pair<std::string, bool>> verdicts;
  for (const auto sign : signs) {
    const std::string tag = examples::to_string(sign);
    out << "\n[sign convention: " << tag << "]\n";
    if (a.name == "paper-iso") {
      const auto audit = examples::audit_iso(spec, sign, T, cfg, a.sweep_points);
      print_residuals(audit.report, out, tol, {"ct1_r1", "ct2_r1"});
      out << "EL conditions: " << (audit.el_pass ? "PASS" : "FAIL") << '\n';
      out << "last two CT1 conditions: " << (audit.ct_pass ? "PASS" : "FAIL") << '\n';
      const auto& sw = audit.sweep;
      out << "r1 sweep over " << sw.rows.size() << " values of T in (0, " << format_number(a.b) << "): ";
      if (sw.sign_change)
        out << "sign change, root near T = " << format_number(*sw.root) << '\n';
      else
        out << "no sign change on (0, b); min |r1| = " << sci(sw.min_abs_r1) << " at T = " << format_number(sw.argmin_T)
            << '\n';
      verdicts.emplace_back(tag, audit.el_pass && audit.ct_pass);
      if (!dir.empty()) {
        CsvTable table = residual_table();
        add_families(table, audit.report);
        io::write_file_atomic(dir / ("paper-iso-" + tag + "-residuals.csv"), table.render());
        write_sweep(sw, dir / ("paper-iso-" + tag + "-sweep.csv"));
      }
    } else {
      const auto audit = examples::audit_holonomic(spec, sign, T, cfg);
      print_residuals(audit.report, out, tol);
      out << "EL conditions and multiplier: " << (audit.el_pass ? "PASS" : "FAIL") << '\n';
      out << "CTh1 conditions two to five: " << (audit.brackets_pass ? "PASS" : "FAIL") << '\n';
      out << "CTh1 first condition: " << (audit.terminal_pass ? "PASS" : "FAIL")
          << (audit.terminal_pass ? "" : " (equals L at T, which is alpha(T) along the candidate)") << '\n';
      verdicts.emplace_back(tag, audit.el_pass && audit.brackets_pass && audit.terminal_pass);
      if (!dir.empty()) {
        CsvTable table = residual_table();
        add_families(table, audit.report);
        io::write_file_atomic(dir / ("paper-holonomic-" + tag + "-residuals.csv"), table.render());
      }
      if (a.resolve) {
        const auto hp = examples::holonomic_problem(spec, sign);
        solver::DiscretizationPlan plan;
        plan.nodes = 21;
        plan.T_box = solver::Box{a.b, a.b};
        for (double t : fracops::grid_nodes(dom, plan.cells())) plan.initial.push_back(t + 0.3 * std::sin(M_PI * t / a.b));
        const auto r = solver::solve_holonomic(hp, plan);
        double dx1 = 0.0, dx2 = 0.0;
        for (std::size_t k = 0; k < r.t.size(); ++k) {
          dx1 = std::max(dx1, std::abs(r.x[k] - r.t[k]));
          dx2 = std::max(dx2, std::abs(r.x2[k] - 1.0));
        }
        out << "re-solve from x1 = t + 0.3 sin(pi t / b), N = 21: max|x1 - t| = " << sci(dx1)
            << ", max|x2 - 1| = " << sci(dx2) << '\n';
      }
    }
  }
  out << '\n';
  for (const auto& [tag, pass] : verdicts)
    out << "summary (" << tag << "): " << (pass ? "PASS" : "FAIL (see marked residuals)") << '\n';
  return ok;
}

}  // namespace vofc::cli
