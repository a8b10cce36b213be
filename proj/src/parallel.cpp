#include "vofc/parallel.hpp"

#include <exception>

#include "fracops_kernel.hpp"
#include "vofc/error.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace vofc::parallel {

using fracops::detail::Grid;
using fracops::detail::Kernel;

int max_threads() noexcept {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

std::vector<double> tabulate_indexed(std::size_t n, const std::function<double(std::size_t)>& op, Execution exec) {
  const auto count = static_cast<std::ptrdiff_t>(n);
  std::vector<double> out(n);
  if (exec == Execution::serial) {
    for (std::size_t i = 0; i < n; ++i) out[i] = op(i);
    return out;
  }
  std::exception_ptr first_error;
#pragma omp parallel for schedule(dynamic, 4)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    try {
      out[static_cast<std::size_t>(i)] = op(static_cast<std::size_t>(i));
    } catch (...) {
#pragma omp critical(vofc_tabulate_error)
      if (!first_error) first_error = std::current_exception();
    }
  }
  if (first_error) std::rethrow_exception(first_error);
  return out;
}

std::vector<double> tabulate(std::span<const double> points, const std::function<double(double)>& op,
                             Execution exec) {
  return tabulate_indexed(points.size(), [&](std::size_t i) { return op(points[i]); }, exec);
}

std::vector<double> CaputoMatrix::apply(std::span<const double> values) const {
  if (values.size() != size_) fail(ErrorKind::InvalidProblem, "Caputo matrix applied to a vector of wrong length");
  std::vector<double> out(size_, 0.0);
  for (std::size_t r = 0; r < size_; ++r) {
    const double* w = weights_.data() + r * size_;
    double acc = 0.0;
    for (std::size_t c = 0; c < size_; ++c) acc += w[c] * values[c];
    out[r] = acc;
  }
  return out;
}

namespace {

// Row i of W: left Caputo contributions from cells k < i, right Caputo from
// cells k >= i. On cell k the secant slope is (x_{k+1} - x_k) / (q - p).
void assemble_row(const fracops::CombinedSpec& spec, const Grid& g, int i, double* row) {
  const double t = g.node(i);
  if (spec.gamma1() != 0.0) {
    for (int k = 0; k < i; ++k) {
      const double p = g.node(k), q = g.node(k + 1);
      const double mu = spec.alpha()(t, 0.5 * (p + q));
      const auto w = fracops::detail::cell_weight(Kernel::derivative, mu);
      const double c = spec.gamma1() * w.inv_gamma * fracops::detail::kernel_moment(t - q, t - p, w.exponent) / (q - p);
      row[k + 1] += c;
      row[k] -= c;
    }
  }
  if (spec.gamma2() != 0.0) {
    for (int k = i; k < g.n; ++k) {
      const double p = g.node(k), q = g.node(k + 1);
      const double mu = spec.beta()(0.5 * (p + q), t);
      const auto w = fracops::detail::cell_weight(Kernel::derivative, mu);
      const double c = -spec.gamma2() * w.inv_gamma * fracops::detail::kernel_moment(p - t, q - t, w.exponent) / (q - p);
      row[k + 1] += c;
      row[k] -= c;
    }
  }
}

}  // namespace

CaputoMatrix combined_caputo_matrix(const fracops::CombinedSpec& spec, const fracops::QuadratureConfig& cfg,
                                    Execution exec) {
  cfg.validate();
  const Grid g(spec.domain(), cfg.nodes);
  const auto size = static_cast<std::size_t>(cfg.nodes) + 1;
  std::vector<double> w(size * size, 0.0);
  const int rows = cfg.nodes + 1;
  if (exec == Execution::serial) {
    for (int i = 0; i < rows; ++i) assemble_row(spec, g, i, w.data() + static_cast<std::size_t>(i) * size);
    return CaputoMatrix(size, std::move(w));
  }
  std::exception_ptr first_error;
#pragma omp parallel for schedule(dynamic, 8)
  for (int i = 0; i < rows; ++i) {
    try {
      assemble_row(spec, g, i, w.data() + static_cast<std::size_t>(i) * size);
    } catch (...) {
#pragma omp critical(vofc_matrix_error)
      if (!first_error) first_error = std::current_exception();
    }
  }
  if (first_error) std::rethrow_exception(first_error);
  return CaputoMatrix(size, std::move(w));
}

}  // namespace vofc::parallel
