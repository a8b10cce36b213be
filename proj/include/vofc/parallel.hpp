#pragma once

// Data-parallel sweeps over evaluation points. Every kernel has a serial
// reference path selected with Execution::serial; both paths perform the same
// floating-point operations per output entry, so results are bit-identical.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "vofc/fracops.hpp"

namespace vofc::parallel {

enum class Execution { serial, parallel };

/// Number of worker threads an OpenMP region would use (1 without OpenMP).
int max_threads() noexcept;

/// out[i] = op(points[i]). The first exception raised by any worker is
/// rethrown on the calling thread after the sweep.
std::vector<double> tabulate(std::span<const double> points, const std::function<double(double)>& op,
                             Execution exec = Execution::parallel);

/// out[i] = op(i) for i in [0, n), with the same error handling as tabulate.
std::vector<double> tabulate_indexed(std::size_t n, const std::function<double(std::size_t)>& op,
                                     Execution exec = Execution::parallel);

/// Dense row-major weights W such that, for a trajectory sampled on the
/// uniform grid of `cfg.nodes` cells, (W x)_i equals the combined Caputo
/// derivative at node i.
class CaputoMatrix {
 public:
  CaputoMatrix(std::size_t size, std::vector<double> weights) : size_(size), weights_(std::move(weights)) {}

  std::size_t size() const noexcept { return size_; }
  double operator()(std::size_t row, std::size_t col) const noexcept { return weights_[row * size_ + col]; }
  std::span<const double> row(std::size_t r) const noexcept { return {weights_.data() + r * size_, size_}; }

  std::vector<double> apply(std::span<const double> values) const;

 private:
  std::size_t size_;
  std::vector<double> weights_;
};

CaputoMatrix combined_caputo_matrix(const fracops::CombinedSpec& spec, const fracops::QuadratureConfig& cfg,
                                    Execution exec = Execution::parallel);

}  // namespace vofc::parallel
