#pragma once

#include <cstddef>
#include <vector>

#include "wqbm/model.hpp"
#include "wqbm/propagator.hpp"

namespace wqbm {

/// Uniform rectangular phase-space grid with cell values of a Wigner function.
/// Cell (i, j) sits at (p0 + i dp, q0 + j dq); values are stored p-major.
struct GridWigner {
  double p0 = 0.0;
  double dp = 1.0;
  std::size_t np = 0;
  double q0 = 0.0;
  double dq = 1.0;
  std::size_t nq = 0;
  std::vector<double> values;

  static GridWigner zeros(double p0, double dp, std::size_t np, double q0, double dq,
                          std::size_t nq);
  /// Samples a Gaussian on the grid.
  static GridWigner gaussian(const GaussianWigner& state, double p0, double dp, std::size_t np,
                             double q0, double dq, std::size_t nq);

  double p(std::size_t i) const { return p0 + dp * static_cast<double>(i); }
  double q(std::size_t j) const { return q0 + dq * static_cast<double>(j); }
  double& at(std::size_t i, std::size_t j) { return values[i * nq + j]; }
  double at(std::size_t i, std::size_t j) const { return values[i * nq + j]; }

  /// Throws ParameterError unless spacings are positive and sizes agree.
  void validate() const;
};

/// mean' = M mean, cov' = M cov M^T + kernel_cov. kernel_cov is regular at
/// caustics and vanishes at t = 0, so every t >= 0 is accepted.
GaussianWigner evolve_gaussian(const GaussianWigner& state, const CovarianceData& cov,
                               const Matrix2& map);

/// Dense quadrature of int G_W(r'', r') W(r') d^2 r' onto the grid geometry of
/// `state`. Throws UnderresolvedKernelError unless the kernel covariance, in
/// units of the cell spacings, has smallest eigenvalue >= 4.
GridWigner evolve_grid(const GridWigner& state, const CovarianceData& cov, const Matrix2& map);

struct GridMoments {
  double mass = 0.0;
  PhasePoint mean;
  Matrix2 cov = Matrix2::Zero();
};

/// Trapezoidal mass, mean and central covariance.
GridMoments moments(const GridWigner& state);

/// Largest covariance-entry difference between two-step and one-step
/// evolution. Nonzero in general: each step re-prepares a factorized state.
double semigroup_deviation(const GaussianWigner& state, const CovarianceData& cov1,
                           const Matrix2& map1, const CovarianceData& cov2, const Matrix2& map2,
                           const CovarianceData& cov12, const Matrix2& map12);

}  // namespace wqbm
