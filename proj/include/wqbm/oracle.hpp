#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "wqbm/model.hpp"
#include "wqbm/propagator.hpp"

namespace wqbm {

/// Finite bath reproducing a Drude spectral density on [0, omega_max].
///
/// Frequencies are midpoints of bins that carry equal weight in the measure
/// I(w)/w dw, i.e. w = wc tan(theta) on a uniform theta grid, and
///   c_j^2 = (2/pi) m_j w_j I(w_j) dw_j,
/// so that (pi/2) sum_j c_j^2 / (m_j w_j) delta(w - w_j) bins to I(w).
struct BathDiscretization {
  std::vector<double> omega;
  std::vector<double> coupling;
  std::vector<double> mass;
  std::vector<double> bin_width;
  double omega_max = 0.0;
  double counter_term = 0.0;  ///< sum_j c_j^2 / (m_j w_j^2)

  std::size_t size() const { return omega.size(); }
  /// (pi/2) sum_j c_j^2 / (m_j w_j), the discrete integral of I(w).
  double spectral_sum() const;
  /// 2 pi / (smallest frequency spacing).
  double recurrence_time() const;
};

/// Throws ParameterError unless damping is Drude, N >= 2 and omega_max >=
/// 5 wc; omega_max <= 0 selects 10 wc.
BathDiscretization discretize_bath(const DampingSpec& damping, const SystemParams& params,
                                   std::size_t n, double omega_max = 0.0);

/// Gaussian state of system plus bath in the ordering
/// (p, q, P_1, Q_1, ..., P_N, Q_N).
struct FullGaussianState {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

/// System state times the thermal state of the uncoupled bath oscillators.
FullGaussianState factorized_thermal_state(const GaussianWigner& system,
                                           const BathDiscretization& bath,
                                           const SystemParams& params);

/// Exact linear Hamiltonian flow of system plus bath (with counter-term) by
/// normal-mode diagonalization; built once, evaluated at any t.
class NormalModeFlow {
 public:
  /// Throws DiagonalizationError when the stiffness form is not positive.
  NormalModeFlow(const BathDiscretization& bath, const SystemParams& params);

  std::size_t dimension() const { return 2 * (modes_.size()); }
  const Eigen::VectorXd& frequencies() const { return freq_; }

  /// E(t) with x(t) = E(t) x(0) in the FullGaussianState ordering.
  Eigen::MatrixXd flow(double t) const;
  /// The two system rows of E(t).
  Eigen::MatrixXd system_rows(double t) const;

 private:
  Eigen::MatrixXd flow_rows(double t, const std::vector<Eigen::Index>& rows) const;

  std::vector<double> modes_;       // masses of the coordinates (q, Q_1..Q_N)
  Eigen::VectorXd freq_;            // normal-mode frequencies
  Eigen::MatrixXd to_modes_;        // U^T: mass-weighted coordinates to modes
};

FullGaussianState evolve_full(const FullGaussianState& state, const NormalModeFlow& flow,
                              double t);
FullGaussianState evolve_full(const FullGaussianState& state, const BathDiscretization& bath,
                              const SystemParams& params, double t);

/// Reduced state at time t without forming the full evolved covariance.
GaussianWigner evolve_reduced(const FullGaussianState& state, const NormalModeFlow& flow,
                              double t);

/// System (p, q) block of mean and covariance.
GaussianWigner reduced_system_state(const FullGaussianState& state);

/// sqrt(det cov) of a one-mode covariance; at least hbar / 2 for physical states.
double symplectic_eigenvalue(const Matrix2& cov);

/// Relative deviations used by the oracle comparison: covariance entries
/// against sqrt(C_ii C_jj) and means against max(|mu_i|, sqrt(C_ii)).
struct OracleDeviation {
  double mean = 0.0;
  double cov = 0.0;
};

OracleDeviation compare_states(const GaussianWigner& reference, const GaussianWigner& other);

}  // namespace wqbm
