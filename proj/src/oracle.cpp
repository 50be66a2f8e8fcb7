#include "wqbm/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "wqbm/errors.hpp"
#include "wqbm/kernels.hpp"

namespace wqbm {

double BathDiscretization::spectral_sum() const {
  double s = 0.0;
  for (std::size_t j = 0; j < size(); ++j) {
    s += coupling[j] * coupling[j] / (mass[j] * omega[j]);
  }
  return 0.5 * std::numbers::pi * s;
}

double BathDiscretization::recurrence_time() const {
  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t j = 1; j < size(); ++j) gap = std::min(gap, omega[j] - omega[j - 1]);
  return 2.0 * std::numbers::pi / gap;
}

BathDiscretization discretize_bath(const DampingSpec& damping, const SystemParams& params,
                                   std::size_t n, double omega_max) {
  params.validate();
  damping.validate();
  if (damping.kind != DampingKind::DrudeOhmic) {
    throw ParameterError("bath discretization needs a Drude cutoff");
  }
  if (n < 2) throw ParameterError("bath discretization needs N >= 2");
  const double wc = damping.omega_c;
  if (omega_max <= 0.0) omega_max = 10.0 * wc;
  if (omega_max < 5.0 * wc) throw ParameterError("omega_max must be at least 5 omega_c");

  BathDiscretization bath;
  bath.omega_max = omega_max;
  const double theta_max = std::atan(omega_max / wc);
  const double dn = static_cast<double>(n);
  double prev_edge = 0.0;
  for (std::size_t j = 1; j <= n; ++j) {
    const double w = wc * std::tan((static_cast<double>(j) - 0.5) * theta_max / dn);
    const double edge = wc * std::tan(static_cast<double>(j) * theta_max / dn);
    const double dw = edge - prev_edge;
    prev_edge = edge;
    const double mj = params.mass;
    const double c2 = 2.0 / std::numbers::pi * mj * w * spectral_density(w, damping, params) * dw;
    bath.omega.push_back(w);
    bath.bin_width.push_back(dw);
    bath.mass.push_back(mj);
    bath.coupling.push_back(std::sqrt(c2));
    bath.counter_term += c2 / (mj * w * w);
  }
  return bath;
}

FullGaussianState factorized_thermal_state(const GaussianWigner& system,
                                           const BathDiscretization& bath,
                                           const SystemParams& params) {
  const auto n = static_cast<Eigen::Index>(bath.size());
  FullGaussianState s;
  s.mean = Eigen::VectorXd::Zero(2 * n + 2);
  s.cov = Eigen::MatrixXd::Zero(2 * n + 2, 2 * n + 2);
  s.mean(0) = system.mean.p;
  s.mean(1) = system.mean.q;
  s.cov.topLeftCorner<2, 2>() = system.cov;
  const double bh = params.beta * params.hbar;
  for (Eigen::Index j = 0; j < n; ++j) {
    const double w = bath.omega[j];
    const double mj = bath.mass[j];
    const double coth = 1.0 / std::tanh(0.5 * bh * w);
    s.cov(2 + 2 * j, 2 + 2 * j) = 0.5 * mj * params.hbar * w * coth;
    s.cov(3 + 2 * j, 3 + 2 * j) = 0.5 * params.hbar / (mj * w) * coth;
  }
  return s;
}

NormalModeFlow::NormalModeFlow(const BathDiscretization& bath, const SystemParams& params) {
  params.validate();
  const auto n = static_cast<Eigen::Index>(bath.size());
  const Eigen::Index dof = n + 1;
  // Stiffness of (q, Q_1..Q_N): V00 = m w0^2 + counter-term, V0j = -c_j, Vjj = m_j w_j^2.
  Eigen::MatrixXd V = Eigen::MatrixXd::Zero(dof, dof);
  V(0, 0) = params.mass * params.omega0 * params.omega0 + bath.counter_term;
  modes_.push_back(params.mass);
  for (Eigen::Index j = 0; j < n; ++j) {
    V(0, j + 1) = V(j + 1, 0) = -bath.coupling[j];
    V(j + 1, j + 1) = bath.mass[j] * bath.omega[j] * bath.omega[j];
    modes_.push_back(bath.mass[j]);
  }
  Eigen::VectorXd inv_sqrt(dof);
  for (Eigen::Index k = 0; k < dof; ++k) inv_sqrt(k) = 1.0 / std::sqrt(modes_[k]);
  const Eigen::MatrixXd K = inv_sqrt.asDiagonal() * V * inv_sqrt.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(K);
  if (es.info() != Eigen::Success) throw DiagonalizationError("eigensolver did not converge");
  const Eigen::VectorXd w2 = es.eigenvalues();
  const double tol = 1e-12 * w2.cwiseAbs().maxCoeff();
  if (!(w2.minCoeff() > tol)) {
    std::ostringstream os;
    os << "stiffness form is not positive definite (smallest eigenvalue " << w2.minCoeff()
       << ")";
    throw DiagonalizationError(os.str());
  }
  freq_ = w2.cwiseSqrt();
  to_modes_ = es.eigenvectors().transpose();
}

Eigen::MatrixXd NormalModeFlow::flow_rows(double t, const std::vector<Eigen::Index>& rows) const {
  // Mass-weighted coordinates y = sqrt(m) x, momenta pi = P / sqrt(m); in
  // modes a = U^T y, b = U^T pi evolve as rotations with frequency w_k.
  const Eigen::Index dof = static_cast<Eigen::Index>(modes_.size());
  const Eigen::ArrayXd c = (freq_.array() * t).cos();
  const Eigen::ArrayXd s = (freq_.array() * t).sin();
  const Eigen::MatrixXd& UT = to_modes_;
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows.size()), 2 * dof);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const Eigen::Index row = rows[r];
    const Eigen::Index k = row / 2;  // coordinate index
    const bool momentum = row % 2 == 0;
    const double sm = std::sqrt(modes_[k]);
    // Row k of U, i.e. column k of U^T.
    const Eigen::ArrayXd u = UT.col(k).array();
    Eigen::ArrayXd from_y, from_pi;
    if (momentum) {
      // P_k = sqrt(m_k) sum_l U_kl (-w_l s_l a_l + c_l b_l)
      from_y = sm * u * (-freq_.array() * s);
      from_pi = sm * u * c;
    } else {
      // Q_k = (1/sqrt(m_k)) sum_l U_kl (c_l a_l + s_l / w_l b_l)
      from_y = u * c / sm;
      from_pi = u * s / freq_.array() / sm;
    }
    // a = U^T diag(sqrt m) x, b = U^T diag(1/sqrt m) P.
    const Eigen::VectorXd gy = UT.transpose() * from_y.matrix();
    const Eigen::VectorXd gpi = UT.transpose() * from_pi.matrix();
    for (Eigen::Index l = 0; l < dof; ++l) {
      const double msq = std::sqrt(modes_[l]);
      out(static_cast<Eigen::Index>(r), 2 * l + 1) = gy(l) * msq;
      out(static_cast<Eigen::Index>(r), 2 * l) = gpi(l) / msq;
    }
  }
  return out;
}

Eigen::MatrixXd NormalModeFlow::flow(double t) const {
  std::vector<Eigen::Index> rows(2 * modes_.size());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = static_cast<Eigen::Index>(i);
  return flow_rows(t, rows);
}

Eigen::MatrixXd NormalModeFlow::system_rows(double t) const { return flow_rows(t, {0, 1}); }

FullGaussianState evolve_full(const FullGaussianState& state, const NormalModeFlow& flow,
                              double t) {
  const Eigen::MatrixXd E = flow.flow(t);
  FullGaussianState out;
  out.mean = E * state.mean;
  out.cov = E * state.cov * E.transpose();
  return out;
}

FullGaussianState evolve_full(const FullGaussianState& state, const BathDiscretization& bath,
                              const SystemParams& params, double t) {
  return evolve_full(state, NormalModeFlow(bath, params), t);
}

GaussianWigner evolve_reduced(const FullGaussianState& state, const NormalModeFlow& flow,
                              double t) {
  const Eigen::MatrixXd E = flow.system_rows(t);
  GaussianWigner out;
  const Eigen::Vector2d mean = E * state.mean;
  out.mean = {mean(0), mean(1)};
  out.cov = E * state.cov * E.transpose();
  return out;
}

GaussianWigner reduced_system_state(const FullGaussianState& state) {
  GaussianWigner out;
  out.mean = {state.mean(0), state.mean(1)};
  out.cov = state.cov.topLeftCorner<2, 2>();
  return out;
}

double symplectic_eigenvalue(const Matrix2& cov) { return std::sqrt(std::max(cov.determinant(), 0.0)); }

OracleDeviation compare_states(const GaussianWigner& reference, const GaussianWigner& other) {
  OracleDeviation d;
  const Vector2 mu = reference.mean.vec();
  const Vector2 dm = other.mean.vec() - mu;
  for (int i = 0; i < 2; ++i) {
    const double scale = std::max(std::abs(mu(i)), std::sqrt(reference.cov(i, i)));
    d.mean = std::max(d.mean, std::abs(dm(i)) / scale);
    for (int j = 0; j < 2; ++j) {
      const double s = std::sqrt(reference.cov(i, i) * reference.cov(j, j));
      d.cov = std::max(d.cov, std::abs(other.cov(i, j) - reference.cov(i, j)) / s);
    }
  }
  return d;
}

}  // namespace wqbm
