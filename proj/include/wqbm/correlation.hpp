#pragma once

#include <span>
#include <vector>

#include "wqbm/kernels.hpp"
#include "wqbm/model.hpp"

namespace wqbm {

/// S, A and their time derivatives at one t >= 0.
struct CorrelationSample {
  double t = 0.0;
  double S = 0.0;
  double S_dot = 0.0;
  double S_ddot = 0.0;
  double A = 0.0;
  double A_dot = 0.0;
};

/// Thermal position autocorrelation C(t) = <q(t) q(0)> = S(t) + i A(t) of the
/// damped oscillator in equilibrium.
///
/// The response function chi(z) = 1 / (z^2 + z gamma(z) + omega0^2) is a
/// rational function; with its poles z_k and residues r_k,
///
///   S(t) = -(hbar / 2m) sum_k r_k cot(beta hbar z_k / 2) exp(z_k t)
///          + (1 / m beta) sum_n [chi(nu_n) - chi(-nu_n)] exp(-nu_n t),
///   A(t) = -(hbar / 2m) G+(t),   G+(t) = sum_k r_k exp(z_k t),
///
/// with nu_n = 2 pi n / (beta hbar). Derivatives differentiate each pole term.
/// Strict Ohmic damping is accepted, but its <p^2> is UV divergent and is
/// reported as +infinity.
class ThermalCorrelation {
 public:
  ThermalCorrelation(const SystemParams& params, const DampingSpec& damping,
                     MatsubaraOptions options = {});

  const SystemParams& params() const { return params_; }
  const DampingSpec& damping() const { return damping_; }
  /// G+ as the residue expansion of the response function.
  const GreenPair& green() const { return green_; }

  double q2_eq() const { return q2_; }
  double p2_eq() const { return p2_; }

  CorrelationSample at(double t) const;

 private:
  double symmetric(double t, int derivative) const;

  SystemParams params_;
  DampingSpec damping_;
  MatsubaraOptions options_;
  GreenPair green_;
  std::vector<GreenPair::Complex> cot_weights_;  // r_k cot(beta hbar z_k / 2)
  double q2_ = 0.0;
  double p2_ = 0.0;
};

/// Sampled correlation functions on a time grid starting at 0.
struct CorrelationTable {
  std::vector<CorrelationSample> samples;
  double q2_eq = 0.0;
  double p2_eq = 0.0;
};

/// Tabulates S, A and derivatives. Throws ParameterError unless the grid starts
/// at 0 and increases strictly; ConvergenceError or PoleDegeneracyError from the
/// pole sums.
CorrelationTable autocorrelation(std::span<const double> tgrid, const SystemParams& params,
                                 const DampingSpec& damping, MatsubaraOptions options = {});

/// G+ of Drude (or strict Ohmic) damping as a residue expansion.
GreenPair drude_green_pair(const SystemParams& params, const DampingSpec& damping);

struct GreenSample {
  double t = 0.0;
  double G = 0.0;
  double G_dot = 0.0;
};

/// G+(t) = -(2m / hbar) A(t) for t >= 0, and its derivative from A'(t).
std::vector<GreenSample> green_from_antisymmetric(const CorrelationTable& table,
                                                  const SystemParams& params);

}  // namespace wqbm
