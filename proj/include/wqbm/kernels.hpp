#pragma once

#include <cstddef>

#include "wqbm/model.hpp"

namespace wqbm {

/// Truncation control for Matsubara series.
struct MatsubaraOptions {
  std::size_t order = 0;  ///< fixed number of terms; 0 picks the smallest adequate order
  double rel_tol = 1e-9;  ///< bound on the estimated tail relative to the partial sum
  std::size_t max_terms = 100000;
};

/// One evaluation of a Matsubara-summed quantity.
struct SeriesValue {
  double value = 0.0;
  std::size_t terms = 0;
  double tail_estimate = 0.0;
};

/// I(w) for w >= 0.
double spectral_density(double omega, const DampingSpec& damping, const SystemParams& params);

/// eta(t) for Drude damping, m gamma wc exp(-wc t). Strict Ohmic friction is
/// 2 m gamma delta(t) and has no pointwise value: throws StrictOhmicDeltaError.
double friction_kernel(double t, const DampingSpec& damping, const SystemParams& params);

/// Weight of the delta in eta(t): 2 m gamma for strict Ohmic, zero for Drude.
double friction_delta_weight(const DampingSpec& damping, const SystemParams& params);

enum class NoiseKind { HighTemperatureDelta, ExactDrude };

/// Real part K'(t) of the bath noise correlation.
///
/// HighTemperatureDelta is K'(t) = (2 m gamma / hbar beta) delta(t). ExactDrude
/// evaluates the full coth-weighted cosine transform of the Drude spectral
/// density as a residue sum: the cutoff pole, the 1/nu_n part of the Matsubara
/// poles summed in closed form (it carries the -log t singularity at t = 0),
/// their 1/nu_n^3 part as a trilogarithm, and a remaining series decaying as
/// nu_n^-5.
class NoiseKernel {
 public:
  static NoiseKernel high_temperature(const SystemParams& params, const DampingSpec& damping);
  static NoiseKernel exact_drude(const SystemParams& params, const DampingSpec& damping,
                                 MatsubaraOptions options = {});

  NoiseKind kind() const { return kind_; }
  const SystemParams& params() const { return params_; }
  const DampingSpec& damping() const { return damping_; }
  const MatsubaraOptions& options() const { return options_; }

  /// 2 m gamma / (hbar beta); the delta weight of the high-temperature kernel.
  double delta_strength() const;

  /// K'(t) for the exact kernel (even in t, divergent at t = 0).
  SeriesValue sample(double t) const;
  double operator()(double t) const { return sample(t).value; }

 private:
  NoiseKind kind_ = NoiseKind::HighTemperatureDelta;
  SystemParams params_;
  DampingSpec damping_;
  MatsubaraOptions options_;
};

/// Free-function form of NoiseKernel::exact_drude(...).sample(t) with a given
/// Matsubara order (0 = automatic). Throws ConvergenceError when the tail
/// estimate at that order exceeds the tolerance.
SeriesValue noise_kernel_real(double t, const DampingSpec& damping, const SystemParams& params,
                              std::size_t order = 0);

}  // namespace wqbm
