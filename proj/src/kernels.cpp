#include "wqbm/kernels.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include <array>

#include <boost/math/special_functions/zeta.hpp>

#include "matsubara.hpp"
#include "wqbm/errors.hpp"

namespace wqbm {

namespace {

/// Li_3(exp(-x)) for x > 0. Near x = 0 the expansion
///   Li_3(e^mu) = mu^2/2 (3/2 - log(-mu)) + sum_{k != 2} zeta(3 - k) mu^k / k!
/// converges for |mu| < 2 pi; beyond x = 1 the defining series is geometric.
double trilog_exp(double x) {
  if (x < 1.0) {
    static const std::array<double, 40> coef = [] {
      std::array<double, 40> c{};
      double fact = 1.0;
      for (int k = 0; k < 40; ++k) {
        if (k > 0) fact *= k;
        c[k] = k == 2 ? 0.0 : boost::math::zeta(3.0 - k) / fact;
      }
      return c;
    }();
    const double mu = -x;
    double sum = 0.0;
    double pw = 1.0;
    for (int k = 0; k < 40; ++k) {
      sum += coef[k] * pw;
      pw *= mu;
    }
    return sum + 0.5 * mu * mu * (1.5 - std::log(x));
  }
  const double r = std::exp(-x);
  double sum = 0.0;
  double pw = 1.0;
  for (int n = 1; n < 200; ++n) {
    pw *= r;
    const double term = pw / (static_cast<double>(n) * n * n);
    sum += term;
    if (term < 1e-18 * sum) break;
  }
  return sum;
}

}  // namespace

double spectral_density(double omega, const DampingSpec& damping, const SystemParams& params) {
  if (!(omega >= 0.0)) throw ParameterError("spectral_density needs omega >= 0");
  const double ohmic = params.mass * damping.gamma * omega;
  if (damping.kind == DampingKind::StrictOhmic) return ohmic;
  const double wc2 = damping.omega_c * damping.omega_c;
  return ohmic * wc2 / (omega * omega + wc2);
}

double friction_kernel(double t, const DampingSpec& damping, const SystemParams& params) {
  if (!(t >= 0.0)) throw ParameterError("friction_kernel needs t >= 0");
  if (damping.kind == DampingKind::StrictOhmic) {
    throw StrictOhmicDeltaError(
        "strict Ohmic friction kernel is 2 m gamma delta(t); use friction_delta_weight");
  }
  return params.mass * damping.gamma * damping.omega_c * std::exp(-damping.omega_c * t);
}

double friction_delta_weight(const DampingSpec& damping, const SystemParams& params) {
  return damping.kind == DampingKind::StrictOhmic ? 2.0 * params.mass * damping.gamma : 0.0;
}

NoiseKernel NoiseKernel::high_temperature(const SystemParams& params,
                                          const DampingSpec& damping) {
  params.validate();
  damping.validate();
  NoiseKernel k;
  k.kind_ = NoiseKind::HighTemperatureDelta;
  k.params_ = params;
  k.damping_ = damping;
  return k;
}

NoiseKernel NoiseKernel::exact_drude(const SystemParams& params, const DampingSpec& damping,
                                     MatsubaraOptions options) {
  params.validate();
  damping.validate();
  if (damping.kind != DampingKind::DrudeOhmic) {
    throw ParameterError("the exact noise kernel of strict Ohmic damping is UV divergent");
  }
  // nu_n = wc makes the cutoff residue and the n-th Matsubara term singular.
  const double bh = params.beta * params.hbar;
  const double ratio = damping.omega_c * bh / (2.0 * std::numbers::pi);
  const double nearest = std::round(ratio);
  if (nearest >= 1.0 && std::abs(ratio - nearest) < 1e-10 * ratio) {
    std::ostringstream os;
    os << "cutoff omega_c coincides with Matsubara frequency nu_" << nearest
       << "; perturb omega_c or beta slightly";
    throw PoleDegeneracyError(os.str());
  }
  NoiseKernel k;
  k.kind_ = NoiseKind::ExactDrude;
  k.params_ = params;
  k.damping_ = damping;
  k.options_ = options;
  return k;
}

double NoiseKernel::delta_strength() const {
  return 2.0 * params_.mass * damping_.gamma / (params_.hbar * params_.beta);
}

SeriesValue NoiseKernel::sample(double t) const {
  if (kind_ != NoiseKind::ExactDrude) {
    throw ParameterError("the high-temperature kernel is a delta; use delta_strength()");
  }
  t = std::abs(t);
  if (!(t > 0.0)) throw ParameterError("exact noise kernel diverges at t = 0");
  const double m = params_.mass;
  const double g = damping_.gamma;
  const double wc = damping_.omega_c;
  const double bh = params_.beta * params_.hbar;
  const double nu1 = 2.0 * std::numbers::pi / bh;
  const double pref = m * g * wc * wc;

  const double cutoff_pole = 0.5 * pref / std::tan(0.5 * bh * wc) * std::exp(-wc * t);
  // sum_n exp(-nu_n t) / nu_n = -(beta hbar / 2 pi) log(1 - exp(-nu_1 t))
  // log(1 - e^-x) in the form that keeps relative accuracy on both sides of x = ln 2.
  const double x1 = nu1 * t;
  const double log1mexp = x1 < std::numbers::ln2 ? std::log(-std::expm1(-x1))
                                                 : std::log1p(-std::exp(-x1));
  const double log_part = -(pref / std::numbers::pi) * log1mexp;
  // 1 / (nu (nu^2 - wc^2)) = 1 / nu^3 + wc^2 / (nu^3 (nu^2 - wc^2)); the first
  // part sums to a trilogarithm, the second decays as nu^-5.
  const double rest_pref = 2.0 * pref * wc * wc / bh;
  const double trilog_part = rest_pref / (nu1 * nu1 * nu1) * trilog_exp(nu1 * t);
  auto term = [&](std::size_t n) {
    const double nu = nu1 * static_cast<double>(n);
    return rest_pref * wc * wc * std::exp(-nu * t) / (nu * nu * nu * (nu * nu - wc * wc));
  };
  const std::size_t asym = static_cast<std::size_t>(std::ceil(wc / nu1)) + 1;
  // Floor at the size of the pieces that cancel, not at the kernel's scale,
  // so exponentially small values keep their relative accuracy.
  const double floor = 1e-14 * (std::abs(cutoff_pole) + std::abs(log_part) + trilog_part);
  return detail::matsubara_sum(term, std::exp(-nu1 * t), 5.0, asym,
                               cutoff_pole + log_part + trilog_part, floor, options_,
                               "exact Drude noise kernel");
}

SeriesValue noise_kernel_real(double t, const DampingSpec& damping, const SystemParams& params,
                              std::size_t order) {
  MatsubaraOptions opts;
  opts.order = order;
  return NoiseKernel::exact_drude(params, damping, opts).sample(t);
}

}  // namespace wqbm
