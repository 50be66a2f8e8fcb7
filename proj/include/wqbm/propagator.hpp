#pragma once

#include <complex>
#include <optional>
#include <span>
#include <vector>

#include "wqbm/correlation.hpp"
#include "wqbm/kernels.hpp"
#include "wqbm/model.hpp"

namespace wqbm {

/// The three noise-weighted integrals
///   I_XY(t) = int_0^t ds int_0^t du K'(s - u) X(t - s) Y(t - u)
/// for X, Y in {G+, dG+/dt}. They are regular at caustics and fix the kernel
/// covariance: qq = (hbar/m^2) gg, qp = (hbar/m) dg, pp = hbar dd.
struct KernelIntegrals {
  double gg = 0.0;
  double dg = 0.0;
  double dd = 0.0;
};

struct Abc {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
};

/// Everything the Gaussian propagating function needs at one time.
///
/// a, b, c follow the normalization in which a ~ (m^2/hbar) (dG+/G+)^2 <q^2>
/// at long times. With rho = dG+/G+,
///   Sigma = [[a, -m rho (a + b)], [-m rho (a + b), m^2 rho^2 (a + 2b + c)]],
///   Lambda = a c - b^2,  kernel_cov = hbar Lambda Sigma^-1,
/// in (p, q) ordering. kernel_cov is always available; the a, b, c block only
/// off caustics, where rho is finite.
struct CovarianceData {
  double t = 0.0;
  std::optional<KernelIntegrals> integrals;
  Matrix2 kernel_cov = Matrix2::Zero();
  std::optional<double> rho;
  std::optional<Abc> abc;
  std::optional<Matrix2> sigma;
  std::optional<double> lambda;

  bool has_sigma() const { return sigma.has_value(); }
};

struct GaussianWigner {
  PhasePoint mean;
  Matrix2 cov = Matrix2::Zero();  ///< (p, q) ordering
};

/// Tolerances for the noise-kernel integrals. The exact kernel uses a double
/// exponential rule across its log singularity, Gauss-Kronrod elsewhere.
struct QuadratureOptions {
  double rel_tol = 1e-10;
  double abs_tol = 1e-9;  ///< stall threshold reported as QuadratureError
};

/// Psi(t, t') = int_0^t ds int_0^t' du K'(s - u) G+(t - s) G+(t' - u) / (G+(t) G+(t')).
double psi(double t, double tprime, const GreenPair& green, const NoiseKernel& noise,
           QuadratureOptions options = {});

/// Cross integral int_0^t ds int_0^t' du K'(s - u) X(t - s) Y(t' - u) with
/// X, Y the derivative orders dx, dy in {0, 1} of G+.
double kernel_cross_integral(double t, double tprime, int dx, int dy, const GreenPair& green,
                             const NoiseKernel& noise, QuadratureOptions options = {});

KernelIntegrals kernel_integrals(double t, const GreenPair& green, const NoiseKernel& noise,
                                 QuadratureOptions options = {});

/// Builds the covariance data from the integrals; the a, b, c block is filled
/// when t is outside the caustic window.
CovarianceData covariance_from_integrals(double t, const KernelIntegrals& ints,
                                         const SystemParams& params, const GreenPair& green,
                                         double window);
CovarianceData covariance_from_integrals(double t, const KernelIntegrals& ints,
                                         const SystemParams& params, const GreenPair& green);

/// Builds the covariance data from a, b, c; requires t off caustics.
CovarianceData covariance_from_abc(double t, const Abc& abc, const SystemParams& params,
                                   const GreenPair& green);

/// Quadrature route. Throws CausticError on caustics, QuadratureError on stalls.
Abc abc_quadrature(double t, const GreenPair& green, const NoiseKernel& noise,
                   QuadratureOptions options = {});
CovarianceData covariance_quadrature(double t, const GreenPair& green, const NoiseKernel& noise,
                                     QuadratureOptions options = {});

/// Closed route through the thermal correlation function S(t) and the moments.
Abc abc_closed(const CorrelationSample& sample, double q2, double p2, const SystemParams& params,
               const GreenPair& green);
Abc abc_closed(double t, const ThermalCorrelation& corr);
/// Uses the table sample at time t (matched to 1e-12 relative); ParameterError
/// when the table has no such sample.
Abc abc_closed(double t, const CorrelationTable& table, const SystemParams& params,
               const GreenPair& green);

/// Long-time forms of a, b, c.
Abc abc_asymptotic(double t, double q2, double p2, const SystemParams& params,
                   const GreenPair& green);

/// G_W(r'', t; r') = m |rho| / (2 pi hbar sqrt(Lambda))
///                   exp(-(r'' - M r')^T Sigma (r'' - M r') / (2 hbar Lambda)).
/// Throws CausticError without the Sigma block, DegenerateCovarianceError for
/// Lambda <= 0.
double propagating_function(const PhasePoint& rpp, const PhasePoint& rp, const CovarianceData& cov,
                            const Matrix2& map, const SystemParams& params);

/// Product Gaussian with variances q2 and p2.
double thermal_wigner(const PhasePoint& r, double q2, double p2);
double thermal_wigner(const PhasePoint& r, const CorrelationTable& table);

/// Exponent S1 + S2 of the position-space propagating function for strict
/// Ohmic damping, evaluated on the stationary paths. S2 = (i/2) q~^T J q~ with
/// q~ = (q~', q~'').
struct ActionExponents {
  double S1 = 0.0;
  std::complex<double> S2{0.0, 0.0};
  Matrix2 J = Matrix2::Zero();
};

ActionExponents action_exponents(double qtp, double qp, double qtpp, double qpp, double t,
                                 const SystemParams& params, const GreenPair& green,
                                 const KernelIntegrals& ints);
ActionExponents action_exponents(double qtp, double qp, double qtpp, double qpp, double t,
                                 const SystemParams& params, const GreenPair& green,
                                 const NoiseKernel& noise);

/// G_W assembled as the Gaussian integral over (q~', q~'') of
/// exp[(i/hbar)(p' q~' - p'' q~'' + S1 + S2)] times the position-space
/// prefactor m / (2 pi hbar |G+|), divided by 2 pi hbar.
double wigner_from_exponents(const PhasePoint& rpp, const PhasePoint& rp, double t,
                             const SystemParams& params, const GreenPair& green,
                             const KernelIntegrals& ints);

/// A path sampled on the uniform grid s_k = k h, k = 0..n-1.
struct SampledPath {
  double step = 0.0;
  std::vector<double> q;
  std::vector<double> qdot;
};

struct InfluenceOptions {
  /// Evaluate the boundary term as (i/2)(q+' + q-') int ds eta(s) q~(s). The
  /// unweighted form is dimensionally inconsistent and is not offered.
  bool eta_weighted_boundary = false;
};

/// Phi[q+, q-] with F = exp(-Phi / hbar), by trapezoidal sums over u <= s.
/// Throws GridMismatchError for paths on different grids.
std::complex<double> influence_phase(const SampledPath& plus, const SampledPath& minus,
                                     const NoiseKernel& noise, const DampingSpec& damping,
                                     const SystemParams& params, InfluenceOptions options = {});

}  // namespace wqbm
