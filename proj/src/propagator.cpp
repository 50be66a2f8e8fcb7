#include "wqbm/propagator.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "wqbm/errors.hpp"

namespace wqbm {

namespace {

double green_derivative(const GreenPair& green, int order, double t) {
  const GreenValue g = green.plus(t);
  return order == 0 ? g.value : g.dot;
}

void check_quadrature(double value, double error, const QuadratureOptions& opts,
                      const char* what) {
  if (!std::isfinite(value) || error > opts.abs_tol * std::max(1.0, std::abs(value))) {
    std::ostringstream os;
    os << what << ": quadrature error estimate " << error << " exceeds tolerance for value "
       << value;
    throw QuadratureError(os.str());
  }
}

template <class F>
double kronrod(F&& f, double a, double b, const QuadratureOptions& opts, const char* what) {
  if (b <= a) return 0.0;
  double err = 0.0;
  const double v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      f, a, b, 15, opts.rel_tol * 1e-2, &err);
  check_quadrature(v, err, opts, what);
  return v;
}

/// K'(w) memoized across the three integrals of one kernel_integrals call;
/// the double exponential abscissas repeat exactly.
class KernelCache {
 public:
  explicit KernelCache(const NoiseKernel& noise) : noise_(noise) {}

  double operator()(double w) {
    w = std::abs(w);
    auto it = values_.find(w);
    if (it != values_.end()) return it->second;
    const double v = noise_(w);
    values_.emplace(w, v);
    return v;
  }

 private:
  const NoiseKernel& noise_;
  std::map<double, double> values_;
};

NoiseKernel tightened(const NoiseKernel& noise) {
  MatsubaraOptions opts = noise.options();
  opts.rel_tol = std::min(opts.rel_tol, 1e-11);
  return NoiseKernel::exact_drude(noise.params(), noise.damping(), opts);
}

using Complex = std::complex<double>;

/// G+ as Re sum_k r_k exp(z_k t), when such a form is well conditioned.
struct PoleForm {
  std::vector<Complex> z;
  std::vector<Complex> r;
};

std::optional<PoleForm> pole_form(const GreenPair& green) {
  if (green.is_pole_expansion()) {
    return PoleForm{{green.poles().begin(), green.poles().end()},
                    {green.residues().begin(), green.residues().end()}};
  }
  const double w = green.frequency();
  if (green.regime() == Regime::Critical || w < 1e-3 * green.omega0()) return std::nullopt;
  const double decay = -0.5 * green.gamma();
  const Complex split = green.regime() == Regime::Underdamped ? Complex{0.0, w} : Complex{w, 0.0};
  return PoleForm{{decay + split, decay - split}, {0.5 / split, -0.5 / split}};
}

// (exp(lambda L) - 1) / lambda
Complex exp_ramp(Complex lambda, double L) {
  const Complex x = lambda * L;
  if (std::abs(x) < 1e-4) return L * (1.0 + x / 2.0 + x * x / 6.0 + x * x * x / 24.0);
  return (std::exp(x) - 1.0) / lambda;
}

/// int_{s0}^{s1} X(s) Y(s + delta) ds for X, Y derivatives of orders dx, dy of
/// a pole form; Re A Re B = (Re AB + Re A conj(B)) / 2 term by term.
double product_integral(const PoleForm& pf, int dx, int dy, double s0, double s1, double delta) {
  if (s1 <= s0) return 0.0;
  const double L = s1 - s0;
  Complex sum{0.0};
  for (std::size_t k = 0; k < pf.z.size(); ++k) {
    const Complex zk = pf.z[k];
    const Complex ak = pf.r[k] * (dx ? zk : 1.0);
    for (std::size_t l = 0; l < pf.z.size(); ++l) {
      const Complex zl = pf.z[l];
      const Complex bl = pf.r[l] * (dy ? zl : 1.0);
      const Complex zc = std::conj(zl);
      sum += ak * bl * std::exp(zk * s0 + zl * (s0 + delta)) * exp_ramp(zk + zl, L);
      sum += ak * std::conj(bl) * std::exp(zk * s0 + zc * (s0 + delta)) * exp_ramp(zk + zc, L);
    }
  }
  return 0.5 * sum.real();
}

double cross_integral(double t, double tp, int dx, int dy, const GreenPair& green,
                      const NoiseKernel& noise, KernelCache* cache,
                      const QuadratureOptions& opts) {
  const std::optional<PoleForm> pf = pole_form(green);
  auto X = [&](double s) { return green_derivative(green, dx, s); };
  auto Y = [&](double s) { return green_derivative(green, dy, s); };
  // For fixed w = s - u, s runs over [max(0, w), min(t, t' + w)].
  auto inner = [&](double w) {
    const double a = std::max(0.0, w);
    const double b = std::min(t, tp + w);
    if (pf) return product_integral(*pf, dx, dy, t - b, t - a, tp - t + w);
    return kronrod([&](double s) { return X(t - s) * Y(tp - s + w); }, a, b, opts,
                   "inner kernel integral");
  };
  if (noise.kind() == NoiseKind::HighTemperatureDelta) {
    const double D = noise.delta_strength();
    return D == 0.0 ? 0.0 : D * inner(0.0);
  }
  std::vector<double> cuts{-tp, 0.0, t - tp, t};
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  boost::math::quadrature::tanh_sinh<double> rule;
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double lo = cuts[k];
    const double hi = cuts[k + 1];
    if (hi <= lo) continue;
    auto f = [&](double w) {
      if (w == 0.0) return 0.0;
      return (*cache)(w)*inner(w);
    };
    double err = 0.0;
    double l1 = 0.0;
    const double v = rule.integrate(f, lo, hi, opts.rel_tol, &err, &l1);
    check_quadrature(v, err, opts, "noise-kernel integral");
    total += v;
  }
  return total;
}

Matrix2 sigma_of(const Abc& abc, double m, double rho) {
  Matrix2 s;
  const double off = -m * rho * (abc.a + abc.b);
  s << abc.a, off, off, m * m * rho * rho * (abc.a + 2.0 * abc.b + abc.c);
  return s;
}

}  // namespace

double kernel_cross_integral(double t, double tprime, int dx, int dy, const GreenPair& green,
                             const NoiseKernel& noise, QuadratureOptions options) {
  if (!(t >= 0.0) || !(tprime >= 0.0)) throw ParameterError("kernel integrals need t, t' >= 0");
  if ((dx != 0 && dx != 1) || (dy != 0 && dy != 1)) {
    throw ParameterError("derivative orders must be 0 or 1");
  }
  if (noise.kind() == NoiseKind::HighTemperatureDelta) {
    return cross_integral(t, tprime, dx, dy, green, noise, nullptr, options);
  }
  const NoiseKernel tight = tightened(noise);
  KernelCache cache(tight);
  return cross_integral(t, tprime, dx, dy, green, tight, &cache, options);
}

double psi(double t, double tprime, const GreenPair& green, const NoiseKernel& noise,
           QuadratureOptions options) {
  const double window = default_caustic_window(noise.params());
  if (!(t > 0.0) || !(tprime > 0.0)) throw ParameterError("psi needs t, t' > 0");
  require_off_caustic(green, t, window, "psi");
  require_off_caustic(green, tprime, window, "psi");
  const double j = kernel_cross_integral(t, tprime, 0, 0, green, noise, options);
  return j / (green.plus(t).value * green.plus(tprime).value);
}

KernelIntegrals kernel_integrals(double t, const GreenPair& green, const NoiseKernel& noise,
                                 QuadratureOptions options) {
  if (!(t >= 0.0)) throw ParameterError("kernel integrals need t >= 0");
  KernelIntegrals out;
  if (t == 0.0) return out;
  if (noise.kind() == NoiseKind::HighTemperatureDelta) {
    out.gg = cross_integral(t, t, 0, 0, green, noise, nullptr, options);
    out.dg = cross_integral(t, t, 1, 0, green, noise, nullptr, options);
    out.dd = cross_integral(t, t, 1, 1, green, noise, nullptr, options);
    return out;
  }
  const NoiseKernel tight = tightened(noise);
  KernelCache cache(tight);
  out.gg = cross_integral(t, t, 0, 0, green, tight, &cache, options);
  out.dg = cross_integral(t, t, 1, 0, green, tight, &cache, options);
  out.dd = cross_integral(t, t, 1, 1, green, tight, &cache, options);
  return out;
}

CovarianceData covariance_from_integrals(double t, const KernelIntegrals& ints,
                                         const SystemParams& params, const GreenPair& green,
                                         double window) {
  const double m = params.mass;
  const double hbar = params.hbar;
  CovarianceData cov;
  cov.t = t;
  cov.integrals = ints;
  cov.kernel_cov << hbar * ints.dd, hbar / m * ints.dg, hbar / m * ints.dg,
      hbar / (m * m) * ints.gg;
  if (t > 0.0 && !near_caustic(green, t, window)) {
    const GreenValue g = green.plus(t);
    const double rho = g.dot / g.value;
    Abc abc;
    abc.a = rho * rho * ints.gg;
    abc.b = rho * ints.dg - abc.a;
    abc.c = ints.dd - 2.0 * rho * ints.dg + abc.a;
    cov.rho = rho;
    cov.abc = abc;
    cov.sigma = sigma_of(abc, m, rho);
    // a c - b^2 written without the cancellation between its two terms.
    cov.lambda = rho * rho * (ints.gg * ints.dd - ints.dg * ints.dg);
  }
  return cov;
}

CovarianceData covariance_from_integrals(double t, const KernelIntegrals& ints,
                                         const SystemParams& params, const GreenPair& green) {
  return covariance_from_integrals(t, ints, params, green, default_caustic_window(params));
}

CovarianceData covariance_from_abc(double t, const Abc& abc, const SystemParams& params,
                                   const GreenPair& green) {
  require_off_caustic(green, t, default_caustic_window(params), "covariance_from_abc");
  const double m = params.mass;
  const GreenValue g = green.plus(t);
  const double rho = g.dot / g.value;
  KernelIntegrals ints;
  ints.gg = abc.a / (rho * rho);
  ints.dg = (abc.a + abc.b) / rho;
  ints.dd = abc.a + 2.0 * abc.b + abc.c;
  CovarianceData cov;
  cov.t = t;
  cov.integrals = ints;
  const double hbar = params.hbar;
  cov.kernel_cov << hbar * ints.dd, hbar / m * ints.dg, hbar / m * ints.dg,
      hbar / (m * m) * ints.gg;
  cov.rho = rho;
  cov.abc = abc;
  cov.sigma = sigma_of(abc, m, rho);
  cov.lambda = abc.a * abc.c - abc.b * abc.b;
  return cov;
}

Abc abc_quadrature(double t, const GreenPair& green, const NoiseKernel& noise,
                   QuadratureOptions options) {
  const SystemParams& params = noise.params();
  if (!(t > 0.0)) throw ParameterError("abc_quadrature needs t > 0");
  require_off_caustic(green, t, default_caustic_window(params), "abc_quadrature");
  const CovarianceData cov = covariance_from_integrals(t, kernel_integrals(t, green, noise, options),
                                                       params, green);
  return *cov.abc;
}

CovarianceData covariance_quadrature(double t, const GreenPair& green, const NoiseKernel& noise,
                                     QuadratureOptions options) {
  return covariance_from_integrals(t, kernel_integrals(t, green, noise, options), noise.params(),
                                   green);
}

Abc abc_closed(const CorrelationSample& s, double q2, double p2, const SystemParams& params,
               const GreenPair& green) {
  if (!(s.t > 0.0)) throw ParameterError("abc_closed needs t > 0");
  require_off_caustic(green, s.t, default_caustic_window(params), "abc_closed");
  const double m = params.mass;
  const double f = m * m / params.hbar;
  const GreenValue g = green.plus(s.t);
  const double rho = g.dot / g.value;
  const double reduced = q2 * (1.0 - (s.S / q2) * (s.S / q2));
  Abc abc;
  abc.a = f * rho * rho * (reduced + p2 / (m * m) * g.value * g.value + 2.0 * s.S_dot * g.value);
  abc.b = -f * rho *
          (reduced * rho + g.dot * s.S_dot - g.value * s.S_ddot + s.S * s.S_dot / q2);
  const double mix = s.S_dot - rho * s.S;
  abc.c = f * (q2 * rho * rho + p2 / (m * m) - mix * mix / q2);
  return abc;
}

Abc abc_closed(double t, const ThermalCorrelation& corr) {
  return abc_closed(corr.at(t), corr.q2_eq(), corr.p2_eq(), corr.params(), corr.green());
}

Abc abc_closed(double t, const CorrelationTable& table, const SystemParams& params,
               const GreenPair& green) {
  for (const auto& s : table.samples) {
    if (std::abs(s.t - t) <= 1e-12 * std::max(1.0, std::abs(t))) {
      return abc_closed(s, table.q2_eq, table.p2_eq, params, green);
    }
  }
  std::ostringstream os;
  os << "correlation table has no sample at t = " << t;
  throw ParameterError(os.str());
}

Abc abc_asymptotic(double t, double q2, double p2, const SystemParams& params,
                   const GreenPair& green) {
  require_off_caustic(green, t, default_caustic_window(params), "abc_asymptotic");
  const double m = params.mass;
  const GreenValue g = green.plus(t);
  const double rho = g.dot / g.value;
  Abc abc;
  abc.a = m * m / params.hbar * rho * rho * q2;
  abc.b = -abc.a;
  abc.c = p2 / params.hbar + abc.a;
  return abc;
}

double propagating_function(const PhasePoint& rpp, const PhasePoint& rp, const CovarianceData& cov,
                            const Matrix2& map, const SystemParams& params) {
  if (!cov.sigma || !cov.lambda || !cov.rho) {
    throw CausticError("propagating_function: t lies at a caustic of G+", {cov.t});
  }
  const double lambda = *cov.lambda;
  if (!(lambda > 0.0)) {
    std::ostringstream os;
    os << "Lambda = " << lambda << " <= 0; the propagating function is a delta here";
    throw DegenerateCovarianceError(os.str());
  }
  const Vector2 delta = rpp.vec() - map * rp.vec();
  const double hbar = params.hbar;
  const double pref =
      params.mass * std::abs(*cov.rho) / (2.0 * std::numbers::pi * hbar * std::sqrt(lambda));
  return pref * std::exp(-delta.dot(*cov.sigma * delta) / (2.0 * hbar * lambda));
}

double thermal_wigner(const PhasePoint& r, double q2, double p2) {
  if (!(q2 > 0.0) || !(p2 > 0.0) || !std::isfinite(p2)) {
    throw ParameterError("thermal Wigner function needs finite positive moments");
  }
  return std::exp(-0.5 * r.p * r.p / p2 - 0.5 * r.q * r.q / q2) /
         (2.0 * std::numbers::pi * std::sqrt(q2 * p2));
}

double thermal_wigner(const PhasePoint& r, const CorrelationTable& table) {
  return thermal_wigner(r, table.q2_eq, table.p2_eq);
}

ActionExponents action_exponents(double qtp, double qp, double qtpp, double qpp, double t,
                                 const SystemParams& params, const GreenPair& green,
                                 const KernelIntegrals& ints) {
  require_off_caustic(green, t, default_caustic_window(params), "action_exponents");
  const double m = params.mass;
  const GreenValue gp = green.plus(t);
  const double gm = green.minus(t).value;
  const double rho = gp.dot / gp.value;
  ActionExponents out;
  out.S1 = m * ((qp * qtp + qpp * qtpp) * rho - qp * qtpp / gm - qpp * qtp / gp.value);
  // q~(s) = q~' G+(t-s)/G+(t) + q~'' [dG+(t-s) - rho G+(t-s)]
  const double j11 = ints.gg / (gp.value * gp.value);
  const double j12 = (ints.dg - rho * ints.gg) / gp.value;
  const double j22 = ints.dd - 2.0 * rho * ints.dg + rho * rho * ints.gg;
  out.J << j11, j12, j12, j22;
  const Vector2 qt{qtp, qtpp};
  out.S2 = {0.0, 0.5 * qt.dot(out.J * qt)};
  return out;
}

ActionExponents action_exponents(double qtp, double qp, double qtpp, double qpp, double t,
                                 const SystemParams& params, const GreenPair& green,
                                 const NoiseKernel& noise) {
  require_off_caustic(green, t, default_caustic_window(params), "action_exponents");
  return action_exponents(qtp, qp, qtpp, qpp, t, params, green,
                          kernel_integrals(t, green, noise));
}

double wigner_from_exponents(const PhasePoint& rpp, const PhasePoint& rp, double t,
                             const SystemParams& params, const GreenPair& green,
                             const KernelIntegrals& ints) {
  const double m = params.mass;
  const double hbar = params.hbar;
  const double two_pi_hbar = 2.0 * std::numbers::pi * hbar;
  // S1 is linear in (q~', q~''); its gradient plus the Fourier phases.
  const ActionExponents e1 = action_exponents(1.0, rp.q, 0.0, rpp.q, t, params, green, ints);
  const ActionExponents e2 = action_exponents(0.0, rp.q, 1.0, rpp.q, t, params, green, ints);
  const Vector2 v{rp.p + e1.S1, -rpp.p + e2.S1};
  const Matrix2& J = e1.J;
  const double det = J.determinant();
  if (!(det > 0.0)) throw DegenerateCovarianceError("noise quadratic form is not positive");
  const double prefactor = m / (two_pi_hbar * std::abs(green.plus(t).value));
  const double gauss = two_pi_hbar / std::sqrt(det) *
                       std::exp(-v.dot(J.inverse() * v) / (2.0 * hbar));
  return prefactor * gauss / two_pi_hbar;
}

std::complex<double> influence_phase(const SampledPath& plus, const SampledPath& minus,
                                     const NoiseKernel& noise, const DampingSpec& damping,
                                     const SystemParams& params, InfluenceOptions options) {
  const std::size_t n = plus.q.size();
  if (n < 2 || plus.qdot.size() != n || minus.q.size() != n || minus.qdot.size() != n) {
    throw GridMismatchError("paths must share one grid of at least two samples");
  }
  if (!(plus.step > 0.0) ||
      std::abs(plus.step - minus.step) > 1e-12 * std::max(plus.step, minus.step)) {
    throw GridMismatchError("paths must share one positive grid step");
  }
  const double h = plus.step;
  std::vector<double> diff(n), vsum(n), wt(n, h);
  for (std::size_t k = 0; k < n; ++k) {
    diff[k] = plus.q[k] - minus.q[k];
    vsum[k] = plus.qdot[k] + minus.qdot[k];
  }
  wt.front() = wt.back() = 0.5 * h;
  const auto inner_weight = [&](std::size_t i, std::size_t j) {
    return (j == 0 || j == i) ? 0.5 * h : h;
  };

  double noise_part = 0.0;
  if (noise.kind() == NoiseKind::HighTemperatureDelta) {
    const double D = noise.delta_strength();
    for (std::size_t i = 0; i < n; ++i) noise_part += wt[i] * 0.5 * D * diff[i] * diff[i];
  } else {
    boost::math::quadrature::tanh_sinh<double> rule;
    // Cell [s_i - h/2, s_i] at the diagonal, where K' is log singular.
    const double diag = rule.integrate([&](double w) { return noise(w); }, 0.0, 0.5 * h);
    std::vector<double> kk(n);
    for (std::size_t k = 1; k < n; ++k) kk[k] = noise(static_cast<double>(k) * h);
    for (std::size_t i = 1; i < n; ++i) {
      double inner = diag * diff[i];
      for (std::size_t j = 0; j < i; ++j) inner += inner_weight(i, j) * kk[i - j] * diff[j];
      noise_part += wt[i] * diff[i] * inner;
    }
  }

  double friction_part = 0.0;
  double boundary = 0.0;
  if (damping.kind == DampingKind::StrictOhmic) {
    // Half of the delta weight 2 m gamma falls inside u <= s and s >= 0.
    const double half = 0.5 * friction_delta_weight(damping, params);
    for (std::size_t i = 0; i < n; ++i) friction_part += wt[i] * half * diff[i] * vsum[i];
    boundary = half * diff[0];
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      double inner = 0.0;
      for (std::size_t j = 0; j <= i && i > 0; ++j) {
        inner += inner_weight(i, j) *
                 friction_kernel(static_cast<double>(i - j) * h, damping, params) * vsum[j];
      }
      friction_part += wt[i] * diff[i] * inner;
      boundary += wt[i] * friction_kernel(static_cast<double>(i) * h, damping, params) * diff[i];
    }
  }
  std::complex<double> phi{noise_part, 0.5 * friction_part};
  if (options.eta_weighted_boundary) {
    phi += std::complex<double>{0.0, 0.5 * (plus.q[0] + minus.q[0]) * boundary};
  }
  return phi;
}

}  // namespace wqbm
