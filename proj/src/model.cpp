#include "wqbm/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <boost/math/tools/roots.hpp>

#include "wqbm/errors.hpp"

namespace wqbm {

namespace {

bool positive_finite(double x) { return std::isfinite(x) && x > 0.0; }

// Below this |omega_d t| the closed forms lose digits to cancellation.
constexpr double kSeriesThreshold = 1e-4;

}  // namespace

void SystemParams::validate() const {
  if (!positive_finite(mass) || !positive_finite(omega0) || !positive_finite(hbar) ||
      !positive_finite(beta)) {
    std::ostringstream os;
    os << "system parameters must be finite and positive (m=" << mass << ", omega0=" << omega0
       << ", hbar=" << hbar << ", beta=" << beta << ")";
    throw ParameterError(os.str());
  }
}

void DampingSpec::validate() const {
  if (!std::isfinite(gamma) || gamma < 0.0) {
    throw ParameterError("damping rate gamma must be finite and non-negative");
  }
  if (kind == DampingKind::DrudeOhmic && !positive_finite(omega_c)) {
    throw ParameterError("Drude cutoff omega_c must be finite and positive");
  }
}

bool DampingSpec::low_cutoff(const SystemParams& params) const {
  return kind == DampingKind::DrudeOhmic && omega_c < 10.0 * params.omega0;
}

GreenPair GreenPair::ohmic(double omega0, double gamma) {
  if (!positive_finite(omega0)) throw ParameterError("omega0 must be finite and positive");
  if (!std::isfinite(gamma) || gamma < 0.0) {
    throw ParameterError("gamma must be finite and non-negative");
  }
  GreenPair g;
  g.omega0_ = omega0;
  g.gamma_ = gamma;
  g.detuning_ = omega0 * omega0 - 0.25 * gamma * gamma;
  const double scale = omega0 * omega0;
  if (std::abs(g.detuning_) <= 1e-14 * scale) {
    g.regime_ = Regime::Critical;
    g.frequency_ = 0.0;
    g.detuning_ = 0.0;
  } else if (g.detuning_ > 0.0) {
    g.regime_ = Regime::Underdamped;
    g.frequency_ = std::sqrt(g.detuning_);
  } else {
    g.regime_ = Regime::Overdamped;
    g.frequency_ = std::sqrt(-g.detuning_);
  }
  return g;
}

GreenPair GreenPair::from_poles(double omega0, double gamma, std::vector<Complex> poles,
                                std::vector<Complex> residues) {
  if (poles.empty() || poles.size() != residues.size()) {
    throw ParameterError("pole expansion needs matching, non-empty pole and residue lists");
  }
  GreenPair g;
  g.omega0_ = omega0;
  g.gamma_ = gamma;
  g.poles_ = std::move(poles);
  g.residues_ = std::move(residues);
  // Regime from the slowest-decaying oscillatory pole, if any.
  double best_decay = -std::numeric_limits<double>::infinity();
  double freq = 0.0;
  for (const auto& z : g.poles_) {
    if (std::abs(z.imag()) > 1e-12 * omega0 && z.real() > best_decay) {
      best_decay = z.real();
      freq = std::abs(z.imag());
    }
  }
  g.regime_ = freq > 0.0 ? Regime::Underdamped : Regime::Overdamped;
  g.frequency_ = freq;
  return g;
}

GreenValue GreenPair::ohmic_eval(double sign, double t) const {
  // G(t) = exp(-s t / 2) u(t) with u'' = -detuning u, u(0) = 0, u'(0) = 1.
  const double s = sign * gamma_;
  const double y = detuning_ * t * t;
  double decayed_u = 0.0;   // exp(-s t / 2) u(t)
  double decayed_du = 0.0;  // exp(-s t / 2) u'(t)
  if (std::abs(y) < kSeriesThreshold * kSeriesThreshold) {
    const double env = std::exp(-0.5 * s * t);
    const double f = 1.0 - y / 6.0 + y * y / 120.0 - y * y * y / 5040.0;
    const double h = 1.0 - y / 2.0 + y * y / 24.0 - y * y * y / 720.0;
    decayed_u = env * t * f;
    decayed_du = env * h;
  } else if (detuning_ > 0.0) {
    const double env = std::exp(-0.5 * s * t);
    decayed_u = env * std::sin(frequency_ * t) / frequency_;
    decayed_du = env * std::cos(frequency_ * t);
  } else {
    // Combine exponents so sinh(kappa t) never overflows on its own.
    const double k = frequency_;
    const double grow = std::exp((k - 0.5 * s) * t);
    const double fall = std::exp(-(k + 0.5 * s) * t);
    decayed_u = 0.5 * (grow - fall) / k;
    decayed_du = 0.5 * (grow + fall);
  }
  GreenValue g;
  g.value = decayed_u;
  g.dot = decayed_du - 0.5 * s * decayed_u;
  g.ddot = -s * g.dot - omega0_ * omega0_ * g.value;
  return g;
}

GreenValue GreenPair::plus(double t) const {
  if (poles_.empty()) return ohmic_eval(+1.0, t);
  Complex v{0.0}, d{0.0}, dd{0.0};
  for (std::size_t k = 0; k < poles_.size(); ++k) {
    const Complex z = poles_[k];
    const Complex term = residues_[k] * std::exp(z * t);
    v += term;
    d += z * term;
    dd += z * z * term;
  }
  return {v.real(), d.real(), dd.real()};
}

GreenValue GreenPair::minus(double t) const {
  if (!poles_.empty()) {
    throw ParameterError("G- is only defined for strict Ohmic damping");
  }
  return ohmic_eval(-1.0, t);
}

GreenPair make_green_pair(const SystemParams& params, const DampingSpec& damping) {
  params.validate();
  damping.validate();
  if (damping.kind != DampingKind::StrictOhmic) {
    throw ParameterError(
        "make_green_pair handles strict Ohmic damping; use drude_green_pair for Drude");
  }
  return GreenPair::ohmic(params.omega0, damping.gamma);
}

double default_caustic_window(const SystemParams& params) { return 1e-6 / params.omega0; }

bool near_caustic(const GreenPair& green, double t, double window) {
  const GreenValue g = green.plus(t);
  return std::abs(g.value) < window * std::abs(g.dot);
}

void require_off_caustic(const GreenPair& green, double t, double window, const char* context) {
  if (near_caustic(green, t, window)) {
    std::ostringstream os;
    os.precision(17);
    os << context << ": t = " << t << " lies within " << window << " of a zero of G+";
    throw CausticError(os.str(), {t});
  }
}

Matrix2 classical_map(double t, const SystemParams& params, const GreenPair& green) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw ParameterError("classical_map needs t >= 0");
  const GreenValue g = green.plus(t);
  const double m = params.mass;
  Matrix2 M;
  M << g.dot, m * g.ddot, g.value / m, g.dot;
  return M;
}

Matrix2 classical_flow(double t, const SystemParams& params, const GreenPair& green) {
  if (green.is_pole_expansion()) {
    throw ParameterError("classical_flow is defined for strict Ohmic damping only");
  }
  Matrix2 unslip;
  unslip << 1.0, params.mass * green.gamma(), 0.0, 1.0;
  return classical_map(t, params, green) * unslip;
}

bool CausticSet::contains(double t) const {
  return std::any_of(times.begin(), times.end(),
                     [&](double tc) { return std::abs(t - tc) < window; });
}

CausticSet caustics(const GreenPair& green, double horizon, double window) {
  if (!(horizon > 0.0)) throw ParameterError("caustic horizon must be positive");
  CausticSet set;
  set.window = window;
  if (!green.is_pole_expansion()) {
    if (green.regime() == Regime::Underdamped) {
      const double period = std::numbers::pi / green.frequency();
      for (int n = 1; n * period <= horizon; ++n) set.times.push_back(n * period);
    }
    return set;
  }
  if (green.frequency() <= 0.0) return set;
  // Sign changes of G+ on a grid fine against the oscillation, refined by TOMS 748.
  const double step = std::numbers::pi / (16.0 * green.frequency());
  auto f = [&](double t) { return green.plus(t).value; };
  double a = step;
  double fa = f(a);
  while (a < horizon) {
    const double b = std::min(a + step, horizon);
    const double fb = f(b);
    if (fa == 0.0) {
      set.times.push_back(a);
    } else if (fa * fb < 0.0) {
      std::uintmax_t iters = 100;
      auto [lo, hi] = boost::math::tools::toms748_solve(
          f, a, b, fa, fb, boost::math::tools::eps_tolerance<double>(52), iters);
      set.times.push_back(0.5 * (lo + hi));
    }
    a = b;
    fa = fb;
  }
  if (fa == 0.0) set.times.push_back(a);
  return set;
}

}  // namespace wqbm
