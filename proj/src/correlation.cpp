#include "wqbm/correlation.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "matsubara.hpp"
#include "wqbm/errors.hpp"
#include "wqbm/parallel.hpp"

namespace wqbm {

namespace {

using Complex = std::complex<double>;

/// Coefficients of the response denominator P(z) and numerator N(z), highest
/// power first; chi(z) = N(z) / P(z).
struct Rational {
  std::vector<double> num;
  std::vector<double> den;
};

Rational response(const SystemParams& params, const DampingSpec& damping) {
  const double w2 = params.omega0 * params.omega0;
  const double g = damping.gamma;
  if (damping.kind == DampingKind::StrictOhmic) return {{1.0}, {1.0, g, w2}};
  const double wc = damping.omega_c;
  return {{1.0, wc}, {1.0, wc, w2 + g * wc, w2 * wc}};
}

template <class T>
T horner(const std::vector<double>& c, T x) {
  T acc = 0.0;
  for (double ci : c) acc = acc * x + ci;
  return acc;
}

Complex horner_derivative(const std::vector<double>& c, Complex x) {
  Complex acc = 0.0;
  const std::size_t deg = c.size() - 1;
  for (std::size_t i = 0; i < deg; ++i) acc = acc * x + c[i] * static_cast<double>(deg - i);
  return acc;
}

std::vector<Complex> monic_roots(const std::vector<double>& c) {
  const int deg = static_cast<int>(c.size()) - 1;
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(deg, deg);
  for (int j = 0; j < deg; ++j) companion(0, j) = -c[j + 1] / c[0];
  for (int i = 1; i < deg; ++i) companion(i, i - 1) = 1.0;
  Eigen::EigenSolver<Eigen::MatrixXd> es(companion, false);
  std::vector<Complex> roots(es.eigenvalues().data(), es.eigenvalues().data() + deg);
  for (auto& z : roots) {
    for (int it = 0; it < 4; ++it) {
      const Complex d = horner_derivative(c, z);
      if (std::abs(d) == 0.0) break;
      z -= horner(c, z) / d;
    }
  }
  return roots;
}

/// cot(w) without overflow for large |Im w|.
Complex cot(Complex w) {
  const Complex i{0.0, 1.0};
  if (w.imag() >= 0.0) {
    const Complex e = std::exp(2.0 * i * w);
    return i * (e + 1.0) / (e - 1.0);
  }
  const Complex e = std::exp(-2.0 * i * w);
  return i * (1.0 + e) / (1.0 - e);
}

struct PoleData {
  std::vector<Complex> poles;
  std::vector<Complex> residues;
};

PoleData response_poles(const SystemParams& params, const DampingSpec& damping) {
  const Rational chi = response(params, damping);
  PoleData pd;
  pd.poles = monic_roots(chi.den);
  const double scale = std::max(params.omega0, damping.gamma);
  for (std::size_t i = 0; i < pd.poles.size(); ++i) {
    for (std::size_t j = i + 1; j < pd.poles.size(); ++j) {
      const double tol =
          1e-10 * std::max({scale, std::abs(pd.poles[i]), std::abs(pd.poles[j])});
      if (std::abs(pd.poles[i] - pd.poles[j]) < tol) {
        std::ostringstream os;
        os << "response poles " << pd.poles[i] << " and " << pd.poles[j]
           << " coincide; perturb gamma or omega_c slightly";
        throw PoleDegeneracyError(os.str());
      }
    }
  }
  for (const auto& z : pd.poles) {
    pd.residues.push_back(horner(chi.num, z) / horner_derivative(chi.den, z));
  }
  return pd;
}

}  // namespace

GreenPair drude_green_pair(const SystemParams& params, const DampingSpec& damping) {
  params.validate();
  damping.validate();
  PoleData pd = response_poles(params, damping);
  return GreenPair::from_poles(params.omega0, damping.gamma, std::move(pd.poles),
                               std::move(pd.residues));
}

ThermalCorrelation::ThermalCorrelation(const SystemParams& params, const DampingSpec& damping,
                                       MatsubaraOptions options)
    : params_(params), damping_(damping), options_(options),
      green_(drude_green_pair(params, damping)) {
  const double bh = params_.beta * params_.hbar;
  for (std::size_t k = 0; k < green_.poles().size(); ++k) {
    const Complex z = green_.poles()[k];
    // A real pole at -nu_n collides with a Matsubara pole.
    const double ratio = -z.real() * bh / (2.0 * std::numbers::pi);
    const double nearest = std::round(ratio);
    if (nearest >= 1.0 && std::abs(z.imag()) < 1e-10 * std::abs(z) &&
        std::abs(ratio - nearest) < 1e-10 * ratio) {
      std::ostringstream os;
      os << "response pole " << z << " coincides with Matsubara frequency -nu_" << nearest
         << "; perturb beta or the damping parameters slightly";
      throw PoleDegeneracyError(os.str());
    }
    cot_weights_.push_back(green_.residues()[k] * cot(0.5 * bh * z));
  }
  q2_ = symmetric(0.0, 0);
  if (damping_.kind == DampingKind::StrictOhmic) {
    p2_ = std::numeric_limits<double>::infinity();
  } else {
    p2_ = -params_.mass * symmetric(0.0, 2);
  }
}

double ThermalCorrelation::symmetric(double t, int derivative) const {
  // S is even, so its slope vanishes at the origin; the series only converges like 1/N there.
  if (derivative == 1 && t == 0.0) return 0.0;
  if (damping_.kind == DampingKind::StrictOhmic && derivative == 2 && t == 0.0) {
    return -std::numeric_limits<double>::infinity();
  }
  const double m = params_.mass;
  const double hbar = params_.hbar;
  const double bh = params_.beta * hbar;
  Complex poles{0.0};
  for (std::size_t k = 0; k < cot_weights_.size(); ++k) {
    const Complex z = green_.poles()[k];
    poles += cot_weights_[k] * std::pow(z, derivative) * std::exp(z * t);
  }
  const double pole_part = -hbar / (2.0 * m) * poles.real();

  const Rational chi = response(params_, damping_);
  const double nu1 = 2.0 * std::numbers::pi / bh;
  auto term = [&](std::size_t n) {
    const double nu = nu1 * static_cast<double>(n);
    const double diff = horner(chi.num, nu) / horner(chi.den, nu) -
                        horner(chi.num, -nu) / horner(chi.den, -nu);
    return diff * std::pow(-nu, derivative) * std::exp(-nu * t) / (m * params_.beta);
  };
  double largest = params_.omega0;
  for (const auto& z : green_.poles()) largest = std::max(largest, std::abs(z));
  const auto asym = static_cast<std::size_t>(std::ceil(10.0 * largest / nu1)) + 1;
  const double power =
      (damping_.kind == DampingKind::StrictOhmic ? 3.0 : 5.0) - static_cast<double>(derivative);
  const double w0 = params_.omega0;
  const double floor = 1e-12 * hbar / (m * w0) * (1.0 + 1.0 / (bh * w0)) *
                       std::pow(w0, derivative);
  return detail::matsubara_sum(term, std::exp(-nu1 * t), power, asym, pole_part, floor,
                               options_, "symmetrized position correlation")
      .value;
}

CorrelationSample ThermalCorrelation::at(double t) const {
  if (!(t >= 0.0)) throw ParameterError("correlation functions are tabulated for t >= 0");
  CorrelationSample s;
  s.t = t;
  s.S = symmetric(t, 0);
  s.S_dot = symmetric(t, 1);
  s.S_ddot = symmetric(t, 2);
  const GreenValue g = green_.plus(t);
  const double a = -params_.hbar / (2.0 * params_.mass);
  s.A = a * g.value;
  s.A_dot = a * g.dot;
  return s;
}

CorrelationTable autocorrelation(std::span<const double> tgrid, const SystemParams& params,
                                 const DampingSpec& damping, MatsubaraOptions options) {
  if (tgrid.empty() || tgrid.front() != 0.0) {
    throw ParameterError("correlation grid must start at t = 0");
  }
  for (std::size_t i = 1; i < tgrid.size(); ++i) {
    if (!(tgrid[i] > tgrid[i - 1])) throw ParameterError("correlation grid must increase");
  }
  const ThermalCorrelation corr(params, damping, options);
  CorrelationTable table;
  table.q2_eq = corr.q2_eq();
  table.p2_eq = corr.p2_eq();
  table.samples.resize(tgrid.size());
  parallel_for(tgrid.size(), [&](std::size_t i) { table.samples[i] = corr.at(tgrid[i]); });
  return table;
}

std::vector<GreenSample> green_from_antisymmetric(const CorrelationTable& table,
                                                  const SystemParams& params) {
  std::vector<GreenSample> out;
  out.reserve(table.samples.size());
  const double f = -2.0 * params.mass / params.hbar;
  for (const auto& s : table.samples) out.push_back({s.t, f * s.A, f * s.A_dot});
  return out;
}

}  // namespace wqbm
