#pragma once

#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace wqbm {

using Matrix2 = Eigen::Matrix2d;
using Vector2 = Eigen::Vector2d;

/// Global physical scales. Natural units (m = hbar = omega0 = 1) by default.
struct SystemParams {
  double mass = 1.0;
  double omega0 = 1.0;
  double hbar = 1.0;
  double beta = 1.0;  ///< 1 / (k_B T)

  /// Throws ParameterError unless every field is finite and strictly positive.
  void validate() const;
};

enum class DampingKind { StrictOhmic, DrudeOhmic };

/// Spectral-density model: I(w) = m gamma w, optionally with a Drude cutoff
/// I(w) = m gamma w wc^2 / (w^2 + wc^2).
struct DampingSpec {
  DampingKind kind = DampingKind::StrictOhmic;
  double gamma = 0.0;
  double omega_c = 0.0;  ///< used only for DrudeOhmic

  static DampingSpec strict_ohmic(double gamma) { return {DampingKind::StrictOhmic, gamma, 0.0}; }
  static DampingSpec drude(double gamma, double omega_c) {
    return {DampingKind::DrudeOhmic, gamma, omega_c};
  }

  void validate() const;
  /// True when the cutoff is below the recommended 10 omega0.
  bool low_cutoff(const SystemParams& params) const;
};

/// Phase-space point r = (p, q).
struct PhasePoint {
  double p = 0.0;
  double q = 0.0;

  Vector2 vec() const { return {p, q}; }
  static PhasePoint from(const Vector2& v) { return {v(0), v(1)}; }
};

enum class Regime { Underdamped, Critical, Overdamped };

/// G and its first two time derivatives at one instant.
struct GreenValue {
  double value = 0.0;
  double dot = 0.0;
  double ddot = 0.0;
};

/// The response functions G+ (damped) and G- (anti-damped) of the oscillator.
///
/// For strict Ohmic damping both are closed forms
///   G+-(t) = exp(-+ gamma t / 2) sin(omega_d t) / omega_d,
/// continued to sinh(kappa t) / kappa above critical damping and to
/// t exp(-+ gamma t / 2) at it. Memory-friction models (Drude) supply G+ as
/// a residue expansion sum_k r_k exp(z_k t); G- is then not defined.
class GreenPair {
 public:
  using Complex = std::complex<double>;

  static GreenPair ohmic(double omega0, double gamma);
  static GreenPair from_poles(double omega0, double gamma, std::vector<Complex> poles,
                              std::vector<Complex> residues);

  Regime regime() const { return regime_; }
  /// omega_d when underdamped, kappa when overdamped, zero at critical damping.
  double frequency() const { return frequency_; }
  double gamma() const { return gamma_; }
  double omega0() const { return omega0_; }
  bool has_minus() const { return poles_.empty(); }
  bool is_pole_expansion() const { return !poles_.empty(); }
  std::span<const Complex> poles() const { return poles_; }
  std::span<const Complex> residues() const { return residues_; }

  GreenValue plus(double t) const;
  /// Throws ParameterError for pole expansions.
  GreenValue minus(double t) const;

 private:
  GreenValue ohmic_eval(double sign, double t) const;

  Regime regime_ = Regime::Underdamped;
  double omega0_ = 1.0;
  double gamma_ = 0.0;
  double frequency_ = 1.0;
  double detuning_ = 1.0;  ///< omega0^2 - gamma^2 / 4
  std::vector<Complex> poles_;
  std::vector<Complex> residues_;
};

/// Strict-Ohmic Green pair. Drude Green functions come from correlation.hpp.
GreenPair make_green_pair(const SystemParams& params, const DampingSpec& damping);

/// Default caustic exclusion half-width, 1e-6 / omega0.
double default_caustic_window(const SystemParams& params);

/// True when t lies within `window` of a zero of G+ (|G+| < window |dG+/dt|).
bool near_caustic(const GreenPair& green, double t, double window);

/// Throws CausticError naming `context` when near_caustic holds.
void require_off_caustic(const GreenPair& green, double t, double window, const char* context);

/// Linear map r_cl(t) = M(t) r' of the damped classical motion including the
/// momentum slip p(0+) = p' - m gamma q' of a factorizing preparation:
///   M = [[dG+, m d2G+], [G+/m, dG+]],  m d2G+ = m [(dG+)^2/G+ - 1/G-].
/// Entire in t; evaluated without the 1/G+ representation.
Matrix2 classical_map(double t, const SystemParams& params, const GreenPair& green);

/// Flow of the damped equation from (m dq/dt, q) at time zero, without slip.
/// Only defined for strict Ohmic damping, where the slip is instantaneous.
Matrix2 classical_flow(double t, const SystemParams& params, const GreenPair& green);

/// Zeros of G+ in (0, horizon].
struct CausticSet {
  std::vector<double> times;
  double window = 0.0;

  bool contains(double t) const;
};

CausticSet caustics(const GreenPair& green, double horizon, double window);

}  // namespace wqbm
