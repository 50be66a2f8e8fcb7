#include <doctest.h>

#include <cmath>
#include <numbers>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "wqbm/errors.hpp"
#include "wqbm/kernels.hpp"

using namespace wqbm;
using doctest::Approx;

namespace {

SystemParams params_beta(double beta) {
  SystemParams p;
  p.beta = beta;
  return p;
}

}  // namespace

TEST_CASE("spectral density") {
  const SystemParams p;
  const auto ohm = DampingSpec::strict_ohmic(0.3);
  const auto drude = DampingSpec::drude(0.3, 50.0);
  CHECK(spectral_density(0.0, ohm, p) == 0.0);
  CHECK(spectral_density(0.0, drude, p) == 0.0);
  CHECK(spectral_density(2.0, ohm, p) == Approx(0.6).epsilon(1e-15));
  CHECK(spectral_density(50.0, drude, p) == Approx(0.5 * spectral_density(50.0, ohm, p)));
  CHECK_THROWS_AS(spectral_density(-1.0, ohm, p), ParameterError);
}

TEST_CASE("friction kernel") {
  const SystemParams p;
  const auto drude = DampingSpec::drude(0.3, 50.0);
  CHECK(friction_kernel(0.0, drude, p) == Approx(0.3 * 50.0));
  CHECK(friction_kernel(1.0 / 50.0, drude, p) == Approx(0.3 * 50.0 * std::exp(-1.0)));
  boost::math::quadrature::tanh_sinh<double> ts;
  const double dc = ts.integrate([&](double t) { return friction_kernel(t, drude, p); }, 0.0,
                                 std::numeric_limits<double>::infinity());
  CHECK(dc == Approx(0.3).epsilon(1e-10));
  CHECK_THROWS_AS(friction_kernel(0.5, DampingSpec::strict_ohmic(0.3), p), StrictOhmicDeltaError);
  CHECK(friction_delta_weight(DampingSpec::strict_ohmic(0.3), p) == Approx(0.6));
  CHECK(friction_delta_weight(drude, p) == 0.0);
}

TEST_CASE("high-temperature kernel strength carries the mass") {
  SystemParams p = params_beta(0.2);
  const auto k = NoiseKernel::high_temperature(p, DampingSpec::strict_ohmic(0.3));
  CHECK(k.kind() == NoiseKind::HighTemperatureDelta);
  CHECK(k.delta_strength() == Approx(3.0).epsilon(1e-15));
  CHECK_THROWS_AS(k.sample(1.0), ParameterError);
  p.mass = 2.0;
  CHECK(NoiseKernel::high_temperature(p, DampingSpec::strict_ohmic(0.3)).delta_strength() ==
        Approx(6.0));
}

TEST_CASE("exact Drude kernel against frequency quadrature") {
  const SystemParams p = params_beta(0.2);
  const auto k = NoiseKernel::exact_drude(p, DampingSpec::drude(0.3, 50.0));
  // Oscillatory frequency quadrature (tests/oracles/freeze_values.py).
  CHECK(k(0.1) == Approx(-6.859963687700672).epsilon(1e-9));
  CHECK(k(1.0) == Approx(-3.5366926272651996e-12).epsilon(1e-9));
  // The oracle underflows at t = 5; the kernel is below exp(-nu_1 t).
  CHECK(std::abs(k(5.0)) < 1e-60);
  CHECK(k.sample(0.1).terms >= 1);
}

TEST_CASE("exact kernel is even and decays on the Matsubara scale") {
  const SystemParams p = params_beta(0.2);
  const auto k = NoiseKernel::exact_drude(p, DampingSpec::drude(0.3, 50.0));
  for (double t : {0.01, 0.2, 0.7}) CHECK(k(-t) == k(t));
  CHECK_THROWS_AS(k(0.0), ParameterError);
  // Slowest pole is nu_1 = 2 pi / beta hbar < omega_c.
  const double nu1 = 2 * std::numbers::pi / 0.2;
  const double rate = -std::log(k(1.6) / k(1.5)) / 0.1;
  CHECK(rate == Approx(nu1).epsilon(1e-3));
  // With the cutoff below nu_1 the cutoff pole sets the decay.
  const auto slow = NoiseKernel::exact_drude(p, DampingSpec::drude(0.3, 10.0));
  CHECK(-std::log(slow(2.1) / slow(2.0)) / 0.1 == Approx(10.0).epsilon(1e-3));
}

TEST_CASE("classical limit of the exact kernel") {
  const SystemParams p = params_beta(0.01);
  const auto k = NoiseKernel::exact_drude(p, DampingSpec::drude(0.3, 50.0));
  boost::math::quadrature::tanh_sinh<double> ts;
  double integral = 0.0;
  for (auto [a, b] : {std::pair{0.0, 0.01}, std::pair{0.01, 0.1}, std::pair{0.1, 1.0}}) {
    integral += 2.0 * ts.integrate([&](double t) { return k(t); }, a, b);
  }
  CHECK(integral == Approx(2 * 0.3 / 0.01).epsilon(0.02));
}

TEST_CASE("Matsubara truncation errors") {
  const SystemParams p = params_beta(0.2);
  CHECK_THROWS_AS(noise_kernel_real(1e-3, DampingSpec::drude(0.3, 50.0), p, 1), ConvergenceError);
  CHECK_NOTHROW(noise_kernel_real(1e-3, DampingSpec::drude(0.3, 50.0), p, 0));
  CHECK_THROWS_AS(noise_kernel_real(1.0, DampingSpec::strict_ohmic(0.3), p), ParameterError);
  // omega_c on a Matsubara frequency makes a double pole.
  const SystemParams q = params_beta(2 * std::numbers::pi / 50.0);
  CHECK_THROWS_AS(NoiseKernel::exact_drude(q, DampingSpec::drude(0.3, 50.0)),
                  PoleDegeneracyError);
}
