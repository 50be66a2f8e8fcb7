// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "support.hpp"
#include "wqbm/correlation.hpp"
#include "wqbm/evolution.hpp"
#include "wqbm/oracle.hpp"
#include "wqbm/propagator.hpp"
#include "wqbm/trajectories.hpp"

using namespace wqbm;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

SystemParams params_beta(double beta) {
  SystemParams p;
  p.beta = beta;
  return p;
}

/// Tensor Gauss-Legendre quadrature over +-12 standard deviations of cov.
double box_integral(const std::function<double(const PhasePoint&)>& f, const Vector2& c,
                    const Matrix2& cov) {
  Eigen::SelfAdjointEigenSolver<Matrix2> es(cov);
  const Vector2 sd = es.eigenvalues().cwiseSqrt();
  const int n = 120;
  const testsupport::GaussLegendre gl(n, -12.0, 12.0);
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const Vector2 r = c + es.eigenvectors() * Vector2{gl.x[i] * sd(0), gl.x[j] * sd(1)};
      total += gl.w[i] * gl.w[j] * sd(0) * sd(1) * f(PhasePoint::from(r));
    }
  }
  return total;
}

Outcome normalization() {
  double worst = 0.0;
  int points = 0;
  for (double gamma : {0.1, 0.3, 1.0}) {
    for (double beta : {0.2, 1.0}) {
      for (double t : {0.5, 1.0, 5.0}) {
        const SystemParams p = params_beta(beta);
        const auto damping = DampingSpec::strict_ohmic(gamma);
        const GreenPair green = make_green_pair(p, damping);
        if (near_caustic(green, t, default_caustic_window(p))) continue;
        const CovarianceData cov =
            covariance_quadrature(t, green, NoiseKernel::high_temperature(p, damping));
        const Matrix2 M = classical_map(t, p, green);
        const PhasePoint rp{0.3, -0.8};
        const double norm = box_integral(
            [&](const PhasePoint& r) { return propagating_function(r, rp, cov, M, p); },
            M * rp.vec(), cov.kernel_cov);
        worst = std::max(worst, std::abs(norm - 1.0));
        ++points;
      }
    }
  }
  return {points == 18 && worst < 1e-6, fmt("%.0f grid points, max |norm - 1| = %.2e", points, worst)};
}

Outcome undamped_limit() {
  const SystemParams p = params_beta(0.2);
  const auto damping = DampingSpec::strict_ohmic(1e-8);
  const GreenPair green = make_green_pair(p, damping);
  const NoiseKernel noise = NoiseKernel::high_temperature(p, damping);
  double kmax = 0.0, cmax = 0.0;
  const Vector2 rp{0.5, 0.5};
  for (double t : {0.5, 1.0, 2.0}) {
    const CovarianceData cov = covariance_quadrature(t, green, noise);
    kmax = std::max(kmax, cov.kernel_cov.cwiseAbs().maxCoeff());
    const Vector2 c = classical_map(t, p, green) * rp;
    const Vector2 rot{std::cos(t) * rp(0) - std::sin(t) * rp(1),
                      std::sin(t) * rp(0) + std::cos(t) * rp(1)};
    cmax = std::max(cmax, (c - rot).cwiseAbs().maxCoeff());
  }
  return {kmax < 1e-6 && cmax < 1e-8,
          fmt("max kernel_cov entry %.2e, max center deviation %.2e", kmax, cmax)};
}

Outcome gibbs_state() {
  const SystemParams p = params_beta(0.2);
  const auto damping = DampingSpec::strict_ohmic(0.3);
  const GreenPair green = make_green_pair(p, damping);
  const NoiseKernel noise = NoiseKernel::high_temperature(p, damping);
  const double t = 60.0 / 0.3;
  GaussianWigner s;
  s.mean = {0.0, 2.0};
  s.cov << 0.5, 0.0, 0.0, 0.5;
  const GaussianWigner out =
      evolve_gaussian(s, covariance_quadrature(t, green, noise), classical_map(t, p, green));
  const double kT = 1.0 / p.beta;
  const double ep = std::abs(out.cov(0, 0) / (p.mass * kT) - 1.0);
  const double eq = std::abs(out.cov(1, 1) * p.mass * p.omega0 * p.omega0 / kT - 1.0);
  const double off = std::abs(out.cov(0, 1)) / std::sqrt(out.cov(0, 0) * out.cov(1, 1));
  return {ep < 1e-4 && eq < 1e-4 && off < 1e-4,
          fmt("rel. errors pp %.2e, qq %.2e; off-diagonal ratio %.2e", ep, eq, off)};
}

Outcome two_routes() {
  const SystemParams p = params_beta(0.2);
  const auto damping = DampingSpec::drude(0.3, 50.0);
  const ThermalCorrelation corr(p, damping);
  const NoiseKernel noise = NoiseKernel::exact_drude(p, damping);
  double worst = 0.0;
  for (double t : {0.5, 1.0, 2.0, 5.0}) {
    const Abc q = abc_quadrature(t, corr.green(), noise);
    const Abc c = abc_closed(t, corr);
    for (auto [x, y] : {std::pair{q.a, c.a}, std::pair{q.b, c.b}, std::pair{q.c, c.c}}) {
      worst = std::max(worst, std::abs(x / y - 1.0));
    }
  }
  return {worst < 1e-2, fmt("max relative difference %.2e", worst)};
}

Outcome asymptotics() {
  const SystemParams p = params_beta(0.2);
  const ThermalCorrelation corr(p, DampingSpec::drude(0.3, 50.0));
  const double t = 30.0 / 0.3;
  const Abc c = abc_closed(t, corr);
  const Abc a = abc_asymptotic(t, corr.q2_eq(), corr.p2_eq(), p, corr.green());
  double worst = 0.0;
  for (auto [x, y] : {std::pair{c.a, a.a}, std::pair{c.b, a.b}, std::pair{c.c, a.c}}) {
    worst = std::max(worst, std::abs(x / y - 1.0));
  }
  return {worst < 1e-3, fmt("max relative deviation at t = 30/gamma: %.2e", worst)};
}

Outcome microscopic_oracle() {
  const SystemParams p = params_beta(0.2);
  const auto damping = DampingSpec::drude(0.3, 50.0);
  const GreenPair green = drude_green_pair(p, damping);
  const NoiseKernel noise = NoiseKernel::exact_drude(p, damping);
  GaussianWigner s;
  s.mean = {0.0, 1.0};
  s.cov << 0.5, 0.0, 0.0, 0.5;
  std::vector<double> ts;
  for (int k = 1; k <= 20; ++k) ts.push_back(0.5 * k);
  std::vector<GaussianWigner> analytic;
  for (double t : ts) {
    analytic.push_back(evolve_gaussian(s, covariance_quadrature(t, green, noise),
                                       classical_map(t, p, green)));
  }
  auto run = [&](std::size_t n, bool& in_window) {
    const BathDiscretization bath = discretize_bath(damping, p, n);
    in_window = ts.back() < 0.5 * bath.recurrence_time();
    const NormalModeFlow flow(bath, p);
    const FullGaussianState full = factorized_thermal_state(s, bath, p);
    OracleDeviation worst;
    for (std::size_t k = 0; k < ts.size(); ++k) {
      const OracleDeviation d = compare_states(evolve_reduced(full, flow, ts[k]), analytic[k]);
      worst.mean = std::max(worst.mean, d.mean);
      worst.cov = std::max(worst.cov, d.cov);
    }
    return worst;
  };
  bool ok300 = false, ok600 = false;
  const OracleDeviation n300 = run(300, ok300);
  const OracleDeviation n600 = run(600, ok600);
  const bool pass = ok300 && ok600 && n300.mean < 1e-2 && n300.cov < 1e-2 &&
                    n600.mean < n300.mean && n600.cov < n300.cov;
  return {pass, fmt("N=300: mean %.2e cov %.2e", n300.mean, n300.cov) +
                    fmt("; N=600: mean %.2e cov %.2e", n600.mean, n600.cov)};
}

Outcome trajectory_suite() {
  const SystemParams p{};
  const double gamma = 0.3;
  const GreenPair green = make_green_pair(p, DampingSpec::strict_ohmic(gamma));
  const double qp = 1.0, qtp = 0.2, qpp = 0.5, qtpp = 0.4, t = 40.0;
  const TrajectoryPair pair = stationary_pair(qp, qtp, qpp, qtpp, t, p, green);

  double boundary = 0.0;
  boundary = std::max(boundary, std::abs(pair.at(0.0).q - qp) / std::abs(qp));
  boundary = std::max(boundary, std::abs(pair.at(0.0).qt - qtp) / std::abs(qtp));
  boundary = std::max(boundary, std::abs(pair.at(t).q - qpp) / std::abs(qpp));
  boundary = std::max(boundary, std::abs(pair.at(t).qt - qtpp) / std::abs(qtpp));
  // Just inside the window the closed form must continue the boundary values to first order.
  const double delta = 1e-9;
  const PairSample in0 = pair.at(delta), in1 = pair.at(t - delta), e0 = pair.at(0.0), e1 = pair.at(t);
  boundary = std::max(boundary, std::abs(in0.q - (qp + delta * e0.q_dot)) / std::abs(qp));
  boundary = std::max(boundary, std::abs(in0.qt - (qtp + delta * e0.qt_dot)) / std::abs(qtp));
  boundary = std::max(boundary, std::abs(in1.q - (qpp - delta * e1.q_dot)) / std::abs(qpp));
  boundary = std::max(boundary, std::abs(in1.qt - (qtpp - delta * e1.qt_dot)) / std::abs(qtpp));

  double residual = 0.0, amplitude = 0.0, lo = 1e300, hi = -1e300, scale = 0.0, flow_err = 0.0;
  const PhasePoint r0 = phase_space_lift(pair, 0.0).sum;
  for (int k = 0; k <= 1000; ++k) {
    const double s = t * k / 1000.0;
    const PairSample x = pair.at(s);
    const double qpl_dd = x.q_ddot + 0.5 * x.qt_ddot, qmi_dd = x.q_ddot - 0.5 * x.qt_ddot;
    const double qpl = x.q + 0.5 * x.qt, qmi = x.q - 0.5 * x.qt;
    const double vpl = x.q_dot + 0.5 * x.qt_dot, vmi = x.q_dot - 0.5 * x.qt_dot;
    residual = std::max({residual, std::abs(qpl_dd + qpl + gamma * vmi),
                         std::abs(qmi_dd + qmi + gamma * vpl)});
    amplitude = std::max({amplitude, std::abs(qpl), std::abs(qmi)});
    const double inv = pair_invariant(pair, s);
    lo = std::min(lo, inv);
    hi = std::max(hi, inv);
    scale = std::max(scale, std::abs(x.q_dot * x.qt) + std::abs(x.q * x.qt_dot));
    const Vector2 expected = classical_flow(s, p, green) * r0.vec();
    const PhasePoint sum = phase_space_lift(pair, s).sum;
    flow_err = std::max(flow_err, (Vector2{sum.p, sum.q} - expected).cwiseAbs().maxCoeff());
  }
  const double drift = (hi - lo) / scale;
  const double rate = separation_rate(pair);
  const double rate_err = std::abs(rate / (gamma / 2) - 1.0);
  const bool pass = boundary < 1e-12 && residual < 1e-8 * amplitude && drift < 1e-10 &&
                    rate_err < 0.05 && flow_err < 1e-9;
  return {pass, fmt("boundary %.1e, residual %.1e, invariant drift %.1e", boundary,
                    residual / amplitude, drift) +
                    fmt(", rate %.4f (%.1f%% off), sum-flow %.1e", rate, 100 * rate_err, flow_err)};
}

Outcome fourier_consistency() {
  const SystemParams p = params_beta(0.2);
  const auto damping = DampingSpec::strict_ohmic(0.3);
  const GreenPair green = make_green_pair(p, damping);
  const NoiseKernel noise = NoiseKernel::high_temperature(p, damping);
  std::mt19937_64 rng(20261015);
  std::uniform_real_distribution<double> u(-2.0, 2.0), tdist(0.2, 8.0);
  double worst = 0.0;
  int done = 0;
  while (done < 10) {
    const double t = tdist(rng);
    if (std::abs(green.plus(t).value) < 1e-2) continue;  // stay clear of caustics
    const KernelIntegrals ints = kernel_integrals(t, green, noise);
    const CovarianceData cov = covariance_from_integrals(t, ints, p, green);
    const Matrix2 M = classical_map(t, p, green);
    const PhasePoint rp{u(rng), u(rng)};
    const Vector2 c = M * rp.vec();
    const Eigen::SelfAdjointEigenSolver<Matrix2> es(cov.kernel_cov);
    const Vector2 off = es.eigenvectors() * es.eigenvalues().cwiseSqrt().cwiseProduct(
                                                Vector2{0.7 * u(rng), 0.7 * u(rng)});
    const PhasePoint rpp = PhasePoint::from(c + off);
    const double direct = propagating_function(rpp, rp, cov, M, p);
    const double fourier = wigner_from_exponents(rpp, rp, t, p, green, ints);
    worst = std::max(worst, std::abs(fourier / direct - 1.0));
    ++done;
  }
  return {worst < 1e-6, fmt("max relative difference over 10 pairs %.2e", worst)};
}

Outcome initial_slip() {
  double worst_ulps = 0.0;
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (double gamma : {0.1, 0.3, 1.0, 2.0, 3.0}) {
    for (double mass : {1.0, 2.5}) {
      SystemParams p;
      p.mass = mass;
      const GreenPair green = make_green_pair(p, DampingSpec::strict_ohmic(gamma));
      for (double t : {0.0, 1e-300}) {
        const Matrix2 M = classical_map(t, p, green);
        for (int k = 0; k < 20; ++k) {
          const Vector2 rp{u(rng), u(rng)};
          const double expected = rp(0) - mass * gamma * rp(1);
          const double got = (M * rp)(0);
          const double ulp = std::nextafter(std::abs(expected), INFINITY) - std::abs(expected);
          worst_ulps = std::max(worst_ulps, std::abs(got - expected) / ulp);
        }
      }
    }
  }
  return {worst_ulps <= 2.0, fmt("max deviation %.1f ulp", worst_ulps)};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double budget;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "normalization suite", 10.0, normalization},
      {2, "undamped delta limit", 1.0, undamped_limit},
      {3, "Gibbs-state approach", 5.0, gibbs_state},
      {4, "two-route a, b, c", 60.0, two_routes},
      {5, "long-time asymptotics", 10.0, asymptotics},
      {6, "microscopic oracle", 120.0, microscopic_oracle},
      {7, "trajectory suite", 5.0, trajectory_suite},
      {8, "Fourier consistency", 5.0, fourier_consistency},
      {9, "initial slip", 1.0, initial_slip},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool pass = o.pass && secs < c.budget;
    if (!pass) ++failures;
    std::printf("%s criterion %d (%s): %s [%.2f s of %.0f s]\n", pass ? "PASS" : "FAIL", c.id,
                c.name, o.detail.c_str(), secs, c.budget);
  }
  return failures == 0 ? 0 : 1;
}
