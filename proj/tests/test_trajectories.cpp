#include <doctest.h>

#include <cmath>
#include <numbers>

#include "support.hpp"
#include "wqbm/errors.hpp"
#include "wqbm/trajectories.hpp"

using namespace wqbm;
using doctest::Approx;

namespace {

const SystemParams kParams{};

GreenPair ohmic(double gamma) {
  return make_green_pair(kParams, DampingSpec::strict_ohmic(gamma));
}

}  // namespace

TEST_CASE("boundary values are interpolated exactly") {
  const TrajectoryPair pair = stationary_pair(1.0, 0.2, 0.5, 0.4, 3.0, kParams, ohmic(0.3));
  CHECK(pair.at(0.0).q == 1.0);
  CHECK(pair.at(0.0).qt == 0.2);
  CHECK(pair.at(3.0).q == 0.5);
  CHECK(pair.at(3.0).qt == 0.4);
  // The unpinned formulas agree as well.
  CHECK(pair.at(1e-15).q == Approx(1.0).epsilon(1e-12));
  CHECK(pair.at(3.0 - 1e-15).qt == Approx(0.4).epsilon(1e-12));
  CHECK(pair.q_plus(0.0) == Approx(1.1));
  CHECK(pair.q_minus(3.0) == Approx(0.3));
  CHECK_THROWS_AS(pair.at(3.1), ParameterError);
}

TEST_CASE("equations of motion") {
  for (double gamma : {0.0, 0.3, 3.0}) {
    const GreenPair g = ohmic(gamma);
    const TrajectoryPair pair = stationary_pair(1.0, 0.2, 0.5, 0.4, 3.0, kParams, g);
    double worst_sum = 0.0, worst_coupled = 0.0, amplitude = 0.0;
    const double h = 1e-3;
    for (int k = 1; k < 1000; ++k) {
      const double s = 0.003 * k;
      if (s < 2 * h || s > 3.0 - 2 * h) continue;
      const PairSample x = pair.at(s);
      worst_sum = std::max(worst_sum, std::abs(x.q_ddot + gamma * x.q_dot + x.q));
      worst_sum = std::max(worst_sum, std::abs(x.qt_ddot - gamma * x.qt_dot + x.qt));
      // Coupled form by finite differences of q+ and q-.
      auto qp = [&](double u) { return pair.q_plus(u); };
      auto qm = [&](double u) { return pair.q_minus(u); };
      const double rp = testsupport::d2(qp, s, h) + qp(s) + gamma * testsupport::d1(qm, s, h);
      const double rm = testsupport::d2(qm, s, h) + qm(s) + gamma * testsupport::d1(qp, s, h);
      worst_coupled = std::max({worst_coupled, std::abs(rp), std::abs(rm)});
      amplitude = std::max({amplitude, std::abs(qp(s)), std::abs(qm(s))});
    }
    CHECK(worst_sum < 1e-12);
    CHECK(worst_coupled < 1e-8 * amplitude);
  }
}

TEST_CASE("diagonal pair collapses to one classical path") {
  const TrajectoryPair pair = stationary_pair(1.0, 0.0, 0.5, 0.0, 3.0, kParams, ohmic(0.3));
  for (double s : {0.0, 1.0, 2.2, 3.0}) {
    const LiftedPoints r = phase_space_lift(pair, s);
    CHECK(pair.at(s).qt == 0.0);
    CHECK(r.plus.p == r.minus.p);
    CHECK(r.plus.q == r.minus.q);
    CHECK(r.sum.q == r.plus.q);
    CHECK(pair_invariant(pair, s) == 0.0);
  }
  CHECK_THROWS_AS(separation_rate(pair), FitWindowError);
}

TEST_CASE("undamped pair is a sine interpolant") {
  const double t = 2.0;
  const TrajectoryPair pair = stationary_pair(1.0, 0.2, 0.5, 0.4, t, kParams, ohmic(0.0));
  for (double s : {0.3, 1.1, 1.9}) {
    const double q = (1.0 * std::sin(t - s) + 0.5 * std::sin(s)) / std::sin(t);
    const double qt = (0.2 * std::sin(t - s) + 0.4 * std::sin(s)) / std::sin(t);
    CHECK(pair.at(s).q == Approx(q).epsilon(1e-14));
    CHECK(pair.at(s).qt == Approx(qt).epsilon(1e-14));
  }
}

TEST_CASE("pair invariant is conserved") {
  for (double gamma : {0.0, 0.3, 3.0}) {
    const TrajectoryPair pair = stationary_pair(1.0, 0.2, 0.5, 0.4, 5.0, kParams, ohmic(gamma));
    double lo = 1e300, hi = -1e300, scale = 0.0;
    for (int k = 0; k <= 1000; ++k) {
      const double s = 5.0 * k / 1000.0;
      const double v = pair_invariant(pair, s);
      const PairSample x = pair.at(s);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
      scale = std::max(scale, std::abs(x.q_dot * x.qt) + std::abs(x.q * x.qt_dot));
    }
    CHECK(hi - lo < 1e-10 * scale);
  }
}

TEST_CASE("sum trajectory follows the damped classical flow") {
  const SystemParams p{};
  const GreenPair g = ohmic(0.3);
  const TrajectoryPair pair = stationary_pair(1.0, 0.2, 0.5, 0.4, 6.0, p, g);
  const PhasePoint r0 = phase_space_lift(pair, 0.0).sum;
  for (double s : {0.5, 2.0, 4.5, 6.0}) {
    const Vector2 expected = classical_flow(s, p, g) * r0.vec();
    const PhasePoint r = phase_space_lift(pair, s).sum;
    CHECK(std::abs(r.p - expected(0)) < 1e-9);
    CHECK(std::abs(r.q - expected(1)) < 1e-9);
  }
}

TEST_CASE("separation growth") {
  SUBCASE("underdamped rate gamma / 2") {
    const TrajectoryPair pair = stationary_pair(1.0, 0.2, 0.5, 0.4, 40.0, kParams, ohmic(0.3));
    CHECK(separation_rate(pair) == Approx(0.15).epsilon(0.05));
    // Sum shrinks while the separation grows.
    const LiftedPoints early = phase_space_lift(pair, 5.0);
    const LiftedPoints late = phase_space_lift(pair, 30.0);
    const auto norm = [](const PhasePoint& r) { return std::hypot(r.p, r.q); };
    const PhasePoint d_early{early.plus.p - early.minus.p, early.plus.q - early.minus.q};
    const PhasePoint d_late{late.plus.p - late.minus.p, late.plus.q - late.minus.q};
    CHECK(norm(d_late) > norm(d_early));
  }
  SUBCASE("undamped rate zero") {
    const TrajectoryPair pair = stationary_pair(1.0, 0.2, 0.5, 0.4, 40.0, kParams, ohmic(0.0));
    CHECK(std::abs(separation_rate(pair)) < 5e-3);
  }
  SUBCASE("overdamped dominant root") {
    const double gamma = 3.0;
    const double kappa = std::sqrt(gamma * gamma / 4 - 1);
    // Generic boundary data leave the slow root in charge over most of the window;
    // the fast one only wins once q~(0) = 0 removes the slow component.
    const TrajectoryPair generic = stationary_pair(1.0, 0.2, 0.5, 0.4, 12.0, kParams, ohmic(gamma));
    CHECK(separation_rate(generic) == Approx(gamma / 2 - kappa).epsilon(0.05));
    const TrajectoryPair pinned = stationary_pair(1.0, 0.0, 0.5, 0.4, 6.0, kParams, ohmic(gamma));
    CHECK(separation_rate(pinned) == Approx(gamma / 2 + kappa).epsilon(0.05));
  }
}

TEST_CASE("caustics are refused") {
  const GreenPair g = ohmic(0.3);
  const double tc = std::numbers::pi / g.frequency();
  CHECK_THROWS_AS(stationary_pair(1.0, 0.2, 0.5, 0.4, tc, kParams, g), CausticError);
  CHECK_THROWS_AS(stationary_pair(1.0, 0.2, 0.5, 0.4, 0.0, kParams, g), ParameterError);
}
