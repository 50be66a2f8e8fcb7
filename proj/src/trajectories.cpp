#include "wqbm/trajectories.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "wqbm/errors.hpp"

namespace wqbm {

namespace {

void require_off_minus_caustic(const GreenPair& green, double t, double window) {
  const GreenValue g = green.minus(t);
  if (std::abs(g.value) < window * std::abs(g.dot)) {
    std::ostringstream os;
    os.precision(17);
    os << "stationary_pair: t = " << t << " lies within " << window << " of a zero of G-";
    throw CausticError(os.str(), {t});
  }
}

// Least-squares slope of y against x.
double slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

TrajectoryPair::TrajectoryPair(double qp, double qtp, double qpp, double qtpp, double t,
                               const SystemParams& params, const GreenPair& green)
    : qp_(qp), qtp_(qtp), qpp_(qpp), qtpp_(qtpp), t_(t), params_(params), green_(green) {
  if (!(t > 0.0) || !std::isfinite(t)) throw ParameterError("stationary pair needs t > 0");
  if (!std::isfinite(qp) || !std::isfinite(qtp) || !std::isfinite(qpp) || !std::isfinite(qtpp)) {
    throw ParameterError("boundary data must be finite");
  }
  const double window = default_caustic_window(params);
  require_off_caustic(green, t, window, "stationary_pair");
  require_off_minus_caustic(green, t, window);
  gp_t_ = green.plus(t).value;
  gm_t_ = green.minus(t).value;
}

PairSample TrajectoryPair::at(double s) const {
  if (!(s >= 0.0 && s <= t_)) throw ParameterError("pair evaluation needs s in [0, t]");
  const GreenValue gm_rev = green_.minus(t_ - s);
  const GreenValue gp_rev = green_.plus(t_ - s);
  const GreenValue gp = green_.plus(s);
  const GreenValue gm = green_.minus(s);
  PairSample out;
  // Derivatives in s flip the sign of odd orders for the reversed argument.
  out.q = qp_ * gm_rev.value / gm_t_ + qpp_ * gp.value / gp_t_;
  out.q_dot = -qp_ * gm_rev.dot / gm_t_ + qpp_ * gp.dot / gp_t_;
  out.q_ddot = qp_ * gm_rev.ddot / gm_t_ + qpp_ * gp.ddot / gp_t_;
  out.qt = qtp_ * gp_rev.value / gp_t_ + qtpp_ * gm.value / gm_t_;
  out.qt_dot = -qtp_ * gp_rev.dot / gp_t_ + qtpp_ * gm.dot / gm_t_;
  out.qt_ddot = qtp_ * gp_rev.ddot / gp_t_ + qtpp_ * gm.ddot / gm_t_;
  // Pin the boundary values exactly.
  if (s == 0.0) {
    out.q = qp_;
    out.qt = qtp_;
  } else if (s == t_) {
    out.q = qpp_;
    out.qt = qtpp_;
  }
  return out;
}

double TrajectoryPair::q_plus(double s) const {
  const PairSample p = at(s);
  return p.q + 0.5 * p.qt;
}

double TrajectoryPair::q_minus(double s) const {
  const PairSample p = at(s);
  return p.q - 0.5 * p.qt;
}

TrajectoryPair stationary_pair(double qp, double qtp, double qpp, double qtpp, double t,
                               const SystemParams& params, const GreenPair& green) {
  return TrajectoryPair(qp, qtp, qpp, qtpp, t, params, green);
}

LiftedPoints phase_space_lift(const TrajectoryPair& pair, double s) {
  const PairSample x = pair.at(s);
  const double m = pair.params().mass;
  LiftedPoints out;
  out.plus = {m * (x.q_dot + 0.5 * x.qt_dot), x.q + 0.5 * x.qt};
  out.minus = {m * (x.q_dot - 0.5 * x.qt_dot), x.q - 0.5 * x.qt};
  out.sum = {m * x.q_dot, x.q};
  return out;
}

double pair_invariant(const TrajectoryPair& pair, double s) {
  const PairSample x = pair.at(s);
  return x.q_dot * x.qt - x.q * x.qt_dot + pair.green().gamma() * x.q * x.qt;
}

double separation_rate(const TrajectoryPair& pair, std::size_t samples) {
  if (samples < 16) throw FitWindowError("separation fit needs at least 16 samples");
  const double t = pair.duration();
  const double m = pair.params().mass;
  std::vector<double> s(samples + 1), d(samples + 1);
  double largest = 0.0;
  for (std::size_t k = 0; k <= samples; ++k) {
    s[k] = t * static_cast<double>(k) / static_cast<double>(samples);
    const PairSample x = pair.at(s[k]);
    d[k] = std::hypot(m * x.qt_dot, x.qt);
    largest = std::max(largest, d[k]);
  }
  if (!(largest > 0.0)) throw FitWindowError("the pair has no separation to fit");
  for (std::size_t k = 0; k <= samples; ++k) {
    if (d[k] < 1e-12 * largest) {
      std::ostringstream os;
      os << "separation nearly vanishes at s = " << s[k] << "; shift the fit window";
      throw FitWindowError(os.str());
    }
  }
  // Envelope from peak-to-peak maxima, ignoring peaks that are rounding noise.
  std::vector<double> xs, ys;
  for (std::size_t k = 1; k < samples; ++k) {
    if (d[k] > d[k - 1] && d[k] >= d[k + 1] && d[k] - std::min(d[k - 1], d[k + 1]) >
                                                   1e-9 * d[k]) {
      xs.push_back(s[k]);
      ys.push_back(std::log(d[k]));
    }
  }
  if (xs.size() >= 3) return slope(xs, ys);
  xs.clear();
  ys.clear();
  for (std::size_t k = samples / 2; k <= samples; ++k) {
    xs.push_back(s[k]);
    ys.push_back(std::log(d[k]));
  }
  return slope(xs, ys);
}

}  // namespace wqbm
