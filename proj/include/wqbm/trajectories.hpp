#pragma once

#include <cstddef>

#include "wqbm/model.hpp"

namespace wqbm {

/// Sum/difference coordinates and their first two derivatives at one time.
struct PairSample {
  double q = 0.0;
  double q_dot = 0.0;
  double q_ddot = 0.0;
  double qt = 0.0;  ///< difference coordinate q~ = q+ - q-
  double qt_dot = 0.0;
  double qt_ddot = 0.0;
};

/// Stationary pair of the strict-Ohmic influence functional on [0, t]:
///   q(s)  = q'  G-(t-s)/G-(t) + q''  G+(s)/G+(t)    (damped)
///   q~(s) = q~' G+(t-s)/G+(t) + q~'' G-(s)/G-(t)    (anti-damped)
/// with q+- = q +- q~/2. Closed-form evaluators only.
class TrajectoryPair {
 public:
  TrajectoryPair(double qp, double qtp, double qpp, double qtpp, double t,
                 const SystemParams& params, const GreenPair& green);

  double duration() const { return t_; }
  double q_initial() const { return qp_; }
  double q_final() const { return qpp_; }
  double qt_initial() const { return qtp_; }
  double qt_final() const { return qtpp_; }
  const SystemParams& params() const { return params_; }
  const GreenPair& green() const { return green_; }

  /// Requires s in [0, t].
  PairSample at(double s) const;
  double q_plus(double s) const;
  double q_minus(double s) const;

 private:
  double qp_, qtp_, qpp_, qtpp_, t_;
  SystemParams params_;
  GreenPair green_;
  double gp_t_ = 1.0;  // G+(t)
  double gm_t_ = 1.0;  // G-(t)
};

/// Throws CausticError when t lies at a zero of G+ or G-.
TrajectoryPair stationary_pair(double qp, double qtp, double qpp, double qtpp, double t,
                               const SystemParams& params, const GreenPair& green);

struct LiftedPoints {
  PhasePoint plus;
  PhasePoint minus;
  PhasePoint sum;  ///< (r+ + r-) / 2
};

/// r+- = (m dq+-/ds, q+-).
LiftedPoints phase_space_lift(const TrajectoryPair& pair, double s);

/// dq/ds q~ - q dq~/ds + gamma q q~, conserved along the pair.
double pair_invariant(const TrajectoryPair& pair, double s);

/// Growth rate of |r+ - r-| from a least-squares fit of the log of its local
/// maxima (or of the whole second half of the window when it does not
/// oscillate). Throws FitWindowError when |r+ - r-| nearly vanishes inside
/// the window or too few samples remain.
double separation_rate(const TrajectoryPair& pair, std::size_t samples = 4000);

}  // namespace wqbm
