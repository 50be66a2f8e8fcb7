#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "wqbm/errors.hpp"
#include "wqbm/kernels.hpp"

namespace wqbm::detail {

/// Sums term(n), n = 1, 2, ..., of a series whose terms past `asymptotic_from`
/// are bounded by |term(n)| (n / k)^power x^(k - n) for k > n. The tail after n
/// terms is then at most |term(n)| min(x / (1 - x), n / (power - 1)).
/// `base` is added to the partial sum before the relative test.
template <class Term>
SeriesValue matsubara_sum(Term&& term, double x, double power, std::size_t asymptotic_from,
                          double base, double abs_floor, const MatsubaraOptions& opts,
                          const char* what) {
  const auto tail_bound = [&](double last, std::size_t n) {
    double factor = std::numeric_limits<double>::infinity();
    if (x < 1.0) factor = x / (1.0 - x);
    if (power > 1.0) factor = std::min(factor, static_cast<double>(n) / (power - 1.0));
    return std::abs(last) * factor;
  };
  const std::size_t cap = opts.order > 0 ? opts.order : opts.max_terms;
  // Without exponential damping (x = 1) the power-law tail is summed in closed form:
  // term(n) ~ C / n^power, with the error judged by how much C still drifts between
  // n / 2 and n.
  const auto zeta_tail = [&](double N) {
    const double p = power;
    return std::pow(N, 1.0 - p) / (p - 1.0) - 0.5 * std::pow(N, -p) +
           p * std::pow(N, -p - 1.0) / 12.0 - p * (p + 1.0) * (p + 2.0) * std::pow(N, -p - 3.0) / 720.0;
  };
  const bool power_tail = x == 1.0 && power > 1.0 && opts.order == 0;
  double coeff_half = std::numeric_limits<double>::quiet_NaN();
  std::size_t next_check = 64;

  double sum = 0.0;
  double last = 0.0;
  std::size_t n = 0;
  double tail = std::numeric_limits<double>::infinity();
  while (n < cap) {
    ++n;
    last = term(n);
    sum += last;
    if (n >= asymptotic_from) {
      tail = tail_bound(last, n);
      const double tol = opts.rel_tol * std::max(std::abs(base + sum), abs_floor);
      if (opts.order == 0 && tail <= tol) return {base + sum, n, tail};
      while (power_tail && next_check < n) next_check *= 2;
      if (power_tail && n == next_check) {
        next_check *= 2;
        const double N = static_cast<double>(n);
        const double coeff = last * std::pow(N, power);
        const double z = zeta_tail(N);
        const double err = 2.0 * z * std::abs(coeff - coeff_half);
        coeff_half = coeff;
        const double corrected = base + sum + coeff * z;
        if (err <= opts.rel_tol * std::max(std::abs(corrected), abs_floor)) {
          return {corrected, n, err};
        }
      }
    }
  }
  if (n < asymptotic_from) tail = std::numeric_limits<double>::infinity();
  const double tol = opts.rel_tol * std::max(std::abs(base + sum), abs_floor);
  if (!(tail <= tol)) {
    std::ostringstream os;
    os << what << ": Matsubara tail estimate " << tail << " exceeds tolerance " << tol
       << " after " << n << " terms";
    throw ConvergenceError(os.str());
  }
  return {base + sum, n, tail};
}

}  // namespace wqbm::detail
