#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <vector>

namespace testsupport {

/// Fourth-order central differences of f at x with step h.
inline double d1(const std::function<double(double)>& f, double x, double h) {
  return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12 * h);
}

inline double d2(const std::function<double(double)>& f, double x, double h) {
  return (-f(x + 2 * h) + 16 * f(x + h) - 30 * f(x) + 16 * f(x - h) - f(x - 2 * h)) / (12 * h * h);
}

/// Classical RK4 for q'' + gamma q' + w0^2 q = 0 from (q, v).
inline std::array<double, 2> rk4_damped(double gamma, double w0, double q, double v, double t,
                                        int steps) {
  const double h = t / steps;
  auto f = [&](double x, double y) -> std::array<double, 2> {
    return {y, -gamma * y - w0 * w0 * x};
  };
  for (int i = 0; i < steps; ++i) {
    const auto k1 = f(q, v);
    const auto k2 = f(q + 0.5 * h * k1[0], v + 0.5 * h * k1[1]);
    const auto k3 = f(q + 0.5 * h * k2[0], v + 0.5 * h * k2[1]);
    const auto k4 = f(q + h * k3[0], v + h * k3[1]);
    q += h / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]);
    v += h / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]);
  }
  return {q, v};
}

/// n-point Gauss-Legendre nodes and weights on [a, b] by Newton iteration.
struct GaussLegendre {
  std::vector<double> x, w;
  GaussLegendre(int n, double a, double b) {
    x.resize(n);
    w.resize(n);
    for (int i = 0; i < n; ++i) {
      double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
      double dp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = z;
        for (int k = 2; k <= n; ++k) {
          const double p2 = ((2 * k - 1) * z * p1 - (k - 1) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = n * (z * p1 - p0) / (z * z - 1);
        const double dz = p1 / dp;
        z -= dz;
        if (std::abs(dz) < 1e-16) break;
      }
      x[i] = 0.5 * (a + b) + 0.5 * (b - a) * z;
      w[i] = (b - a) / ((1 - z * z) * dp * dp);
    }
  }
};

}  // namespace testsupport
