#include "wqbm/evolution.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "wqbm/errors.hpp"
#include "wqbm/parallel.hpp"

namespace wqbm {

namespace {

double trapezoid_weight(std::size_t i, std::size_t n) { return (i == 0 || i + 1 == n) ? 0.5 : 1.0; }

}  // namespace

GridWigner GridWigner::zeros(double p0, double dp, std::size_t np, double q0, double dq,
                             std::size_t nq) {
  GridWigner g{p0, dp, np, q0, dq, nq, std::vector<double>(np * nq, 0.0)};
  g.validate();
  return g;
}

GridWigner GridWigner::gaussian(const GaussianWigner& state, double p0, double dp, std::size_t np,
                                double q0, double dq, std::size_t nq) {
  GridWigner g = zeros(p0, dp, np, q0, dq, nq);
  const double det = state.cov.determinant();
  if (!(det > 0.0)) throw DegenerateCovarianceError("Gaussian state has singular covariance");
  const Matrix2 inv = state.cov.inverse();
  const double norm = 1.0 / (2.0 * std::numbers::pi * std::sqrt(det));
  for (std::size_t i = 0; i < np; ++i) {
    for (std::size_t j = 0; j < nq; ++j) {
      const Vector2 d{g.p(i) - state.mean.p, g.q(j) - state.mean.q};
      g.at(i, j) = norm * std::exp(-0.5 * d.dot(inv * d));
    }
  }
  return g;
}

void GridWigner::validate() const {
  if (!(dp > 0.0) || !(dq > 0.0) || np < 2 || nq < 2 || values.size() != np * nq) {
    throw ParameterError("grid needs positive spacings, at least 2x2 cells and matching values");
  }
}

GaussianWigner evolve_gaussian(const GaussianWigner& state, const CovarianceData& cov,
                               const Matrix2& map) {
  GaussianWigner out;
  out.mean = PhasePoint::from(map * state.mean.vec());
  out.cov = map * state.cov * map.transpose() + cov.kernel_cov;
  out.cov = 0.5 * (out.cov + out.cov.transpose()).eval();
  return out;
}

GridWigner evolve_grid(const GridWigner& state, const CovarianceData& cov, const Matrix2& map) {
  state.validate();
  const Matrix2 scale = Vector2{1.0 / state.dp, 1.0 / state.dq}.asDiagonal();
  const Matrix2 scaled = scale * cov.kernel_cov * scale;
  Eigen::SelfAdjointEigenSolver<Matrix2> es(scaled);
  const double smallest = es.eigenvalues().minCoeff();
  if (!(smallest >= 4.0)) {
    std::ostringstream os;
    os << "kernel covariance spans " << std::sqrt(std::max(smallest, 0.0))
       << " cells in its narrowest direction (need 2); refine the grid or propagate moments "
          "with evolve_gaussian";
    throw UnderresolvedKernelError(os.str());
  }
  const Matrix2 inv = cov.kernel_cov.inverse();
  const double norm = 1.0 / (2.0 * std::numbers::pi * std::sqrt(cov.kernel_cov.determinant()));
  const double cell = state.dp * state.dq;

  // Source cells carrying weight, with their images M r'.
  struct Source {
    Vector2 image;
    double weight;
  };
  std::vector<Source> sources;
  sources.reserve(state.values.size());
  for (std::size_t i = 0; i < state.np; ++i) {
    for (std::size_t j = 0; j < state.nq; ++j) {
      const double w = state.at(i, j) * cell * trapezoid_weight(i, state.np) *
                       trapezoid_weight(j, state.nq);
      if (w != 0.0) sources.push_back({map * Vector2{state.p(i), state.q(j)}, w});
    }
  }

  GridWigner out = GridWigner::zeros(state.p0, state.dp, state.np, state.q0, state.dq, state.nq);
  // One destination row per task; each sum runs in a fixed order.
  parallel_for(out.np, [&](std::size_t i) {
    for (std::size_t j = 0; j < out.nq; ++j) {
      const Vector2 r{out.p(i), out.q(j)};
      double acc = 0.0;
      for (const auto& src : sources) {
        const Vector2 d = r - src.image;
        acc += src.weight * std::exp(-0.5 * d.dot(inv * d));
      }
      out.at(i, j) = norm * acc;
    }
  });
  return out;
}

GridMoments moments(const GridWigner& state) {
  state.validate();
  GridMoments m;
  double sp = 0.0, sq = 0.0, spp = 0.0, spq = 0.0, sqq = 0.0;
  const double cell = state.dp * state.dq;
  for (std::size_t i = 0; i < state.np; ++i) {
    for (std::size_t j = 0; j < state.nq; ++j) {
      const double w = state.at(i, j) * cell * trapezoid_weight(i, state.np) *
                       trapezoid_weight(j, state.nq);
      const double p = state.p(i);
      const double q = state.q(j);
      m.mass += w;
      sp += w * p;
      sq += w * q;
      spp += w * p * p;
      spq += w * p * q;
      sqq += w * q * q;
    }
  }
  m.mean = {sp / m.mass, sq / m.mass};
  const double cpq = spq / m.mass - m.mean.p * m.mean.q;
  m.cov << spp / m.mass - m.mean.p * m.mean.p, cpq, cpq, sqq / m.mass - m.mean.q * m.mean.q;
  return m;
}

double semigroup_deviation(const GaussianWigner& state, const CovarianceData& cov1,
                           const Matrix2& map1, const CovarianceData& cov2, const Matrix2& map2,
                           const CovarianceData& cov12, const Matrix2& map12) {
  const GaussianWigner two = evolve_gaussian(evolve_gaussian(state, cov1, map1), cov2, map2);
  const GaussianWigner one = evolve_gaussian(state, cov12, map12);
  return (two.cov - one.cov).cwiseAbs().maxCoeff();
}

}  // namespace wqbm
