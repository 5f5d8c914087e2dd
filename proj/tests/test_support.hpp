#pragma once

// Test-only oracles. Nothing here calls into the solver; these are the
// independent references the solver is checked against.

#include "pass/model_core.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

namespace pass::testing {

/// Centered data with columns scaled to (1/n) x_j'x_j = 1, so the solver's
/// internal scaling is the identity and the objective is literal.
inline Dataset standardized_dataset(Index n, Index p, double rho, const Vector& beta,
                                    double noise, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  Dataset d;
  d.x.resize(n, p);
  for (Index i = 0; i < n; ++i) {
    d.x(i, 0) = z(rng);
    for (Index j = 1; j < p; ++j)
      d.x(i, j) = rho * d.x(i, j - 1) + std::sqrt(1 - rho * rho) * z(rng);
  }
  for (Index j = 0; j < p; ++j) {
    d.x.col(j).array() -= d.x.col(j).mean();
    d.x.col(j) *= std::sqrt(static_cast<double>(n)) / d.x.col(j).norm();
  }
  d.y = d.x * beta;
  for (Index i = 0; i < n; ++i) d.y(i) += noise * z(rng);
  d.y.array() -= d.y.mean();
  return d;
}

/// SCAD penalty re-derived by integrating its derivative piece by piece.
inline double scad_value_oracle(double theta, double lambda, double a) {
  theta = std::fabs(theta);
  if (theta <= lambda) return lambda * theta;
  const double upper = std::min(theta, a * lambda);
  const double middle =
      (a * lambda * (upper - lambda) - 0.5 * (upper * upper - lambda * lambda)) / (a - 1.0);
  return lambda * lambda + middle;
}

/// SCAD derivative, for quadrature checks.
inline double scad_derivative(double theta, double lambda, double a) {
  if (theta <= lambda) return lambda;
  return std::max(a * lambda - theta, 0.0) / (a - 1.0);
}

/// Gram-form objective (1/n)||y - X b||^2 + sum pen(|b_j|) on standardized data.
struct ObjectiveOracle {
  Matrix gram;
  Vector xty;
  double yty = 0.0;
  PenaltyKind kind = PenaltyKind::Lasso;
  double lambda = 0.0;
  double a = 3.7;
  Vector weights;  // adaptive only

  ObjectiveOracle(const Dataset& d, PenaltyKind k, double lam, double a_ = 3.7,
                  Vector w = {})
      : kind(k), lambda(lam), a(a_), weights(std::move(w)) {
    const double n = static_cast<double>(d.n());
    gram = d.x.transpose() * d.x / n;
    xty = d.x.transpose() * d.y / n;
    yty = d.y.squaredNorm() / n;
    if (weights.size() == 0) weights = Vector::Ones(d.p());
  }

  double penalty(Index j, double b) const {
    switch (kind) {
      case PenaltyKind::Lasso: return lambda * std::fabs(b);
      case PenaltyKind::AdaptiveLasso: return lambda * weights(j) * std::fabs(b);
      case PenaltyKind::Scad: return 2.0 * scad_value_oracle(b, lambda, a);
    }
    return 0.0;
  }

  double operator()(const Vector& b) const {
    double v = yty - 2.0 * xty.dot(b) + b.dot(gram * b);
    for (Index j = 0; j < b.size(); ++j) v += penalty(j, b(j));
    return v;
  }
};

/// Minimum of the oracle over a grid with the given step on [lo, hi]^p,
/// p <= 3. Returns the minimizing point through `arg`.
inline double grid_minimum(const ObjectiveOracle& f, Index p, const Vector& lo,
                           const Vector& hi, double step, Vector& arg) {
  long cnt[3] = {1, 1, 1};
  double l[3] = {0, 0, 0};
  for (Index j = 0; j < p; ++j) {
    cnt[j] = static_cast<long>(std::floor((hi(j) - lo(j)) / step + 1e-9)) + 1;
    l[j] = lo(j);
  }
  double g[3][3] = {}, c[3] = {};
  for (Index j = 0; j < p; ++j) {
    c[j] = f.xty(j);
    for (Index k = 0; k < p; ++k) g[j][k] = f.gram(j, k);
  }
  double best = std::numeric_limits<double>::infinity();
  double arg_b[3] = {0, 0, 0};
  for (long i0 = 0; i0 < cnt[0]; ++i0) {
    const double b0 = l[0] + step * static_cast<double>(i0);
    const double t0 = f.yty - 2 * c[0] * b0 + g[0][0] * b0 * b0 + f.penalty(0, b0);
    for (long i1 = 0; i1 < cnt[1]; ++i1) {
      const double b1 = p > 1 ? l[1] + step * static_cast<double>(i1) : 0.0;
      const double t1 = p > 1 ? t0 - 2 * c[1] * b1 + g[1][1] * b1 * b1 +
                                    2 * g[0][1] * b0 * b1 + f.penalty(1, b1)
                              : t0;
      for (long i2 = 0; i2 < cnt[2]; ++i2) {
        double v = t1;
        double b2 = 0.0;
        if (p > 2) {
          b2 = l[2] + step * static_cast<double>(i2);
          v += -2 * c[2] * b2 + g[2][2] * b2 * b2 + 2 * g[0][2] * b0 * b2 +
               2 * g[1][2] * b1 * b2 + f.penalty(2, b2);
        }
        if (v < best) {
          best = v;
          arg_b[0] = b0;
          arg_b[1] = b1;
          arg_b[2] = b2;
        }
      }
    }
  }
  arg = Vector::Zero(p);
  for (Index j = 0; j < p; ++j) arg(j) = arg_b[j];
  return best;
}

/// Max KKT violation for LASSO-type fits on standardized data:
/// |(2/n) x_j'r| <= lambda*w_j when b_j = 0, = lambda*w_j*sign(b_j) otherwise.
inline double kkt_violation(const Dataset& d, const Vector& beta, double lambda,
                            const Vector& w) {
  const Vector grad = 2.0 * d.x.transpose() * (d.y - d.x * beta) / static_cast<double>(d.n());
  double worst = 0.0;
  for (Index j = 0; j < d.p(); ++j) {
    const double bound = lambda * w(j);
    const double v = beta(j) == 0.0 ? std::max(0.0, std::fabs(grad(j)) - bound)
                                     : std::fabs(grad(j) - bound * (beta(j) > 0 ? 1.0 : -1.0));
    worst = std::max(worst, v);
  }
  return worst;
}

}  // namespace pass::testing
