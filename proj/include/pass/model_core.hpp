#pragma once

// Penalized least squares for LASSO, adaptive LASSO and SCAD.
//
// The objective is
//
//     (1/n) * ||y - X*gamma||^2 + sum_j pen_lambda(|gamma_j|)
//
// on centered data with no intercept. The solver works on columns scaled so
// that (1/n) * x_j' x_j = 1 and reports coefficients on the centered,
// unscaled columns. With unit-scaled columns the coordinate-wise problem is
//
//     min_b (b - z)^2 + pen_lambda(|b|)
//
// which is why the LASSO threshold is lambda/2 rather than lambda.
//
// SCAD is parameterized the Fan-Li way, against half the squared loss:
// pen_lambda = 2 * scad_lambda, so its zero threshold is lambda and the
// unpenalized region starts at a*lambda.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace pass {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// ---------------------------------------------------------------------------
// errors

struct NonFiniteError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct StandardizationError : std::runtime_error {
  StandardizationError(Index col, const std::string& name)
      : std::runtime_error("cannot standardize column '" + name +
                           "': zero variance"),
        column(col) {}
  Index column;
};

struct RankDeficientError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A failure inside a path fit, tagged with the lambda that caused it.
struct PathError : std::runtime_error {
  PathError(double lam, const std::string& what)
      : std::runtime_error(format(lam, what)), lambda(lam) {}
  double lambda;

 private:
  static std::string format(double lam, const std::string& what) {
    std::ostringstream os;
    os << "at lambda=" << lam << ": " << what;
    return os.str();
  }
};

// ---------------------------------------------------------------------------
// data model

struct Dataset {
  Matrix x;
  Vector y;
  std::vector<std::string> names;  // optional, one per column of x

  Index n() const { return x.rows(); }
  Index p() const { return x.cols(); }

  std::string column_name(Index j) const {
    if (static_cast<std::size_t>(j) < names.size()) return names[j];
    return "x" + std::to_string(j);
  }
};

inline void validate(const Dataset& d) {
  if (d.y.size() != d.x.rows())
    throw std::invalid_argument("dataset: y length does not match rows of x");
  if (d.n() < 2) throw std::invalid_argument("dataset: need n >= 2");
  if (d.p() < 1) throw std::invalid_argument("dataset: need p >= 1");
  if (!d.names.empty() && d.names.size() != static_cast<std::size_t>(d.p()))
    throw std::invalid_argument("dataset: names length does not match p");
}

struct CenteringInfo {
  Vector x_mean;
  double y_mean = 0.0;

  /// Map a prediction from the centered scale back to the raw scale.
  double to_raw(double centered_prediction) const {
    return centered_prediction + y_mean;
  }
};

inline std::pair<Dataset, CenteringInfo> center_data(const Dataset& raw) {
  validate(raw);
  if (!raw.x.allFinite() || !raw.y.allFinite())
    throw NonFiniteError("center_data: non-finite input entry");
  CenteringInfo info;
  info.x_mean = raw.x.colwise().mean().transpose();
  info.y_mean = raw.y.mean();
  Dataset out;
  out.x = raw.x.rowwise() - info.x_mean.transpose();
  out.y = raw.y.array() - info.y_mean;
  out.names = raw.names;
  return {std::move(out), std::move(info)};
}

/// Rows of `d` picked by `rows`, in that order. No re-centering.
inline Dataset subset(const Dataset& d, const std::vector<Index>& rows) {
  Dataset out;
  out.x.resize(static_cast<Index>(rows.size()), d.p());
  out.y.resize(static_cast<Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.x.row(static_cast<Index>(i)) = d.x.row(rows[i]);
    out.y(static_cast<Index>(i)) = d.y(rows[i]);
  }
  out.names = d.names;
  return out;
}

enum class PenaltyKind { Lasso, AdaptiveLasso, Scad };

inline const char* to_string(PenaltyKind k) {
  switch (k) {
    case PenaltyKind::Lasso: return "LASSO";
    case PenaltyKind::AdaptiveLasso: return "aLASSO";
    case PenaltyKind::Scad: return "SCAD";
  }
  return "?";
}

struct PenaltySpec {
  PenaltyKind kind = PenaltyKind::Lasso;
  double a = 3.7;
  // Adaptive LASSO weights on the centered scale: pen = lambda * w_j * |g_j|.
  // +infinity forces that coefficient to zero. Left empty, the weights are
  // computed as 1/|OLS_j| from whatever data the penalty is fit on.
  Vector weights;

  static PenaltySpec lasso() { return {PenaltyKind::Lasso, 3.7, {}}; }
  static PenaltySpec scad(double a = 3.7) { return {PenaltyKind::Scad, a, {}}; }
  static PenaltySpec adaptive_lasso(Vector w = {}) {
    return {PenaltyKind::AdaptiveLasso, 3.7, std::move(w)};
  }
};

inline void validate(const PenaltySpec& s, Index p) {
  if (s.kind == PenaltyKind::Scad && !(s.a > 2.0))
    throw std::invalid_argument("SCAD requires a > 2");
  if (s.kind == PenaltyKind::AdaptiveLasso && s.weights.size() != 0) {
    if (s.weights.size() != p)
      throw std::invalid_argument("adaptive weights length does not match p");
    for (Index j = 0; j < p; ++j) {
      double w = s.weights(j);
      if (std::isnan(w) || w < 0.0)
        throw std::invalid_argument("adaptive weights must be >= 0");
    }
  }
}

struct Coefficients {
  Vector beta;
  double lambda = 0.0;
  int iterations = 0;
  bool converged = true;
};

class SupportSet {
 public:
  SupportSet() = default;
  SupportSet(std::vector<Index> indices, Index p)
      : indices_(std::move(indices)), p_(p) {
    if (p_ < 0) throw std::invalid_argument("support: negative p");
    for (std::size_t i = 0; i < indices_.size(); ++i) {
      if (indices_[i] < 0 || indices_[i] >= p_)
        throw std::invalid_argument("support: index out of range");
      if (i > 0 && indices_[i] <= indices_[i - 1])
        throw std::invalid_argument("support: indices not strictly increasing");
    }
  }

  static SupportSet full(Index p) {
    std::vector<Index> idx(static_cast<std::size_t>(p));
    for (Index j = 0; j < p; ++j) idx[static_cast<std::size_t>(j)] = j;
    return {std::move(idx), p};
  }

  const std::vector<Index>& indices() const { return indices_; }
  Index p() const { return p_; }
  Index size() const { return static_cast<Index>(indices_.size()); }
  bool empty() const { return indices_.empty(); }
  bool is_full() const { return size() == p_; }
  bool contains(Index j) const {
    return std::binary_search(indices_.begin(), indices_.end(), j);
  }

  friend bool operator==(const SupportSet&, const SupportSet&) = default;

 private:
  std::vector<Index> indices_;
  Index p_ = 0;
};

struct FitOptions {
  double tol = 1e-7;
  int max_iter = 10000;
  double zero_tol = 1e-8;
};

inline void validate(const FitOptions& o) {
  if (!(o.tol > 0.0)) throw std::invalid_argument("fit options: tol must be > 0");
  if (o.max_iter < 1) throw std::invalid_argument("fit options: max_iter must be >= 1");
  if (!(o.zero_tol >= 0.0))
    throw std::invalid_argument("fit options: zero_tol must be >= 0");
}

// ---------------------------------------------------------------------------
// univariate solutions

inline double soft_threshold(double z, double t) {
  if (std::fabs(z) <= t) return 0.0;
  return z > 0.0 ? z - t : z + t;
}

/// SCAD penalty value at theta >= 0.
inline double scad_penalty(double theta, double lambda, double a) {
  if (theta <= lambda) return lambda * theta;
  if (theta <= a * lambda)
    return (2.0 * a * lambda * theta - theta * theta - lambda * lambda) /
           (2.0 * (a - 1.0));
  return (a + 1.0) * lambda * lambda / 2.0;
}

/// argmin_b (1/2)(b - z)^2 + scad(|b|), the Fan-Li thresholding rule.
/// Convex in b for a > 2, so the piecewise stationary point is global:
///   |z| <= lambda            -> 0
///   |z| <= 2*lambda          -> z -/+ lambda
///   |z| <= a*lambda          -> ((a-1)z -/+ a*lambda) / (a - 2)
///   otherwise                -> z
inline double scad_univariate(double z, double lambda, double a) {
  const double az = std::fabs(z);
  const double s = z < 0.0 ? -1.0 : 1.0;
  if (az <= lambda) return 0.0;
  if (az <= 2.0 * lambda) return s * (az - lambda);
  if (az <= a * lambda) return s * ((a - 1.0) * az - a * lambda) / (a - 2.0);
  return z;
}

// ---------------------------------------------------------------------------
// least squares

inline Coefficients ols_fit(const Dataset& data, const SupportSet& support) {
  if (support.p() != data.p())
    throw std::invalid_argument("ols_fit: support dimension does not match p");
  Coefficients out;
  out.beta = Vector::Zero(data.p());
  if (support.empty()) return out;
  if (support.size() > data.n())
    throw RankDeficientError("ols_fit: more selected columns than observations");
  Matrix xs(data.n(), support.size());
  for (Index k = 0; k < support.size(); ++k)
    xs.col(k) = data.x.col(support.indices()[static_cast<std::size_t>(k)]);
  Eigen::ColPivHouseholderQR<Matrix> qr(xs);
  if (qr.rank() < support.size())
    throw RankDeficientError("ols_fit: selected columns are rank deficient");
  Vector b = qr.solve(data.y);
  if (!b.allFinite()) throw NonFiniteError("ols_fit: non-finite solution");
  for (Index k = 0; k < support.size(); ++k)
    out.beta(support.indices()[static_cast<std::size_t>(k)]) = b(k);
  return out;
}

inline SupportSet active_set(const Coefficients& coef, double zero_tol) {
  std::vector<Index> idx;
  for (Index j = 0; j < coef.beta.size(); ++j)
    if (std::fabs(coef.beta(j)) > zero_tol) idx.push_back(j);
  return {std::move(idx), coef.beta.size()};
}

// ---------------------------------------------------------------------------
// coordinate descent

namespace detail {

// Sufficient statistics of the unit-scaled problem.
struct ScaledProblem {
  Matrix gram;  // X~' X~ / n, unit diagonal
  Vector xty;   // X~' y / n
  Vector scale; // sqrt(x_j' x_j / n)
};

inline ScaledProblem make_problem(const Dataset& data) {
  validate(data);
  if (!data.x.allFinite() || !data.y.allFinite())
    throw NonFiniteError("fit: non-finite data");
  const double n = static_cast<double>(data.n());
  ScaledProblem prob;
  prob.scale = (data.x.colwise().squaredNorm().array() / n).sqrt().transpose();
  for (Index j = 0; j < data.p(); ++j)
    if (!(prob.scale(j) > 0.0))
      throw StandardizationError(j, data.column_name(j));
  const Vector inv = prob.scale.cwiseInverse();
  prob.gram = inv.asDiagonal() * (data.x.transpose() * data.x / n) * inv.asDiagonal();
  prob.gram.diagonal().setOnes();
  prob.xty = inv.asDiagonal() * (data.x.transpose() * data.y / n);
  return prob;
}

// Per-coordinate penalty multipliers on the unit-scaled coefficients.
// +inf marks a coordinate pinned at zero.
inline Vector scaled_weights(const Dataset& data, const PenaltySpec& pen,
                             const Vector& scale) {
  const Index p = data.p();
  if (pen.kind != PenaltyKind::AdaptiveLasso) return Vector::Ones(p);
  Vector w = pen.weights;
  if (w.size() == 0) {
    Coefficients init = ols_fit(data, SupportSet::full(p));
    w.resize(p);
    for (Index j = 0; j < p; ++j)
      w(j) = init.beta(j) == 0.0 ? std::numeric_limits<double>::infinity()
                                 : 1.0 / std::fabs(init.beta(j));
  }
  // lambda * w_j * |g_j| = lambda * (w_j / s_j) * |b_j| with b_j = s_j g_j
  return w.cwiseQuotient(scale);
}

inline double coordinate_update(PenaltyKind kind, double z, double lambda,
                                double w, double a) {
  switch (kind) {
    case PenaltyKind::Scad: return scad_univariate(z, lambda, a);
    case PenaltyKind::Lasso:
    case PenaltyKind::AdaptiveLasso: return soft_threshold(z, 0.5 * lambda * w);
  }
  return 0.0;
}

// Cyclic coordinate descent with covariance updates. `b` holds the unit-scaled
// coefficients and is updated in place. Returns (sweeps, converged).
inline std::pair<int, bool> solve(const ScaledProblem& prob, const Vector& w,
                                  const PenaltySpec& pen, double lambda,
                                  const FitOptions& opts, Vector& b) {
  const Index p = prob.xty.size();
  for (Index j = 0; j < p; ++j)
    if (std::isinf(w(j))) b(j) = 0.0;
  Vector grad = prob.xty - prob.gram * b;
  bool refreshed = false;
  for (int it = 1; it <= opts.max_iter; ++it) {
    double max_delta = 0.0;
    for (Index j = 0; j < p; ++j) {
      if (std::isinf(w(j))) continue;
      const double z = grad(j) + b(j);
      const double next = coordinate_update(pen.kind, z, lambda, w(j), pen.a);
      const double delta = next - b(j);
      if (delta != 0.0) {
        grad.noalias() -= delta * prob.gram.col(j);
        b(j) = next;
        max_delta = std::max(max_delta, std::fabs(delta));
      }
    }
    if (!std::isfinite(max_delta) || !b.allFinite())
      throw NonFiniteError("coordinate descent produced a non-finite value");
    if (max_delta < opts.tol) {
      // One confirming sweep against a freshly computed gradient.
      if (refreshed) return {it, true};
      grad = prob.xty - prob.gram * b;
      refreshed = true;
    } else {
      refreshed = false;
    }
  }
  return {opts.max_iter, false};
}

}  // namespace detail

/// Penalized objective evaluated on the centered scale, using the same
/// column scaling the solver applies.
inline double penalized_objective(const Dataset& data, const PenaltySpec& pen,
                                  double lambda, const Vector& beta) {
  const auto prob = detail::make_problem(data);
  const Vector w = detail::scaled_weights(data, pen, prob.scale);
  const double n = static_cast<double>(data.n());
  double value = (data.y - data.x * beta).squaredNorm() / n;
  for (Index j = 0; j < data.p(); ++j) {
    const double bj = std::fabs(beta(j)) * prob.scale(j);
    if (pen.kind == PenaltyKind::Scad) {
      value += 2.0 * scad_penalty(bj, lambda, pen.a);
    } else if (std::isinf(w(j))) {
      if (bj != 0.0) return std::numeric_limits<double>::infinity();
    } else {
      value += lambda * w(j) * bj;
    }
  }
  return value;
}

inline Coefficients fit_penalized(const Dataset& data, const PenaltySpec& penalty,
                                  double lambda, const FitOptions& opts,
                                  const std::optional<Coefficients>& warm = std::nullopt) {
  validate(opts);
  validate(penalty, data.p());
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw std::invalid_argument("fit_penalized: lambda must be finite and >= 0");
  const auto prob = detail::make_problem(data);
  const Vector w = detail::scaled_weights(data, penalty, prob.scale);
  Vector b = Vector::Zero(data.p());
  if (warm) {
    if (warm->beta.size() != data.p())
      throw std::invalid_argument("fit_penalized: warm start has wrong length");
    b = warm->beta.cwiseProduct(prob.scale);
  }
  auto [iters, ok] = detail::solve(prob, w, penalty, lambda, opts, b);
  Coefficients out;
  out.beta = b.cwiseQuotient(prob.scale);
  out.lambda = lambda;
  out.iterations = iters;
  out.converged = ok;
  return out;
}

/// Fits every grid point, sweeping from the largest lambda to the smallest
/// with warm starts. Results are returned in the grid's own order.
inline std::vector<Coefficients> fit_path(const Dataset& data,
                                          const PenaltySpec& penalty,
                                          const std::vector<double>& grid,
                                          const FitOptions& opts) {
  validate(opts);
  validate(penalty, data.p());
  if (grid.empty()) throw std::invalid_argument("fit_path: empty grid");
  const bool decreasing = grid.size() < 2 || grid[0] > grid[1];
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (!(grid[k] >= 0.0) || !std::isfinite(grid[k]))
      throw std::invalid_argument("fit_path: lambda must be finite and >= 0");
    if (k > 0 && (decreasing ? !(grid[k] < grid[k - 1]) : !(grid[k] > grid[k - 1])))
      throw std::invalid_argument("fit_path: grid must be strictly monotone");
  }
  const auto prob = detail::make_problem(data);
  const Vector w = detail::scaled_weights(data, penalty, prob.scale);

  std::vector<Coefficients> path(grid.size());
  Vector b = Vector::Zero(data.p());
  for (std::size_t step = 0; step < grid.size(); ++step) {
    const std::size_t k = decreasing ? step : grid.size() - 1 - step;
    std::pair<int, bool> res;
    try {
      res = detail::solve(prob, w, penalty, grid[k], opts, b);
    } catch (const std::exception& e) {
      throw PathError(grid[k], e.what());
    }
    path[k].beta = b.cwiseQuotient(prob.scale);
    path[k].lambda = grid[k];
    path[k].iterations = res.first;
    path[k].converged = res.second;
  }
  return path;
}

/// {10^(lo + (hi-lo)*k/(count-1))}, k = 0..count-1, increasing.
inline std::vector<double> log_grid(double lo_exp = -2.0, double hi_exp = 2.0,
                                    int count = 100) {
  if (count < 1) throw std::invalid_argument("log_grid: count must be >= 1");
  if (!std::isfinite(lo_exp) || !std::isfinite(hi_exp))
    throw std::invalid_argument("log_grid: exponents must be finite");
  std::vector<double> g(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    const double e = count == 1 ? lo_exp : lo_exp + (hi_exp - lo_exp) * k / (count - 1);
    g[static_cast<std::size_t>(k)] = std::pow(10.0, e);
  }
  return g;
}

}  // namespace pass
