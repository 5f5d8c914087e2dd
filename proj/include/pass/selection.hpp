#pragma once

// Tuning-parameter selection: the PASS stability/prediction ratio and the
// classical competitors (BIC, Cp, GCV, k-fold CV).

#include "pass/model_core.hpp"
#include "pass/parallel.hpp"
#include "pass/random.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace pass {

struct SelectionFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// random half partitions

struct SplitPair {
  std::vector<Index> first;   // floor(n/2) rows
  std::vector<Index> second;  // the remaining rows
};

inline void validate(const SplitPair& s, Index n) {
  if (static_cast<Index>(s.first.size()) != n / 2 ||
      static_cast<Index>(s.first.size() + s.second.size()) != n)
    throw std::invalid_argument("split: sizes do not match floor(n/2), n - floor(n/2)");
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  for (const auto* half : {&s.first, &s.second})
    for (Index i : *half) {
      if (i < 0 || i >= n || seen[static_cast<std::size_t>(i)])
        throw std::invalid_argument("split: halves do not partition 0..n-1");
      seen[static_cast<std::size_t>(i)] = 1;
    }
}

template <class Urbg>
SplitPair random_half_split(Index n, Urbg& rng) {
  if (n < 4) throw std::invalid_argument("random_half_split: need n >= 4");
  std::vector<Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Index{0});
  std::shuffle(perm.begin(), perm.end(), rng);
  const auto m = static_cast<std::ptrdiff_t>(n / 2);
  SplitPair s{{perm.begin(), perm.begin() + m}, {perm.begin() + m, perm.end()}};
  std::sort(s.first.begin(), s.first.end());
  std::sort(s.second.begin(), s.second.end());
  return s;
}

// ---------------------------------------------------------------------------
// agreement and split error

/// Cohen's kappa between two supports viewed as binary labelings of the p
/// covariates. Two empty or two full supports score -1.
inline double cohens_kappa(const SupportSet& a1, const SupportSet& a2) {
  if (a1.p() != a2.p()) throw std::invalid_argument("cohens_kappa: mismatched p");
  const Index p = a1.p();
  if (p < 1) throw std::invalid_argument("cohens_kappa: p must be >= 1");
  if ((a1.empty() && a2.empty()) || (a1.is_full() && a2.is_full())) return -1.0;

  Index both = 0;
  for (Index j : a1.indices())
    if (a2.contains(j)) ++both;
  const Index neither = p - (a1.size() + a2.size() - both);
  const double pd = static_cast<double>(p);
  const double agree = static_cast<double>(both + neither) / pd;
  const double chance =
      (static_cast<double>(a1.size()) * static_cast<double>(a2.size()) +
       static_cast<double>(p - a1.size()) * static_cast<double>(p - a2.size())) /
      (pd * pd);
  // 1 - chance vanishes only for the two degenerate cases handled above.
  return (agree - chance) / (1.0 - chance);
}

/// Each half scored by the model fit on the other half, averaged over n.
inline double cv_error(const Dataset& data, const SplitPair& split,
                       const Coefficients& beta1, const Coefficients& beta2) {
  if (beta1.beta.size() != data.p() || beta2.beta.size() != data.p())
    throw std::invalid_argument("cv_error: coefficient length does not match p");
  double sse = 0.0;
  for (Index i : split.first) {
    const double r = data.y(i) - data.x.row(i).dot(beta2.beta);
    sse += r * r;
  }
  for (Index i : split.second) {
    const double r = data.y(i) - data.x.row(i).dot(beta1.beta);
    sse += r * r;
  }
  if (!std::isfinite(sse)) throw NonFiniteError("cv_error: non-finite prediction");
  return sse / static_cast<double>(data.n());
}

// ---------------------------------------------------------------------------
// PASS

/// Per-lambda kappa and CV for one partition.
struct SplitTrace {
  std::vector<double> kappa;
  std::vector<double> cv;
  int nonconverged = 0;
};

struct PassResult {
  std::vector<double> grid;
  std::vector<double> kappa_sum;
  std::vector<double> cv_sum;
  std::vector<double> score;  // NaN where cv_sum == 0
  double lambda_hat = 0.0;
  std::size_t lambda_hat_index = 0;
  int b_used = 0;
  int nonconverged_fits = 0;
};

inline SplitTrace evaluate_split(const Dataset& data, const PenaltySpec& penalty,
                                 const std::vector<double>& grid,
                                 const SplitPair& split, const FitOptions& opts) {
  validate(split, data.n());
  const auto path1 = fit_path(subset(data, split.first), penalty, grid, opts);
  const auto path2 = fit_path(subset(data, split.second), penalty, grid, opts);
  SplitTrace t;
  t.kappa.resize(grid.size());
  t.cv.resize(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    t.kappa[k] = cohens_kappa(active_set(path1[k], opts.zero_tol),
                              active_set(path2[k], opts.zero_tol));
    t.cv[k] = cv_error(data, split, path1[k], path2[k]);
    t.nonconverged += !path1[k].converged + !path2[k].converged;
  }
  return t;
}

/// Index of the best finite value; ties go to the largest lambda.
inline std::size_t best_index(const std::vector<double>& values,
                              const std::vector<double>& grid, bool maximize) {
  std::size_t best = values.size();
  for (std::size_t k = 0; k < values.size(); ++k) {
    const double v = values[k];
    if (std::isnan(v)) continue;
    if (best == values.size()) {
      best = k;
      continue;
    }
    const double b = values[best];
    const bool better = maximize ? v > b : v < b;
    if (better || (v == b && grid[k] > grid[best])) best = k;
  }
  if (best == values.size())
    throw SelectionFailure("no grid point has a valid criterion value");
  return best;
}

/// Ratio of sums across partitions: score = sum_b kappa / sum_b CV.
inline PassResult aggregate_pass(const std::vector<double>& grid,
                                 const std::vector<SplitTrace>& traces) {
  if (traces.empty()) throw std::invalid_argument("aggregate_pass: no partitions");
  PassResult r;
  r.grid = grid;
  r.b_used = static_cast<int>(traces.size());
  r.kappa_sum.assign(grid.size(), 0.0);
  r.cv_sum.assign(grid.size(), 0.0);
  for (const auto& t : traces) {
    if (t.kappa.size() != grid.size() || t.cv.size() != grid.size())
      throw std::invalid_argument("aggregate_pass: trace length does not match grid");
    for (std::size_t k = 0; k < grid.size(); ++k) {
      r.kappa_sum[k] += t.kappa[k];
      r.cv_sum[k] += t.cv[k];
    }
    r.nonconverged_fits += t.nonconverged;
  }
  const double all_degenerate = -static_cast<double>(traces.size());
  bool any_informative = false;
  r.score.resize(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    r.score[k] = r.cv_sum[k] > 0.0 ? r.kappa_sum[k] / r.cv_sum[k]
                                   : std::numeric_limits<double>::quiet_NaN();
    if (r.kappa_sum[k] != all_degenerate) any_informative = true;
  }
  if (!any_informative)
    throw SelectionFailure("PASS: every partition is degenerate at every lambda");
  r.lambda_hat_index = best_index(r.score, grid, /*maximize=*/true);
  r.lambda_hat = grid[r.lambda_hat_index];
  return r;
}

inline PassResult pass_score_with_splits(const Dataset& data,
                                         const PenaltySpec& penalty,
                                         const std::vector<double>& grid,
                                         const std::vector<SplitPair>& splits,
                                         const FitOptions& opts,
                                         unsigned threads = 1) {
  if (grid.empty()) throw std::invalid_argument("pass_score: empty grid");
  std::vector<SplitTrace> traces(splits.size());
  parallel_for(splits.size(), threads, [&](std::size_t b) {
    traces[b] = evaluate_split(data, penalty, grid, splits[b], opts);
  });
  return aggregate_pass(grid, traces);
}

/// Partition b is drawn from the substream derive_seed(seed, b).
inline std::vector<SplitPair> draw_splits(Index n, int b, std::uint64_t seed) {
  if (b < 1) throw std::invalid_argument("pass_score: need b >= 1");
  std::vector<SplitPair> splits;
  splits.reserve(static_cast<std::size_t>(b));
  for (int i = 0; i < b; ++i) {
    Rng rng = make_rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
    splits.push_back(random_half_split(n, rng));
  }
  return splits;
}

inline PassResult pass_score(const Dataset& data, const PenaltySpec& penalty,
                             const std::vector<double>& grid, int b,
                             const FitOptions& opts, std::uint64_t seed,
                             unsigned threads = 1) {
  return pass_score_with_splits(data, penalty, grid, draw_splits(data.n(), b, seed),
                                opts, threads);
}

// ---------------------------------------------------------------------------
// competitors

enum class Criterion { Pass, Bic, Cp, Cv, Gcv };

inline const char* to_string(Criterion c) {
  switch (c) {
    case Criterion::Pass: return "PASS";
    case Criterion::Bic: return "BIC";
    case Criterion::Cp: return "Cp";
    case Criterion::Cv: return "CV";
    case Criterion::Gcv: return "GCV";
  }
  return "?";
}

struct CriterionScore {
  std::vector<double> grid;
  std::vector<double> value;
  double lambda_hat = 0.0;
  std::size_t lambda_hat_index = 0;
  std::string criterion_name;
};

inline CriterionScore make_score(std::string name, const std::vector<double>& grid,
                                 std::vector<double> value) {
  CriterionScore s;
  s.grid = grid;
  s.value = std::move(value);
  s.criterion_name = std::move(name);
  s.lambda_hat_index = best_index(s.value, s.grid, /*maximize=*/false);
  s.lambda_hat = s.grid[s.lambda_hat_index];
  return s;
}

inline double rss(const Dataset& data, const Vector& beta) {
  return (data.y - data.x * beta).squaredNorm();
}

inline std::vector<double> grid_of(const std::vector<Coefficients>& path) {
  std::vector<double> g;
  g.reserve(path.size());
  for (const auto& c : path) g.push_back(c.lambda);
  return g;
}

// The *_from_path variants score an already computed full-data path, so all
// criteria can share one fit.

inline CriterionScore bic_from_path(const Dataset& data,
                                    const std::vector<Coefficients>& path,
                                    double zero_tol) {
  const double n = static_cast<double>(data.n());
  std::vector<double> v;
  for (const auto& c : path) {
    const double df = static_cast<double>(active_set(c, zero_tol).size());
    v.push_back(n * std::log(rss(data, c.beta) / n) + std::log(n) * df);
  }
  return make_score("BIC", grid_of(path), std::move(v));
}

inline CriterionScore cp_from_path(const Dataset& data,
                                   const std::vector<Coefficients>& path,
                                   double zero_tol) {
  if (data.n() <= data.p())
    throw std::invalid_argument("Cp: need n > p to estimate the noise variance");
  const auto full = ols_fit(data, SupportSet::full(data.p()));
  const double n = static_cast<double>(data.n());
  const double sigma2 = rss(data, full.beta) / (n - static_cast<double>(data.p()));
  if (!(sigma2 > 0.0))
    throw SelectionFailure("Cp: full model interpolates the data, sigma^2 = 0");
  std::vector<double> v;
  for (const auto& c : path) {
    const double df = static_cast<double>(active_set(c, zero_tol).size());
    v.push_back(rss(data, c.beta) / sigma2 - n + 2.0 * df);
  }
  return make_score("Cp", grid_of(path), std::move(v));
}

inline CriterionScore gcv_from_path(const Dataset& data,
                                    const std::vector<Coefficients>& path,
                                    double zero_tol) {
  const double n = static_cast<double>(data.n());
  std::vector<double> v;
  for (const auto& c : path) {
    const double df = static_cast<double>(active_set(c, zero_tol).size());
    if (df >= n) {
      v.push_back(std::numeric_limits<double>::infinity());
      continue;
    }
    const double shrink = 1.0 - df / n;
    v.push_back((rss(data, c.beta) / n) / (shrink * shrink));
  }
  return make_score("GCV", grid_of(path), std::move(v));
}

inline CriterionScore bic_select(const Dataset& data, const PenaltySpec& penalty,
                                 const std::vector<double>& grid, const FitOptions& opts) {
  return bic_from_path(data, fit_path(data, penalty, grid, opts), opts.zero_tol);
}

inline CriterionScore cp_select(const Dataset& data, const PenaltySpec& penalty,
                                const std::vector<double>& grid, const FitOptions& opts) {
  return cp_from_path(data, fit_path(data, penalty, grid, opts), opts.zero_tol);
}

inline CriterionScore gcv_select(const Dataset& data, const PenaltySpec& penalty,
                                 const std::vector<double>& grid, const FitOptions& opts) {
  return gcv_from_path(data, fit_path(data, penalty, grid, opts), opts.zero_tol);
}

/// Fold label per row: a seeded permutation dealt round-robin into k folds.
inline std::vector<int> kfold_assign(Index n, int k, std::uint64_t seed) {
  if (k < 2) throw std::invalid_argument("kfold: need k >= 2");
  if (k > n) throw std::invalid_argument("kfold: k > n leaves a fold empty");
  std::vector<Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Index{0});
  Rng rng = make_rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<int> fold(static_cast<std::size_t>(n));
  for (std::size_t pos = 0; pos < perm.size(); ++pos)
    fold[static_cast<std::size_t>(perm[pos])] = static_cast<int>(pos % static_cast<std::size_t>(k));
  return fold;
}

inline CriterionScore kfold_cv_select(const Dataset& data, const PenaltySpec& penalty,
                                      const std::vector<double>& grid, int k,
                                      const FitOptions& opts, std::uint64_t seed) {
  if (grid.empty()) throw std::invalid_argument("kfold: empty grid");
  const auto fold = kfold_assign(data.n(), k, seed);
  std::vector<double> sse(grid.size(), 0.0);
  for (int f = 0; f < k; ++f) {
    std::vector<Index> train, test;
    for (Index i = 0; i < data.n(); ++i)
      (fold[static_cast<std::size_t>(i)] == f ? test : train).push_back(i);
    if (test.empty()) throw std::invalid_argument("kfold: empty fold");
    const auto path = fit_path(subset(data, train), penalty, grid, opts);
    for (std::size_t g = 0; g < grid.size(); ++g)
      for (Index i : test) {
        const double r = data.y(i) - data.x.row(i).dot(path[g].beta);
        sse[g] += r * r;
      }
  }
  for (auto& v : sse) v /= static_cast<double>(data.n());
  return make_score("CV", grid, std::move(sse));
}

// ---------------------------------------------------------------------------
// final model

struct FinalModel {
  SupportSet support;
  Coefficients fit;    // penalized fit at lambda_hat
  Coefficients refit;  // OLS on the support
};

inline FinalModel final_model_from_fit(const Dataset& data, Coefficients fit,
                                       double zero_tol) {
  FinalModel m;
  m.support = active_set(fit, zero_tol);
  m.refit = ols_fit(data, m.support);
  m.refit.lambda = fit.lambda;
  m.fit = std::move(fit);
  return m;
}

inline FinalModel select_final_model(const Dataset& data, const PenaltySpec& penalty,
                                     double lambda_hat, const FitOptions& opts) {
  return final_model_from_fit(data, fit_penalized(data, penalty, lambda_hat, opts),
                              opts.zero_tol);
}

}  // namespace pass
