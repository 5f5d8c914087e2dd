#pragma once

// Monte Carlo harness: AR(1) Gaussian designs, replicated selection runs for
// every (criterion x penalty) cell, and the aggregated metrics
// PCT / RPE / C / I / size.
//
// Seeds: replicate r draws its data from derive_seed(master, {r, data}), its
// PASS partitions from derive_seed(master, {r, pass_splits}) and its CV folds
// from derive_seed(master, {r, kfold}). One dataset per replicate is shared
// by all cells, and the same partitions are used for every penalty.

#include "pass/model_core.hpp"
#include "pass/parallel.hpp"
#include "pass/random.hpp"
#include "pass/selection.hpp"

#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace pass {

struct TrueModel {
  Vector beta;
  double rho = 0.5;
  double sigma = 1.0;

  Index p() const { return beta.size(); }

  SupportSet true_support() const {
    std::vector<Index> idx;
    for (Index j = 0; j < beta.size(); ++j)
      if (beta(j) != 0.0) idx.push_back(j);
    return {std::move(idx), beta.size()};
  }

  /// Sigma_kl = rho^|k-l|
  Matrix covariance() const {
    Matrix s(p(), p());
    for (Index k = 0; k < p(); ++k)
      for (Index l = 0; l < p(); ++l)
        s(k, l) = std::pow(rho, static_cast<double>(std::abs(k - l)));
    return s;
  }
};

inline void validate(const TrueModel& t) {
  if (t.p() < 1) throw std::invalid_argument("true model: empty beta");
  if (!(std::fabs(t.rho) < 1.0)) throw std::invalid_argument("true model: need |rho| < 1");
  if (!(t.sigma >= 0.0)) throw std::invalid_argument("true model: need sigma >= 0");
}

struct ScenarioConfig {
  std::string name;
  TrueModel truth;
  Index n = 40;
  int replicates = 100;
  std::vector<double> grid = log_grid();
  int b = 20;
  int folds = 10;
  std::vector<PenaltyKind> penalties{PenaltyKind::Lasso, PenaltyKind::AdaptiveLasso,
                                     PenaltyKind::Scad};
  std::vector<Criterion> criteria{Criterion::Pass, Criterion::Bic, Criterion::Cp,
                                  Criterion::Cv, Criterion::Gcv};
  std::uint64_t master_seed = 1;
  double scad_a = 3.7;
  FitOptions opts;
  unsigned threads = 1;
};

inline void validate(const ScenarioConfig& c) {
  validate(c.truth);
  validate(c.opts);
  if (c.replicates < 1) throw std::invalid_argument("scenario: replicates must be >= 1");
  if (c.n < 4) throw std::invalid_argument("scenario: n must be >= 4");
  if (c.grid.empty()) throw std::invalid_argument("scenario: empty grid");
  if (c.b < 1) throw std::invalid_argument("scenario: b must be >= 1");
  if (c.penalties.empty() || c.criteria.empty())
    throw std::invalid_argument("scenario: need at least one penalty and criterion");
}

inline PenaltySpec make_penalty(PenaltyKind kind, double scad_a) {
  switch (kind) {
    case PenaltyKind::Lasso: return PenaltySpec::lasso();
    case PenaltyKind::AdaptiveLasso: return PenaltySpec::adaptive_lasso();
    case PenaltyKind::Scad: return PenaltySpec::scad(scad_a);
  }
  return PenaltySpec::lasso();
}

// ---------------------------------------------------------------------------
// data generation

template <class Urbg>
Matrix gen_ar1_design(Index n, Index p, double rho, Urbg& rng) {
  if (!(std::fabs(rho) < 1.0)) throw std::invalid_argument("gen_ar1_design: need |rho| < 1");
  std::normal_distribution<double> z(0.0, 1.0);
  const double innov = std::sqrt(1.0 - rho * rho);
  Matrix x(n, p);
  for (Index i = 0; i < n; ++i) {
    x(i, 0) = z(rng);
    for (Index k = 1; k < p; ++k) x(i, k) = rho * x(i, k - 1) + innov * z(rng);
  }
  return x;
}

template <class Urbg>
Vector gen_response(const Matrix& x, const TrueModel& truth, Urbg& rng) {
  if (x.cols() != truth.p())
    throw std::invalid_argument("gen_response: design width does not match beta");
  std::normal_distribution<double> z(0.0, 1.0);
  Vector y = x * truth.beta;
  for (Index i = 0; i < y.size(); ++i) y(i) += truth.sigma * z(rng);
  return y;
}

// ---------------------------------------------------------------------------
// metrics

/// (b - beta)' Sigma (b - beta) / sigma^2, the expectation over a fresh x0 in
/// closed form.
inline double rpe(const Coefficients& refit, const TrueModel& truth) {
  if (refit.beta.size() != truth.p())
    throw std::invalid_argument("rpe: dimension mismatch");
  const Vector d = refit.beta - truth.beta;
  return d.dot(truth.covariance() * d) / (truth.sigma * truth.sigma);
}

struct ZeroCounts {
  int c = 0;  // true zeros estimated as zero
  int i = 0;  // true signals estimated as zero
};

inline ZeroCounts zero_counts(const SupportSet& support, const SupportSet& truth) {
  if (support.p() != truth.p()) throw std::invalid_argument("zero_counts: mismatched p");
  ZeroCounts z;
  for (Index j = 0; j < truth.p(); ++j) {
    if (support.contains(j)) continue;
    if (truth.contains(j)) ++z.i;
    else ++z.c;
  }
  return z;
}

// ---------------------------------------------------------------------------
// replicates

struct CellResult {
  Criterion criterion{};
  PenaltyKind penalty{};
  bool failed = false;
  std::string error;
  double lambda_hat = std::numeric_limits<double>::quiet_NaN();
  SupportSet support;
  Coefficients refit;
  double rpe = std::numeric_limits<double>::quiet_NaN();
  bool exact_match = false;
  int c_zeros = 0;
  int i_zeros = 0;
  int size = 0;
};

struct ReplicateResult {
  int replicate = 0;
  std::vector<CellResult> cells;

  const CellResult& cell(Criterion c, PenaltyKind k) const {
    for (const auto& x : cells)
      if (x.criterion == c && x.penalty == k) return x;
    throw std::out_of_range("replicate: no such cell");
  }
};

inline Dataset simulate_dataset(const TrueModel& truth, Index n, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  Dataset raw;
  raw.x = gen_ar1_design(n, truth.p(), truth.rho, rng);
  raw.y = gen_response(raw.x, truth, rng);
  return center_data(raw).first;
}

inline std::size_t select_index(Criterion crit, const Dataset& data,
                                const PenaltySpec& pen,
                                const std::vector<Coefficients>& path,
                                const ScenarioConfig& cfg, std::uint64_t rep_seed) {
  switch (crit) {
    case Criterion::Pass:
      return pass_score(data, pen, cfg.grid, cfg.b, cfg.opts,
                        derive_seed(rep_seed, stream::pass_splits))
          .lambda_hat_index;
    case Criterion::Bic: return bic_from_path(data, path, cfg.opts.zero_tol).lambda_hat_index;
    case Criterion::Cp: return cp_from_path(data, path, cfg.opts.zero_tol).lambda_hat_index;
    case Criterion::Gcv: return gcv_from_path(data, path, cfg.opts.zero_tol).lambda_hat_index;
    case Criterion::Cv:
      return kfold_cv_select(data, pen, cfg.grid, cfg.folds, cfg.opts,
                             derive_seed(rep_seed, stream::kfold))
          .lambda_hat_index;
  }
  throw std::logic_error("unknown criterion");
}

inline ReplicateResult run_replicate(const ScenarioConfig& cfg, int replicate_index) {
  const std::uint64_t rep_seed =
      derive_seed(cfg.master_seed, static_cast<std::uint64_t>(replicate_index));
  const Dataset data =
      simulate_dataset(cfg.truth, cfg.n, derive_seed(rep_seed, stream::data));
  const SupportSet truth = cfg.truth.true_support();

  ReplicateResult out;
  out.replicate = replicate_index;
  for (PenaltyKind kind : cfg.penalties) {
    const PenaltySpec pen = make_penalty(kind, cfg.scad_a);
    std::optional<std::vector<Coefficients>> path;
    std::string path_error;
    try {
      path = fit_path(data, pen, cfg.grid, cfg.opts);
    } catch (const std::exception& e) {
      path_error = e.what();
    }
    for (Criterion crit : cfg.criteria) {
      CellResult cell;
      cell.criterion = crit;
      cell.penalty = kind;
      try {
        if (!path) throw std::runtime_error(path_error);
        const std::size_t k = select_index(crit, data, pen, *path, cfg, rep_seed);
        const FinalModel fm = final_model_from_fit(data, (*path)[k], cfg.opts.zero_tol);
        cell.lambda_hat = cfg.grid[k];
        cell.support = fm.support;
        cell.refit = fm.refit;
        cell.rpe = rpe(fm.refit, cfg.truth);
        cell.exact_match = fm.support == truth;
        const auto z = zero_counts(fm.support, truth);
        cell.c_zeros = z.c;
        cell.i_zeros = z.i;
        cell.size = static_cast<int>(fm.support.size());
      } catch (const std::exception& e) {
        cell.failed = true;
        cell.error = e.what();
      }
      out.cells.push_back(std::move(cell));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// aggregation

/// One per-replicate, per-cell row; the unit of CSV output.
struct Record {
  std::string scenario;
  Criterion criterion{};
  PenaltyKind penalty{};
  int replicate = 0;
  bool failed = false;
  double lambda_hat = 0.0;
  int size = 0;
  bool exact_match = false;
  int c = 0;
  int i = 0;
  double rpe = 0.0;
};

inline std::vector<Record> to_records(const std::string& scenario,
                                      const std::vector<ReplicateResult>& reps) {
  std::vector<Record> out;
  for (const auto& r : reps)
    for (const auto& cell : r.cells)
      out.push_back({scenario, cell.criterion, cell.penalty, r.replicate, cell.failed,
                     cell.lambda_hat, cell.size, cell.exact_match, cell.c_zeros,
                     cell.i_zeros, cell.rpe});
  return out;
}

struct SummaryRow {
  Criterion criterion{};
  PenaltyKind penalty{};
  int replicates = 0;  // successful ones
  int failures = 0;
  double pct = 0.0;
  double mean_rpe = 0.0;
  double mean_c = 0.0;
  double mean_i = 0.0;
  double mean_size = 0.0;
  double frac_no_false_zero = 0.0;  // share of replicates with I = 0
};

struct SummaryTable {
  std::string scenario;
  Index n = 0;
  Index p = 0;
  int replicates = 0;
  int b = 0;
  std::uint64_t master_seed = 0;
  std::vector<SummaryRow> rows;

  const SummaryRow& row(Criterion c, PenaltyKind k) const {
    for (const auto& r : rows)
      if (r.criterion == c && r.penalty == k) return r;
    throw std::out_of_range("summary: no such row");
  }
  int total_failures() const {
    int f = 0;
    for (const auto& r : rows) f += r.failures;
    return f;
  }
};

/// Rows follow first appearance of each (criterion, penalty) in `records`;
/// the means themselves do not depend on record order.
inline std::vector<SummaryRow> summarize(const std::vector<Record>& records) {
  std::vector<SummaryRow> rows;
  std::map<std::pair<int, int>, std::size_t> slot;
  for (const auto& rec : records) {
    auto key = std::make_pair(static_cast<int>(rec.penalty), static_cast<int>(rec.criterion));
    auto [it, fresh] = slot.try_emplace(key, rows.size());
    if (fresh) rows.push_back({rec.criterion, rec.penalty});
    SummaryRow& r = rows[it->second];
    if (rec.failed) {
      ++r.failures;
      continue;
    }
    ++r.replicates;
    r.pct += rec.exact_match;
    r.mean_rpe += rec.rpe;
    r.mean_c += rec.c;
    r.mean_i += rec.i;
    r.mean_size += rec.size;
    r.frac_no_false_zero += rec.i == 0;
  }
  for (auto& r : rows) {
    if (r.replicates == 0) {
      const double nan = std::numeric_limits<double>::quiet_NaN();
      r.pct = r.mean_rpe = r.mean_c = r.mean_i = r.mean_size = r.frac_no_false_zero = nan;
      continue;
    }
    const double k = r.replicates;
    r.pct /= k;
    r.mean_rpe /= k;
    r.mean_c /= k;
    r.mean_i /= k;
    r.mean_size /= k;
    r.frac_no_false_zero /= k;
  }
  return rows;
}

struct ScenarioRun {
  std::vector<ReplicateResult> replicates;
  SummaryTable summary;
};

using ProgressFn = std::function<void(int done, int total)>;

inline ScenarioRun run_scenario_detailed(const ScenarioConfig& cfg,
                                         const ProgressFn& progress = {}) {
  validate(cfg);
  ScenarioRun run;
  run.replicates.resize(static_cast<std::size_t>(cfg.replicates));
  std::atomic<int> done{0};
  std::mutex progress_mu;
  parallel_for(run.replicates.size(), cfg.threads, [&](std::size_t r) {
    run.replicates[r] = run_replicate(cfg, static_cast<int>(r));
    const int d = ++done;
    if (progress) {
      std::lock_guard lock(progress_mu);
      progress(d, cfg.replicates);
    }
  });
  auto& s = run.summary;
  s.scenario = cfg.name;
  s.n = cfg.n;
  s.p = cfg.truth.p();
  s.replicates = cfg.replicates;
  s.b = cfg.b;
  s.master_seed = cfg.master_seed;
  s.rows = summarize(to_records(cfg.name, run.replicates));
  return run;
}

inline SummaryTable run_scenario(const ScenarioConfig& cfg,
                                 const ProgressFn& progress = {}) {
  return run_scenario_detailed(cfg, progress).summary;
}

// ---------------------------------------------------------------------------
// presets

inline ScenarioConfig make_preset(std::string name, std::vector<double> beta, Index n) {
  ScenarioConfig c;
  c.name = std::move(name);
  c.truth.beta = Eigen::Map<const Vector>(beta.data(), static_cast<Index>(beta.size()));
  c.truth.rho = 0.5;
  c.truth.sigma = 1.0;
  c.n = n;
  return c;
}

inline std::vector<ScenarioConfig> scenario_presets() {
  std::vector<ScenarioConfig> out;
  const std::vector<double> sparse{3, 1.5, 0, 0, 2, 0, 0, 0};
  for (Index n : {40, 60, 80}) out.push_back(make_preset("I-" + std::to_string(n), sparse, n));

  out.push_back(make_preset("II.1", {3, 2, 1.5, 0.05, 0.04, 0.03, 0.02, 0.01}, 40));
  out.push_back(make_preset("II.2", {3, 2, 1.5, 0.1, 0.08, 0.06, 0.04, 0.02}, 40));
  out.push_back(make_preset("II.3", {3, 2, 1.5, 0.2, 0.16, 0.12, 0.08, 0.04}, 40));

  for (Index n : {100, 200, 400}) {
    const auto p = static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(n))));
    std::vector<double> beta(p, 0.0);
    for (std::size_t j = 0; j < 5; ++j) beta[j] = 5.0 - static_cast<double>(j);
    out.push_back(make_preset("III-" + std::to_string(n), beta, n));
  }
  return out;
}

inline ScenarioConfig find_preset(const std::string& name) {
  for (auto& c : scenario_presets())
    if (c.name == name) return c;
  throw std::invalid_argument("unknown scenario preset '" + name + "'");
}

}  // namespace pass
