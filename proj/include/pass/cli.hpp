#pragma once

// Command-line front end: `select` runs criteria on a user dataset,
// `simulate` runs a Monte Carlo scenario. Results go to stdout or --output,
// progress and diagnostics to stderr.

#include "pass/io.hpp"
#include "pass/model_core.hpp"
#include "pass/parallel.hpp"
#include "pass/selection.hpp"
#include "pass/simbench.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace pass::cli {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Thrown for --help; carries the rendered help text.
struct HelpRequested : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Mode { Select, Simulate };
enum class Format { Csv, Table };

struct GridSpec {
  double min_exponent = -2.0;
  double max_exponent = 2.0;
  int count = 100;
};

struct RunConfig {
  Mode mode = Mode::Select;
  // select
  std::string input_path;
  std::string response = "y";
  char delimiter = ',';
  // simulate
  std::string scenario;
  std::optional<Index> n;
  int replicates = 100;
  std::vector<double> beta;  // custom true model, used when scenario is empty
  double rho = 0.5;
  double sigma = 1.0;
  // shared
  std::vector<PenaltyKind> penalties;
  double scad_a = 3.7;
  std::vector<Criterion> criteria;
  GridSpec grid;
  int b = 20;
  int folds = 10;
  std::uint64_t seed = 1;
  std::string output_path;
  Format format = Format::Table;
  unsigned threads = 1;
  FitOptions opts;
};

namespace detail {

inline std::vector<std::string> split_list(const std::vector<std::string>& items) {
  std::vector<std::string> out;
  for (const auto& item : items) {
    std::stringstream ss(item);
    std::string tok;
    while (std::getline(ss, tok, ','))
      if (!tok.empty()) out.push_back(tok);
  }
  return out;
}

inline std::string join(const std::vector<std::string>& v, const char* sep) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? sep : "") + v[i];
  return s;
}

}  // namespace detail

inline RunConfig parse_args(int argc, const char* const* argv) {
  RunConfig cfg;
  cfg.threads = default_threads();

  CLI::App app{"Tuning-parameter selection for penalized regression (PASS, BIC, Cp, GCV, CV)",
               "pass_select"};
  app.require_subcommand(1);
  auto* sel = app.add_subcommand("select", "select lambda on a delimited data file");
  auto* sim = app.add_subcommand("simulate", "run a Monte Carlo scenario");

  std::vector<std::string> penalties, criteria, beta_text;
  std::string format = "table", delimiter = ",";

  auto shared = [&](CLI::App* sub) {
    sub->add_option("--penalty", penalties, "lasso, alasso, scad (comma separated)")
        ->delimiter(',');
    sub->add_option("--scad-a", cfg.scad_a, "SCAD shape parameter (> 2)");
    sub->add_option("--criterion", criteria, "pass, bic, cp, gcv, cv (comma separated)")
        ->delimiter(',');
    sub->add_option("--grid-min", cfg.grid.min_exponent, "log10 of the smallest lambda");
    sub->add_option("--grid-max", cfg.grid.max_exponent, "log10 of the largest lambda");
    sub->add_option("--grid-count", cfg.grid.count, "number of grid points");
    sub->add_option("--b", cfg.b, "number of random half partitions for PASS");
    sub->add_option("--folds", cfg.folds, "folds for k-fold CV");
    sub->add_option("--seed", cfg.seed, "master seed");
    sub->add_option("--output,-o", cfg.output_path, "output file (default stdout)");
    sub->add_option("--format", format, "csv or table");
    sub->add_option("--threads", cfg.threads, "worker threads (default: PASS_THREADS or all cores)");
    sub->add_option("--tol", cfg.opts.tol, "coordinate descent tolerance");
    sub->add_option("--max-iter", cfg.opts.max_iter, "coordinate descent sweep limit");
  };
  shared(sel);
  shared(sim);

  sel->add_option("--input,-i", cfg.input_path, "delimited data file with a header row")
      ->required();
  sel->add_option("--response,-r", cfg.response, "response column name or zero-based index");
  sel->add_option("--delimiter", delimiter, "field delimiter");

  sim->add_option("--scenario,-s", cfg.scenario,
                  "preset: I, II.1, II.2, II.3, III (with --n) or a full name like I-40");
  sim->add_option("--n", cfg.n, "sample size");
  sim->add_option("--replicates", cfg.replicates, "Monte Carlo replicates");
  sim->add_option("--beta", beta_text, "custom true coefficients (comma separated)")
      ->delimiter(',');
  sim->add_option("--rho", cfg.rho, "AR(1) correlation of the custom design");
  sim->add_option("--sigma", cfg.sigma, "noise standard deviation of the custom model");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    throw HelpRequested(app.help());
  } catch (const CLI::CallForAllHelp&) {
    throw HelpRequested(app.help("", CLI::AppFormatMode::All));
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }

  cfg.mode = sel->parsed() ? Mode::Select : Mode::Simulate;
  try {
    for (const auto& p : detail::split_list(penalties)) cfg.penalties.push_back(parse_penalty(p));
    for (const auto& c : detail::split_list(criteria)) cfg.criteria.push_back(parse_criterion(c));
  } catch (const ParseError& e) {
    throw UsageError(std::string(e.what()) + " (--penalty / --criterion)");
  }
  if (cfg.penalties.empty()) {
    if (cfg.mode == Mode::Select) cfg.penalties = {PenaltyKind::Scad};
    else cfg.penalties = {PenaltyKind::Lasso, PenaltyKind::AdaptiveLasso, PenaltyKind::Scad};
  }
  if (cfg.criteria.empty()) {
    if (cfg.mode == Mode::Select) cfg.criteria = {Criterion::Pass};
    else cfg.criteria = {Criterion::Pass, Criterion::Bic, Criterion::Cp, Criterion::Cv,
                         Criterion::Gcv};
  }

  if (format == "csv") cfg.format = Format::Csv;
  else if (format == "table") cfg.format = Format::Table;
  else throw UsageError("--format: expected csv or table, got '" + format + "'");

  if (delimiter == "\\t" || delimiter == "tab") delimiter = "\t";
  if (delimiter.size() != 1) throw UsageError("--delimiter: expected a single character");
  cfg.delimiter = delimiter[0];

  for (const auto& t : detail::split_list(beta_text)) {
    auto v = pass::detail::parse_double(t);
    if (!v) throw UsageError("--beta: malformed number '" + t + "'");
    cfg.beta.push_back(*v);
  }

  if (cfg.grid.count < 1) throw UsageError("--grid-count: must be >= 1");
  if (!std::isfinite(cfg.grid.min_exponent) || !std::isfinite(cfg.grid.max_exponent))
    throw UsageError("--grid-min/--grid-max: must be finite");
  if (cfg.grid.count > 1 && !(cfg.grid.min_exponent < cfg.grid.max_exponent))
    throw UsageError("--grid-min: must be below --grid-max");
  if (cfg.b < 1) throw UsageError("--b: must be >= 1");
  if (cfg.folds < 2) throw UsageError("--folds: must be >= 2");
  if (cfg.threads < 1) throw UsageError("--threads: must be >= 1");
  if (!(cfg.scad_a > 2.0)) throw UsageError("--scad-a: must be > 2");
  if (cfg.replicates < 1) throw UsageError("--replicates: must be >= 1");
  if (cfg.mode == Mode::Simulate) {
    if (cfg.scenario.empty() && cfg.beta.empty())
      throw UsageError("--scenario: required unless --beta describes a custom model");
    if (!cfg.scenario.empty() && !cfg.beta.empty())
      throw UsageError("--beta: cannot be combined with --scenario");
    if (!cfg.beta.empty() && !cfg.n) throw UsageError("--n: required with --beta");
  }
  return cfg;
}

inline std::vector<double> make_grid(const GridSpec& g) {
  return log_grid(g.min_exponent, g.max_exponent, g.count);
}

/// Full effective configuration, one "key: value" per line.
inline std::vector<std::string> describe(const RunConfig& cfg) {
  std::vector<std::string> pens, crits;
  for (auto p : cfg.penalties) pens.emplace_back(to_string(p));
  for (auto c : cfg.criteria) crits.emplace_back(to_string(c));
  std::vector<std::string> out;
  auto add = [&](const std::string& k, const std::string& v) { out.push_back(k + ": " + v); };
  add("mode", cfg.mode == Mode::Select ? "select" : "simulate");
  if (cfg.mode == Mode::Select) {
    add("input", cfg.input_path);
    add("response", cfg.response);
  } else {
    add("scenario", cfg.scenario.empty() ? "custom" : cfg.scenario);
    if (cfg.n) add("n", std::to_string(*cfg.n));
    add("replicates", std::to_string(cfg.replicates));
    if (!cfg.beta.empty()) {
      std::vector<std::string> b;
      for (double v : cfg.beta) b.push_back(pass::detail::fmt_exact(v));
      add("beta", detail::join(b, ","));
      add("rho", pass::detail::fmt_exact(cfg.rho));
      add("sigma", pass::detail::fmt_exact(cfg.sigma));
    }
  }
  add("penalty", detail::join(pens, ","));
  add("scad_a", pass::detail::fmt_exact(cfg.scad_a));
  add("criterion", detail::join(crits, ","));
  add("grid", "10^(" + pass::detail::fmt_exact(cfg.grid.min_exponent) + " .. " +
                  pass::detail::fmt_exact(cfg.grid.max_exponent) + "), " +
                  std::to_string(cfg.grid.count) + " points");
  add("b", std::to_string(cfg.b));
  add("folds", std::to_string(cfg.folds));
  add("seed", std::to_string(cfg.seed));
  add("tol", pass::detail::fmt_exact(cfg.opts.tol));
  add("max_iter", std::to_string(cfg.opts.max_iter));
  add("zero_tol", pass::detail::fmt_exact(cfg.opts.zero_tol));
  add("format", cfg.format == Format::Csv ? "csv" : "table");
  return out;
}

namespace detail {

struct Sink {
  std::ofstream file;
  std::ostream* out;

  Sink(const std::string& path, std::ostream& fallback) : out(&fallback) {
    if (!path.empty()) {
      file.open(path);
      if (!file) throw std::runtime_error("cannot open output file '" + path + "'");
      out = &file;
    }
  }
};

struct SelectCell {
  Criterion criterion;
  PenaltyKind penalty;
  bool failed = false;
  std::string error;
  std::vector<double> trace;
  std::vector<double> kappa_sum, cv_sum;  // PASS only
  FinalModel model;
  double lambda_hat = 0.0;
};

}  // namespace detail

inline int run_select(const RunConfig& cfg, std::ostream& out = std::cout,
                      std::ostream& err = std::cerr) {
  Dataset data;
  try {
    std::ifstream in(cfg.input_path);
    if (!in) throw std::runtime_error("cannot open input file '" + cfg.input_path + "'");
    Dataset raw = read_dataset(in, cfg.response, cfg.delimiter);
    if (raw.n() < 4) throw std::runtime_error("need at least 4 observations, got " +
                                              std::to_string(raw.n()));
    data = center_data(raw).first;
    // Fail early, naming the column, if any covariate cannot be scaled.
    (void)pass::detail::make_problem(data);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }

  const auto grid = make_grid(cfg.grid);
  std::vector<detail::SelectCell> cells;
  for (PenaltyKind kind : cfg.penalties) {
    const PenaltySpec pen = make_penalty(kind, cfg.scad_a);
    std::optional<std::vector<Coefficients>> path;
    std::string path_error;
    try {
      path = fit_path(data, pen, grid, cfg.opts);
    } catch (const std::exception& e) {
      path_error = e.what();
    }
    for (Criterion crit : cfg.criteria) {
      err << "running " << to_string(kind) << '/' << to_string(crit) << '\n';
      detail::SelectCell cell{crit, kind};
      try {
        if (!path) throw std::runtime_error(path_error);
        std::size_t k = 0;
        switch (crit) {
          case Criterion::Pass: {
            auto r = pass_score(data, pen, grid, cfg.b, cfg.opts, cfg.seed, cfg.threads);
            k = r.lambda_hat_index;
            cell.trace = r.score;
            cell.kappa_sum = r.kappa_sum;
            cell.cv_sum = r.cv_sum;
            break;
          }
          case Criterion::Bic: {
            auto s = bic_from_path(data, *path, cfg.opts.zero_tol);
            k = s.lambda_hat_index;
            cell.trace = s.value;
            break;
          }
          case Criterion::Cp: {
            auto s = cp_from_path(data, *path, cfg.opts.zero_tol);
            k = s.lambda_hat_index;
            cell.trace = s.value;
            break;
          }
          case Criterion::Gcv: {
            auto s = gcv_from_path(data, *path, cfg.opts.zero_tol);
            k = s.lambda_hat_index;
            cell.trace = s.value;
            break;
          }
          case Criterion::Cv: {
            auto s = kfold_cv_select(data, pen, grid, cfg.folds, cfg.opts,
                                     derive_seed(cfg.seed, stream::kfold));
            k = s.lambda_hat_index;
            cell.trace = s.value;
            break;
          }
        }
        cell.lambda_hat = grid[k];
        cell.model = final_model_from_fit(data, (*path)[k], cfg.opts.zero_tol);
      } catch (const std::exception& e) {
        cell.failed = true;
        cell.error = e.what();
        err << "error: " << to_string(kind) << '/' << to_string(crit) << ": " << e.what()
            << '\n';
      }
      cells.push_back(std::move(cell));
    }
  }

  detail::Sink sink(cfg.output_path, out);
  std::ostream& os = *sink.out;
  for (const auto& line : describe(cfg)) os << "# " << line << '\n';
  os << "# n: " << data.n() << ", p: " << data.p() << '\n';
  os << "# note: data are centered; coefficients are on the centered scale (no intercept)\n";

  auto support_names = [&](const SupportSet& s) {
    std::vector<std::string> names;
    for (Index j : s.indices()) names.push_back(data.column_name(j));
    return names;
  };

  if (cfg.format == Format::Csv) {
    os << "\n[selection]\ncriterion,penalty,lambda_hat,size,support\n";
    for (const auto& c : cells) {
      os << to_string(c.criterion) << ',' << to_string(c.penalty) << ',';
      if (c.failed) {
        os << "NA,NA,NA\n";
        continue;
      }
      os << pass::detail::fmt_exact(c.lambda_hat) << ',' << c.model.support.size() << ','
         << detail::join(support_names(c.model.support), ";") << '\n';
    }
    os << "\n[coefficients]\ncriterion,penalty";
    for (Index j = 0; j < data.p(); ++j) os << ',' << data.column_name(j);
    os << '\n';
    for (const auto& c : cells) {
      if (c.failed) continue;
      os << to_string(c.criterion) << ',' << to_string(c.penalty);
      for (Index j = 0; j < data.p(); ++j)
        os << ',' << pass::detail::fmt_exact(c.model.refit.beta(j));
      os << '\n';
    }
    os << "\n[trace]\ncriterion,penalty,lambda,value,kappa_sum,cv_sum\n";
    for (const auto& c : cells) {
      if (c.failed) continue;
      for (std::size_t k = 0; k < grid.size(); ++k) {
        os << to_string(c.criterion) << ',' << to_string(c.penalty) << ','
           << pass::detail::fmt_exact(grid[k]) << ',' << pass::detail::fmt_exact(c.trace[k]);
        if (!c.kappa_sum.empty())
          os << ',' << pass::detail::fmt_exact(c.kappa_sum[k]) << ','
             << pass::detail::fmt_exact(c.cv_sum[k]);
        else
          os << ",,";
        os << '\n';
      }
    }
  } else {
    for (const auto& c : cells) {
      os << '\n' << to_string(c.penalty) << " + " << to_string(c.criterion) << '\n';
      if (c.failed) {
        os << "  failed: " << c.error << '\n';
        continue;
      }
      os << "  lambda_hat: " << pass::detail::fmt_exact(c.lambda_hat) << '\n';
      os << "  support:    {" << detail::join(support_names(c.model.support), ", ") << "}\n";
      os << "  OLS refit on the support:\n";
      for (Index j : c.model.support.indices())
        os << "    " << std::left << std::setw(12) << data.column_name(j) << ' '
           << pass::detail::fmt_exact(c.model.refit.beta(j)) << '\n';
      os << "  trace (lambda, value):\n";
      for (std::size_t k = 0; k < grid.size(); ++k)
        os << "    " << std::setw(24) << pass::detail::fmt_exact(grid[k]) << ' '
           << pass::detail::fmt_exact(c.trace[k]) << '\n';
    }
  }
  os.flush();

  for (const auto& c : cells)
    if (c.failed) return 1;
  return 0;
}

/// Resolves --scenario/--n (or a custom --beta model) plus overrides into a
/// full scenario configuration.
inline ScenarioConfig scenario_from(const RunConfig& cfg) {
  ScenarioConfig sc;
  if (!cfg.scenario.empty()) {
    std::string name = cfg.scenario;
    if (name == "I" || name == "III") {
      if (!cfg.n) throw UsageError("--n: required with --scenario " + name);
      name += "-" + std::to_string(*cfg.n);
    }
    try {
      sc = find_preset(name);
    } catch (const std::invalid_argument& e) {
      throw UsageError(std::string("--scenario: ") + e.what());
    }
    if (cfg.n) sc.n = *cfg.n;
  } else {
    sc.name = "custom";
    sc.truth.beta = Eigen::Map<const Vector>(cfg.beta.data(), static_cast<Index>(cfg.beta.size()));
    sc.truth.rho = cfg.rho;
    sc.truth.sigma = cfg.sigma;
    sc.n = *cfg.n;
  }
  sc.replicates = cfg.replicates;
  sc.grid = make_grid(cfg.grid);
  sc.b = cfg.b;
  sc.folds = cfg.folds;
  sc.penalties = cfg.penalties;
  sc.criteria = cfg.criteria;
  sc.master_seed = cfg.seed;
  sc.scad_a = cfg.scad_a;
  sc.opts = cfg.opts;
  sc.threads = cfg.threads;
  return sc;
}

inline int run_simulate(const RunConfig& cfg, std::ostream& out = std::cout,
                        std::ostream& err = std::cerr) {
  ScenarioConfig sc;
  try {
    sc = scenario_from(cfg);
    validate(sc);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  const int step = std::max(1, sc.replicates / 10);
  auto run = run_scenario_detailed(sc, [&](int done, int total) {
    if (done % step == 0 || done == total)
      err << "replicate " << done << '/' << total << '\n';
  });

  detail::Sink sink(cfg.output_path, out);
  std::ostream& os = *sink.out;
  for (const auto& line : describe(cfg)) os << "# " << line << '\n';
  os << "# resolved: scenario=" << sc.name << " n=" << sc.n << " p=" << sc.truth.p()
     << " rho=" << pass::detail::fmt_exact(sc.truth.rho)
     << " sigma=" << pass::detail::fmt_exact(sc.truth.sigma) << '\n';
  if (cfg.format == Format::Csv) {
    write_records(os, to_records(sc.name, run.replicates));
  } else {
    os << '\n' << format_summary(run.summary);
  }
  os.flush();

  for (const auto& r : run.replicates)
    for (const auto& c : r.cells)
      if (c.failed)
        err << "replicate " << r.replicate << ' ' << to_string(c.penalty) << '/'
            << to_string(c.criterion) << " failed: " << c.error << '\n';
  return run.summary.total_failures() == 0 ? 0 : 1;
}

inline int main(int argc, const char* const* argv) {
  RunConfig cfg;
  try {
    cfg = parse_args(argc, argv);
  } catch (const HelpRequested& h) {
    std::cout << h.what();
    return 0;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\nrun with --help for options\n";
    return 2;
  }
  try {
    return cfg.mode == Mode::Select ? run_select(cfg) : run_simulate(cfg);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace pass::cli
