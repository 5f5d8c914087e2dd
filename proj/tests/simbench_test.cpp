#include "pass/simbench.hpp"

#include "properties.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace pass;

namespace {

ScenarioConfig small_config(int replicates) {
  auto cfg = find_preset("I-40");
  cfg.replicates = replicates;
  cfg.grid = log_grid(-2, 2, 25);
  cfg.b = 5;
  cfg.folds = 5;
  return cfg;
}

}  // namespace

TEST(Ar1Design, UnitVarianceWithoutCorrelation) {
  Rng rng = make_rng(1);
  Matrix x = gen_ar1_design(100000, 3, 0.0, rng);
  for (Index j = 0; j < 3; ++j) {
    EXPECT_NEAR(x.col(j).mean(), 0.0, 0.02);
    EXPECT_NEAR(x.col(j).squaredNorm() / 100000.0, 1.0, 0.02);
  }
  EXPECT_NEAR(x.col(0).dot(x.col(1)) / 100000.0, 0.0, 0.02);
}

TEST(Ar1Design, CorrelationDecaysGeometrically) {
  Rng rng = make_rng(2);
  Matrix x = gen_ar1_design(100000, 3, 0.5, rng);
  const double n = 100000.0;
  EXPECT_NEAR(x.col(0).dot(x.col(1)) / n, 0.5, 0.02);
  EXPECT_NEAR(x.col(0).dot(x.col(2)) / n, 0.25, 0.02);
  EXPECT_NEAR(x.col(2).squaredNorm() / n, 1.0, 0.02);
}

TEST(Ar1Design, SameSeedSameMatrix) {
  Rng a = make_rng(42), b = make_rng(42);
  EXPECT_EQ(gen_ar1_design(10, 4, 0.5, a), gen_ar1_design(10, 4, 0.5, b));
  Rng c = make_rng(1);
  EXPECT_THROW(gen_ar1_design(10, 4, 1.0, c), std::invalid_argument);
}

TEST(Response, NoiselessIsLinear) {
  TrueModel t{Vector::LinSpaced(4, 1, 4), 0.5, 0.0};
  Rng rng = make_rng(3);
  Matrix x = gen_ar1_design(20, 4, 0.5, rng);
  EXPECT_EQ(gen_response(x, t, rng), x * t.beta);
}

TEST(Response, SignalVarianceMatchesQuadraticForm) {
  auto truth = find_preset("I-40").truth;
  Rng rng = make_rng(4);
  Matrix x = gen_ar1_design(200000, 8, truth.rho, rng);
  const Vector signal = x * truth.beta;
  const double expected = truth.beta.dot(truth.covariance() * truth.beta);
  EXPECT_NEAR(signal.squaredNorm() / 200000.0, expected, 0.05 * expected);
}

TEST(Rpe, Examples) {
  TrueModel t{Vector::Zero(8), 0.5, 1.0};
  t.beta << 3, 1.5, 0, 0, 2, 0, 0, 0;
  Coefficients c;
  c.beta = t.beta;
  EXPECT_DOUBLE_EQ(rpe(c, t), 0.0);
  c.beta(0) += 1.0;
  EXPECT_DOUBLE_EQ(rpe(c, t), 1.0);
  c.beta = t.beta;
  c.beta(0) += 1.0;
  c.beta(1) += 1.0;
  EXPECT_DOUBLE_EQ(rpe(c, t), 3.0);  // 1 + 1 + 2 * 0.5
  t.sigma = 2.0;
  EXPECT_DOUBLE_EQ(rpe(c, t), 0.75);
}

TEST(Rpe, MatchesMonteCarloAverage) {
  TrueModel t{Vector::Zero(8), 0.5, 1.0};
  t.beta << 3, 1.5, 0, 0, 2, 0, 0, 0;
  Vector est(8);
  est << 2.7, 1.9, 0.1, 0, 2.2, 0, -0.3, 0;
  EXPECT_LE(pass::testing::rpe_monte_carlo_gap(t, est, 1000000, 8), 0.01);
}

TEST(ZeroCounts, Examples) {
  const SupportSet truth({0, 1, 4}, 8);
  auto z = zero_counts(SupportSet({0, 1, 4}, 8), truth);
  EXPECT_EQ(z.c, 5);
  EXPECT_EQ(z.i, 0);
  z = zero_counts(SupportSet({0, 4, 6}, 8), truth);
  EXPECT_EQ(z.c, 4);
  EXPECT_EQ(z.i, 1);
  z = zero_counts(SupportSet({}, 8), truth);
  EXPECT_EQ(z.c, 5);
  EXPECT_EQ(z.i, 3);
}

TEST(Presets, ShapesMatchScenarios) {
  auto presets = scenario_presets();
  EXPECT_EQ(presets.size(), 9u);
  auto ii2 = find_preset("II.2");
  EXPECT_EQ(ii2.n, 40);
  EXPECT_DOUBLE_EQ(ii2.truth.beta(3), 0.1);
  EXPECT_DOUBLE_EQ(ii2.truth.beta(7), 0.02);
  auto iii = find_preset("III-200");
  EXPECT_EQ(iii.n, 200);
  EXPECT_EQ(iii.truth.p(), 14);
  EXPECT_DOUBLE_EQ(iii.truth.beta(4), 1.0);
  EXPECT_DOUBLE_EQ(iii.truth.beta(5), 0.0);
  EXPECT_EQ(find_preset("III-400").truth.p(), 20);
  EXPECT_EQ(find_preset("I-40").truth.true_support().size(), 3);
  EXPECT_THROW(find_preset("IV"), std::invalid_argument);
}

TEST(Replicate, DeterministicForSameSeed) {
  auto cfg = small_config(1);
  auto a = run_replicate(cfg, 3), b = run_replicate(cfg, 3);
  ASSERT_EQ(a.cells.size(), 15u);
  for (std::size_t k = 0; k < a.cells.size(); ++k) {
    EXPECT_EQ(a.cells[k].lambda_hat, b.cells[k].lambda_hat);
    EXPECT_EQ(a.cells[k].rpe, b.cells[k].rpe);
    EXPECT_EQ(a.cells[k].support, b.cells[k].support);
  }
  auto c = run_replicate(cfg, 4);
  bool differs = false;
  for (std::size_t k = 0; k < a.cells.size(); ++k) differs |= a.cells[k].rpe != c.cells[k].rpe;
  EXPECT_TRUE(differs);
}

TEST(Replicate, NearNoiselessScadPassIsExact) {
  auto cfg = small_config(1);
  cfg.truth.sigma = 1e-3;
  cfg.penalties = {PenaltyKind::Scad};
  cfg.criteria = {Criterion::Pass};
  for (int r = 0; r < 5; ++r) {
    auto rep = run_replicate(cfg, r);
    const auto& cell = rep.cell(Criterion::Pass, PenaltyKind::Scad);
    ASSERT_FALSE(cell.failed) << cell.error;
    EXPECT_TRUE(cell.exact_match);
    EXPECT_EQ(cell.c_zeros, 5);
    EXPECT_EQ(cell.i_zeros, 0);
  }
}

TEST(Replicate, FailedCellIsRecordedNotThrown) {
  auto cfg = small_config(1);
  cfg.n = 6;  // Cp needs n > p = 8
  cfg.folds = 3;
  cfg.b = 2;
  cfg.criteria = {Criterion::Cp, Criterion::Bic};
  auto rep = run_replicate(cfg, 0);
  EXPECT_TRUE(rep.cell(Criterion::Cp, PenaltyKind::Lasso).failed);
  EXPECT_FALSE(rep.cell(Criterion::Cp, PenaltyKind::Lasso).error.empty());
}

TEST(Scenario, OneReplicateSummaryEqualsReplicate) {
  auto cfg = small_config(1);
  auto run = run_scenario_detailed(cfg);
  auto rep = run_replicate(cfg, 0);
  for (const auto& cell : rep.cells) {
    const auto& row = run.summary.row(cell.criterion, cell.penalty);
    EXPECT_EQ(row.replicates, 1);
    EXPECT_EQ(row.pct, cell.exact_match ? 1.0 : 0.0);
    EXPECT_EQ(row.mean_rpe, cell.rpe);
    EXPECT_EQ(row.mean_c, cell.c_zeros);
    EXPECT_EQ(row.mean_i, cell.i_zeros);
    EXPECT_EQ(row.mean_size, cell.size);
  }
}

TEST(Scenario, ThreadCountDoesNotChangeResults) {
  auto cfg = small_config(6);
  auto a = run_scenario(cfg);
  cfg.threads = 3;
  auto b = run_scenario(cfg);
  ASSERT_EQ(a.rows.size(), b.rows.size());
  for (std::size_t k = 0; k < a.rows.size(); ++k) {
    EXPECT_EQ(a.rows[k].pct, b.rows[k].pct);
    EXPECT_EQ(a.rows[k].mean_rpe, b.rows[k].mean_rpe);
    EXPECT_EQ(a.rows[k].mean_size, b.rows[k].mean_size);
  }
}

TEST(Scenario, SummaryIsOrderInvariant) {
  auto cfg = small_config(6);
  auto run = run_scenario_detailed(cfg);
  auto records = to_records(cfg.name, run.replicates);
  std::vector<Record> reversed(records.rbegin(), records.rend());
  auto rows = summarize(reversed);
  for (const auto& r : rows) {
    const auto& s = run.summary.row(r.criterion, r.penalty);
    EXPECT_NEAR(r.pct, s.pct, 1e-12);
    EXPECT_NEAR(r.mean_rpe, s.mean_rpe, 1e-12);
    EXPECT_NEAR(r.mean_c, s.mean_c, 1e-12);
  }
}

TEST(Scenario, SummaryValuesAreInRange) {
  auto cfg = small_config(6);
  auto t = run_scenario(cfg);
  EXPECT_EQ(t.rows.size(), 15u);
  EXPECT_EQ(t.total_failures(), 0);
  for (const auto& r : t.rows) {
    EXPECT_GE(r.pct, 0.0);
    EXPECT_LE(r.pct, 1.0);
    EXPECT_GE(r.mean_rpe, 0.0);
    EXPECT_GE(r.mean_c, 0.0);
    EXPECT_LE(r.mean_c, 5.0);
    EXPECT_GE(r.mean_i, 0.0);
    EXPECT_LE(r.mean_i, 3.0);
    EXPECT_NEAR(r.mean_size, 8.0 - r.mean_c - r.mean_i, 1e-12);
  }
}

TEST(Scenario, RejectsInvalidConfig) {
  auto cfg = small_config(0);
  EXPECT_THROW(run_scenario(cfg), std::invalid_argument);
  cfg = small_config(1);
  cfg.truth.rho = 1.0;
  EXPECT_THROW(run_scenario(cfg), std::invalid_argument);
}
