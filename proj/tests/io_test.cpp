#include "pass/io.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace pass;

TEST(ReadDataset, ResponseByName) {
  std::istringstream in("# comment\nx1,y,x2\n1,2,3\n\n4,5,6\n");
  auto d = read_dataset(in, "y");
  ASSERT_EQ(d.n(), 2);
  ASSERT_EQ(d.p(), 2);
  EXPECT_EQ(d.names, (std::vector<std::string>{"x1", "x2"}));
  EXPECT_EQ(d.y(1), 5.0);
  EXPECT_EQ(d.x(1, 1), 6.0);
}

TEST(ReadDataset, ResponseByIndexAndDelimiter) {
  std::istringstream in("a;b;c\n1;2;3\n4;5;6\n");
  auto d = read_dataset(in, "2", ';');
  EXPECT_EQ(d.y(0), 3.0);
  EXPECT_EQ(d.names, (std::vector<std::string>{"a", "b"}));
}

TEST(ReadDataset, ErrorsNameTheProblem) {
  auto message = [](const std::string& text, const std::string& resp) {
    std::istringstream in(text);
    try {
      read_dataset(in, resp);
    } catch (const ParseError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  EXPECT_NE(message("x,y\n1,2\n3\n", "y").find("line 3"), std::string::npos);
  EXPECT_NE(message("x,y\n1,abc\n", "y").find("column 'y'"), std::string::npos);
  EXPECT_NE(message("x,y\n1,nan\n", "y").find("finite"), std::string::npos);
  EXPECT_NE(message("x,y\n1,2\n", "z").find("'z'"), std::string::npos);
  EXPECT_NE(message("", "y").find("header"), std::string::npos);
  EXPECT_NE(message("y\n1\n", "y").find("covariate"), std::string::npos);
}

TEST(WriteDataset, RoundTripsExactly) {
  Dataset d;
  d.x = Matrix(2, 2);
  d.x << 0.1, -1.0 / 3.0, 1e-300, 12345.678;
  d.y = Vector(2);
  d.y << 2.0 / 7.0, -0.0;
  d.names = {"u", "v"};
  std::stringstream s;
  write_dataset(s, d, "resp");
  auto back = read_dataset(s, "resp");
  EXPECT_EQ(back.x, d.x);
  EXPECT_EQ(back.y, d.y);
  EXPECT_EQ(back.names, d.names);
}

TEST(Records, RoundTripGivesIdenticalSummary) {
  auto cfg = find_preset("I-40");
  cfg.replicates = 4;
  cfg.grid = log_grid(-2, 2, 20);
  cfg.b = 4;
  cfg.folds = 4;
  auto run = run_scenario_detailed(cfg);
  auto records = to_records(cfg.name, run.replicates);
  records[1].failed = true;  // exercise the NA path

  std::stringstream s;
  write_records(s, records);
  auto back = read_records(s);
  ASSERT_EQ(back.size(), records.size());
  EXPECT_TRUE(back[1].failed);
  auto a = summarize(records), b = summarize(back);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    EXPECT_EQ(a[k].criterion, b[k].criterion);
    EXPECT_EQ(a[k].penalty, b[k].penalty);
    EXPECT_EQ(a[k].failures, b[k].failures);
    EXPECT_EQ(a[k].pct, b[k].pct);
    EXPECT_EQ(a[k].mean_rpe, b[k].mean_rpe);
    EXPECT_EQ(a[k].mean_size, b[k].mean_size);
  }
}

TEST(Records, RejectsMalformedInput) {
  std::istringstream bad_header("a,b\n");
  EXPECT_THROW(read_records(bad_header), ParseError);
  std::istringstream short_row(std::string(kRecordHeader) + "\nI-40,PASS,SCAD,0\n");
  EXPECT_THROW(read_records(short_row), ParseError);
  std::istringstream bad_name(std::string(kRecordHeader) + "\nI-40,AIC,SCAD,0,1,3,1,5,0,0.1\n");
  EXPECT_THROW(read_records(bad_name), ParseError);
}

TEST(Parse, NamesAreCaseInsensitive) {
  EXPECT_EQ(parse_criterion("Cp"), Criterion::Cp);
  EXPECT_EQ(parse_criterion("PASS"), Criterion::Pass);
  EXPECT_EQ(parse_penalty("aLASSO"), PenaltyKind::AdaptiveLasso);
  EXPECT_EQ(parse_penalty("scad"), PenaltyKind::Scad);
  EXPECT_THROW(parse_penalty("ridge"), ParseError);
}

TEST(FormatSummary, ContainsEveryCell) {
  auto cfg = find_preset("I-40");
  cfg.replicates = 2;
  cfg.grid = log_grid(-2, 2, 10);
  cfg.b = 2;
  cfg.folds = 4;
  auto text = format_summary(run_scenario(cfg));
  for (const char* s : {"PASS", "BIC", "Cp", "CV", "GCV", "LASSO", "aLASSO", "SCAD", "I-40"})
    EXPECT_NE(text.find(s), std::string::npos) << s;
}
