#pragma once

// Delimited-text input for user datasets, CSV output/input for per-replicate
// records, and the aligned summary tables.

#include "pass/model_core.hpp"
#include "pass/selection.hpp"
#include "pass/simbench.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace pass {

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

inline std::vector<std::string> split_fields(std::string_view line, char delim) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(delim, start);
    auto field = trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (field.size() >= 2 && field.front() == '"' && field.back() == '"')
      field = field.substr(1, field.size() - 2);
    out.emplace_back(field);
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

inline std::optional<long long> parse_int(std::string_view s) {
  s = trim(s);
  long long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

/// Shortest text that round-trips the double exactly.
inline std::string fmt_exact(double v) {
  if (std::isnan(v)) return "NA";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

inline std::string fmt_fixed(double v, int digits) {
  if (std::isnan(v)) return "NA";
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

}  // namespace detail

// ---------------------------------------------------------------------------
// datasets

/// Reads a table with one header row. `response` names the response column,
/// or gives its zero-based index when no header matches. All other columns
/// become covariates. Blank lines and lines starting with '#' are skipped.
inline Dataset read_dataset(std::istream& in, const std::string& response,
                            char delim = ',') {
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++lineno;
    auto t = detail::trim(line);
    if (t.empty() || t.front() == '#') continue;
    header = detail::split_fields(t, delim);
    break;
  }
  if (header.empty()) throw ParseError("dataset: missing header row");

  std::optional<std::size_t> ycol;
  for (std::size_t j = 0; j < header.size(); ++j)
    if (header[j] == response) ycol = j;
  if (!ycol) {
    if (auto idx = detail::parse_int(response); idx && *idx >= 0 &&
                                                static_cast<std::size_t>(*idx) < header.size())
      ycol = static_cast<std::size_t>(*idx);
  }
  if (!ycol) throw ParseError("dataset: response column '" + response + "' not found");
  if (header.size() < 2) throw ParseError("dataset: need at least one covariate column");

  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++lineno;
    auto t = detail::trim(line);
    if (t.empty() || t.front() == '#') continue;
    auto fields = detail::split_fields(t, delim);
    if (fields.size() != header.size())
      throw ParseError("dataset: line " + std::to_string(lineno) + " has " +
                       std::to_string(fields.size()) + " fields, expected " +
                       std::to_string(header.size()));
    std::vector<double> row;
    for (std::size_t j = 0; j < fields.size(); ++j) {
      auto v = detail::parse_double(fields[j]);
      if (!v || !std::isfinite(*v))
        throw ParseError("dataset: line " + std::to_string(lineno) + ", column '" +
                         header[j] + "': not a finite number: '" + fields[j] + "'");
      row.push_back(*v);
    }
    rows.push_back(std::move(row));
  }

  Dataset d;
  const auto n = static_cast<Index>(rows.size());
  const auto p = static_cast<Index>(header.size() - 1);
  d.x.resize(n, p);
  d.y.resize(n);
  for (std::size_t j = 0; j < header.size(); ++j)
    if (j != *ycol) d.names.push_back(header[j]);
  for (Index i = 0; i < n; ++i) {
    Index col = 0;
    for (std::size_t j = 0; j < header.size(); ++j) {
      const double v = rows[static_cast<std::size_t>(i)][j];
      if (j == *ycol) d.y(i) = v;
      else d.x(i, col++) = v;
    }
  }
  return d;
}

inline void write_dataset(std::ostream& out, const Dataset& d,
                          const std::string& response_name = "y") {
  out << response_name;
  for (Index j = 0; j < d.p(); ++j) out << ',' << d.column_name(j);
  out << '\n';
  for (Index i = 0; i < d.n(); ++i) {
    out << detail::fmt_exact(d.y(i));
    for (Index j = 0; j < d.p(); ++j) out << ',' << detail::fmt_exact(d.x(i, j));
    out << '\n';
  }
}

// ---------------------------------------------------------------------------
// per-replicate records

inline constexpr const char* kRecordHeader =
    "scenario,criterion,penalty,replicate,lambda_hat,size,exact_match,c,i,rpe";

inline void write_records(std::ostream& out, const std::vector<Record>& records) {
  out << kRecordHeader << '\n';
  for (const auto& r : records) {
    out << r.scenario << ',' << to_string(r.criterion) << ',' << to_string(r.penalty)
        << ',' << r.replicate << ',';
    if (r.failed) {
      out << "NA,NA,NA,NA,NA,NA\n";
      continue;
    }
    out << detail::fmt_exact(r.lambda_hat) << ',' << r.size << ','
        << (r.exact_match ? 1 : 0) << ',' << r.c << ',' << r.i << ','
        << detail::fmt_exact(r.rpe) << '\n';
  }
}

inline Criterion parse_criterion(std::string_view s) {
  std::string l(s);
  for (auto& ch : l) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  if (l == "pass") return Criterion::Pass;
  if (l == "bic") return Criterion::Bic;
  if (l == "cp") return Criterion::Cp;
  if (l == "cv") return Criterion::Cv;
  if (l == "gcv") return Criterion::Gcv;
  throw ParseError("unknown criterion '" + std::string(s) + "'");
}

inline PenaltyKind parse_penalty(std::string_view s) {
  std::string l(s);
  for (auto& ch : l) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  if (l == "lasso") return PenaltyKind::Lasso;
  if (l == "alasso" || l == "adaptive" || l == "adaptive_lasso") return PenaltyKind::AdaptiveLasso;
  if (l == "scad") return PenaltyKind::Scad;
  throw ParseError("unknown penalty '" + std::string(s) + "'");
}

inline std::vector<Record> read_records(std::istream& in) {
  std::vector<Record> out;
  std::string line;
  std::size_t lineno = 0;
  bool seen_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    auto t = detail::trim(line);
    if (t.empty() || t.front() == '#') continue;
    if (!seen_header) {
      if (t != kRecordHeader) throw ParseError("records: unexpected header '" + std::string(t) + "'");
      seen_header = true;
      continue;
    }
    auto f = detail::split_fields(t, ',');
    const auto where = "records: line " + std::to_string(lineno);
    if (f.size() != 10) throw ParseError(where + ": expected 10 fields");
    Record r;
    r.scenario = f[0];
    r.criterion = parse_criterion(f[1]);
    r.penalty = parse_penalty(f[2]);
    auto rep = detail::parse_int(f[3]);
    if (!rep) throw ParseError(where + ": bad replicate");
    r.replicate = static_cast<int>(*rep);
    if (f[4] == "NA") {
      r.failed = true;
      out.push_back(std::move(r));
      continue;
    }
    auto lam = detail::parse_double(f[4]);
    auto size = detail::parse_int(f[5]);
    auto exact = detail::parse_int(f[6]);
    auto c = detail::parse_int(f[7]);
    auto i = detail::parse_int(f[8]);
    auto e = detail::parse_double(f[9]);
    if (!lam || !size || !exact || !c || !i || !e) throw ParseError(where + ": malformed field");
    r.lambda_hat = *lam;
    r.size = static_cast<int>(*size);
    r.exact_match = *exact != 0;
    r.c = static_cast<int>(*c);
    r.i = static_cast<int>(*i);
    r.rpe = *e;
    out.push_back(std::move(r));
  }
  if (!seen_header) throw ParseError("records: missing header");
  return out;
}

// ---------------------------------------------------------------------------
// summary tables

namespace detail {

inline void metric_block(std::ostream& out, const SummaryTable& t,
                         const std::vector<Criterion>& crits,
                         const std::vector<PenaltyKind>& pens, const char* title,
                         const char* m1, const char* m2,
                         double SummaryRow::*f1, int d1, double SummaryRow::*f2, int d2) {
  out << title << '\n';
  out << std::left << std::setw(8) << "Method";
  for (auto c : crits) out << " | " << std::setw(15) << to_string(c);
  out << '\n' << std::setw(8) << "";
  for (std::size_t k = 0; k < crits.size(); ++k)
    out << " | " << std::setw(7) << m1 << ' ' << std::setw(7) << m2;
  out << '\n';
  for (auto p : pens) {
    out << std::setw(8) << to_string(p);
    for (auto c : crits) {
      const auto& r = t.row(c, p);
      out << " | " << std::setw(7) << fmt_fixed(r.*f1, d1) << ' ' << std::setw(7)
          << fmt_fixed(r.*f2, d2);
    }
    out << '\n';
  }
  out << '\n';
}

}  // namespace detail

/// Three blocks, PCT/RPE, C/I and Size/RPE, with
/// one row per penalty and one column group per criterion.
inline std::string format_summary(const SummaryTable& t) {
  std::vector<Criterion> crits;
  std::vector<PenaltyKind> pens;
  for (const auto& r : t.rows) {
    if (std::find(crits.begin(), crits.end(), r.criterion) == crits.end())
      crits.push_back(r.criterion);
    if (std::find(pens.begin(), pens.end(), r.penalty) == pens.end())
      pens.push_back(r.penalty);
  }
  std::ostringstream out;
  out << "scenario " << t.scenario << ": n=" << t.n << " p=" << t.p
      << " replicates=" << t.replicates << " B=" << t.b << " seed=" << t.master_seed
      << "\n\n";
  detail::metric_block(out, t, crits, pens, "Percentage of exact selection (PCT) and mean RPE",
                       "PCT", "RPE", &SummaryRow::pct, 2, &SummaryRow::mean_rpe, 3);
  detail::metric_block(out, t, crits, pens,
                       "Mean correctly (C) and incorrectly (I) selected zeros", "C", "I",
                       &SummaryRow::mean_c, 2, &SummaryRow::mean_i, 2);
  detail::metric_block(out, t, crits, pens, "Mean selected size and mean RPE", "Size", "RPE",
                       &SummaryRow::mean_size, 2, &SummaryRow::mean_rpe, 3);
  if (int f = t.total_failures(); f > 0) {
    out << "failed cells:\n";
    for (const auto& r : t.rows)
      if (r.failures > 0)
        out << "  " << to_string(r.penalty) << '/' << to_string(r.criterion) << ": "
            << r.failures << " replicate(s)\n";
  }
  return out.str();
}

}  // namespace pass
