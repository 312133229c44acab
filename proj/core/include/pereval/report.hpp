// Copyright 2026 The pereval Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Result tables and their Markdown, CSV and record renderings.

#ifndef PEREVAL_REPORT_HPP_
#define PEREVAL_REPORT_HPP_

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pereval/metrics.hpp"
#include "pereval/model.hpp"
#include "pereval/rating.hpp"
#include "pereval/records.hpp"
#include "pereval/stats.hpp"

namespace pereval {

/// Formatted text plus, for numbers, the unrounded value.
struct Cell {
  std::string text;
  std::optional<double> value;

  static Cell of(std::string text) { return {std::move(text), std::nullopt}; }
  static Cell number(double value, int precision);

  friend bool operator==(const Cell&, const Cell&) = default;
};

struct Table {
  std::string name;   // file stem, e.g. "head_to_head"
  std::string kind;   // head_to_head, elo, metric, curve, agreement, inter_rater
  std::string title;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  /// Markdown groups consecutive rows by this column and prints it as a
  /// subheading instead of a column.
  std::optional<std::size_t> group_column;
  Json fingerprint = Json::object();

  friend bool operator==(const Table&, const Table&) = default;
};

Json to_json(const Table& t);
Table parse_table(const Json& j);

struct ReportBundle {
  std::string generated_at;
  Json fingerprint = Json::object();
  std::vector<Table> tables;
};

/// Fixed-point text with `precision` decimals; never prints "-0".
std::string format_fixed(double value, int precision);

/// Rounds percentages to `precision` decimals so that the rounded values sum
/// to the rounded total (largest remainder).
std::vector<double> round_preserving_sum(std::span<const double> values, int precision);

/// Pair -> dimension rows of win / loss / tie rates, one decimal.
Table head_to_head_table(std::span<const MatchSummary> summaries,
                         std::string name = "head_to_head");

/// One row per generator with the median rating of every table (no decimals),
/// best overall (or first table) first.
Table elo_table(std::span<const EloTable> tables, std::string name = "elo");

/// Median and percentile interval per table and generator.
Table elo_interval_table(std::span<const EloTable> tables, std::string name = "elo_intervals");

/// Columns size, estimate, repetitions, mean_ties.
Table curve_table(std::span<const CurvePoint> curve, std::string name, std::string title);

Table agreement_table(std::span<const AgreementRow> rows, std::string name = "agreement");
Table inter_rater_table(std::span<const RaterAgreement> rows, std::string name = "inter_rater");

struct MetricRow {
  std::string generator;
  std::vector<double> scores;  // in the order of the table's metrics
};

/// Mean metric scores per generator, two decimals.
Table metric_table(std::span<const MetricKind> metrics, std::span<const MetricRow> rows,
                   std::string name = "metrics");

enum class ReportFormat { kMarkdown, kCsv, kRecords };

std::optional<ReportFormat> parse_report_format(std::string_view s);  // md, csv, records

std::string render_markdown(const ReportBundle& bundle);
std::string render_records(const ReportBundle& bundle);
/// Per table, "<name>.csv"; numeric columns gain a "<column>_raw" column.
std::vector<std::pair<std::string, std::string>> render_csv(const ReportBundle& bundle);

/// Markdown and records go to the file `out`; CSV files go into directory
/// `out`. Throws Error(kUnwritablePath).
void render(const ReportBundle& bundle, ReportFormat format, const std::filesystem::path& out);

/// Reads every "*.table.json" under `dir` in file-name order. The bundle
/// fingerprint maps table names to their fingerprints.
ReportBundle load_bundle(const std::filesystem::path& dir, std::string generated_at);

void write_table(const Table& table, const std::filesystem::path& dir);

}  // namespace pereval

#endif  // PEREVAL_REPORT_HPP_
