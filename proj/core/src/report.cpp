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

#include "pereval/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "pereval/error.hpp"

namespace pereval {
namespace {

std::string table_label(const std::string& label) {
  if (label == "overall") return "Overall";
  if (auto d = parse_dimension(label)) return std::string(dimension_label(*d));
  return label;
}

std::string raw_text(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string md_field(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '|') {
      out += "\\|";
    } else if (c == '\n' || c == '\r') {
      out += ' ';
    } else {
      out += c;
    }
  }
  return out;
}

std::string md_row(const std::vector<std::string>& cells) {
  std::string line = "|";
  for (const std::string& c : cells) line += " " + md_field(c) + " |";
  return line + "\n";
}

}  // namespace

Cell Cell::number(double value, int precision) { return {format_fixed(value, precision), value}; }

std::string format_fixed(double value, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, value);
  std::string s = buf;
  if (s[0] == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
  return s;
}

std::vector<double> round_preserving_sum(std::span<const double> values, int precision) {
  const double scale = std::pow(10.0, precision);
  std::vector<long long> units(values.size());
  std::vector<double> remainder(values.size());
  double total = 0;
  long long floor_sum = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double scaled = values[i] * scale;
    units[i] = static_cast<long long>(std::floor(scaled + 1e-9));
    remainder[i] = scaled - static_cast<double>(units[i]);
    floor_sum += units[i];
    total += values[i];
  }
  long long missing = std::llround(total * scale) - floor_sum;
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t k = 0; k < order.size() && missing > 0; ++k, --missing) ++units[order[k]];
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = static_cast<double>(units[i]) / scale;
  return out;
}

Json to_json(const Table& t) {
  Json rows = Json::array();
  for (const auto& row : t.rows) {
    Json cells = Json::array();
    for (const Cell& c : row) {
      cells.push_back(c.value ? Json{{"text", c.text}, {"value", *c.value}}
                              : Json{{"text", c.text}});
    }
    rows.push_back(std::move(cells));
  }
  Json j{{"name", t.name},   {"kind", t.kind}, {"title", t.title},
         {"columns", t.columns}, {"rows", rows}, {"fingerprint", t.fingerprint}};
  if (t.group_column) j["group_column"] = *t.group_column;
  return j;
}

Table parse_table(const Json& j) {
  try {
    Table t;
    t.name = j.at("name").get<std::string>();
    t.kind = j.value("kind", "");
    t.title = j.value("title", t.name);
    t.columns = j.at("columns").get<std::vector<std::string>>();
    for (const Json& row : j.at("rows")) {
      std::vector<Cell> cells;
      for (const Json& c : row) {
        Cell cell{c.at("text").get<std::string>(), std::nullopt};
        if (auto it = c.find("value"); it != c.end() && it->is_number()) {
          cell.value = it->get<double>();
        }
        cells.push_back(std::move(cell));
      }
      if (cells.size() != t.columns.size()) {
        throw Error(ErrorCode::kMalformedRecord, "table " + t.name + ": row width mismatch");
      }
      t.rows.push_back(std::move(cells));
    }
    if (auto it = j.find("group_column"); it != j.end() && it->is_number_unsigned()) {
      t.group_column = it->get<std::size_t>();
    }
    t.fingerprint = j.value("fingerprint", Json::object());
    return t;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kMalformedRecord, std::string("table: ") + e.what());
  }
}

Table head_to_head_table(std::span<const MatchSummary> summaries, std::string name) {
  Table t;
  t.name = std::move(name);
  t.kind = "head_to_head";
  t.title = "Head-to-head records";
  t.columns = {"Pair", "Dimension", "Win", "Loss", "Tie", "Cases"};
  t.group_column = 0;
  for (const MatchSummary& s : summaries) {
    const double raw[3] = {s.win_rate, s.loss_rate, s.tie_rate};
    const auto shown = round_preserving_sum(raw, 1);
    std::vector<Cell> row{Cell::of(s.generator_a + " vs " + s.generator_b),
                          Cell::of(std::string(dimension_label(s.dimension)))};
    for (int i = 0; i < 3; ++i) row.push_back({format_fixed(shown[i], 1), raw[i]});
    row.push_back(Cell::number(s.cases, 0));
    t.rows.push_back(std::move(row));
  }
  return t;
}

Table elo_table(std::span<const EloTable> tables, std::string name) {
  Table t;
  t.name = std::move(name);
  t.kind = "elo";
  t.title = "Elo ratings (bootstrap median)";
  t.columns = {"Generator"};
  for (const EloTable& e : tables) t.columns.push_back(table_label(e.label));
  if (tables.empty()) return t;
  const EloTable* primary = &tables.front();
  for (const EloTable& e : tables) {
    if (e.label == "overall") primary = &e;
  }
  std::vector<std::string> players = primary->order();
  for (const EloTable& e : tables) {
    for (const EloRow& r : e.rows) {
      if (std::find(players.begin(), players.end(), r.player) == players.end()) {
        players.push_back(r.player);
      }
    }
  }
  for (const std::string& p : players) {
    std::vector<Cell> row{Cell::of(p)};
    for (const EloTable& e : tables) {
      const EloRow* r = e.find(p);
      row.push_back(r ? Cell::number(r->median, 0) : Cell::of(""));
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

Table elo_interval_table(std::span<const EloTable> tables, std::string name) {
  Table t;
  t.name = std::move(name);
  t.kind = "elo";
  t.title = "Elo bootstrap intervals";
  t.columns = {"Table", "Generator", "Median", "CI low", "CI high", "Games", "Rounds"};
  t.group_column = 0;
  for (const EloTable& e : tables) {
    for (const EloRow& r : e.rows) {
      t.rows.push_back({Cell::of(table_label(e.label)), Cell::of(r.player),
                        Cell::number(r.median, 0), Cell::number(r.ci_low, 0),
                        Cell::number(r.ci_high, 0),
                        Cell::number(static_cast<double>(e.games), 0),
                        Cell::number(e.rounds, 0)});
    }
  }
  return t;
}

Table curve_table(std::span<const CurvePoint> curve, std::string name, std::string title) {
  Table t;
  t.name = std::move(name);
  t.kind = "curve";
  t.title = std::move(title);
  t.columns = {"size", "estimate", "repetitions", "mean_ties"};
  for (const CurvePoint& p : curve) {
    t.rows.push_back({Cell::number(p.size, 0), Cell::number(p.estimate, 3),
                      Cell::number(p.repetitions, 0), Cell::number(p.mean_ties, 2)});
  }
  return t;
}

Table agreement_table(std::span<const AgreementRow> rows, std::string name) {
  Table t;
  t.name = std::move(name);
  t.kind = "agreement";
  t.title = "Agreement with assumed truth";
  t.columns = {"Pair", "Dimension", "Source", "Cases", "Agreement", "CI low", "CI high"};
  t.group_column = 0;
  for (const AgreementRow& r : rows) {
    t.rows.push_back({Cell::of(r.stronger + " > " + r.weaker),
                      Cell::of(std::string(dimension_label(r.dimension))), Cell::of(r.source),
                      Cell::number(r.cases, 0), Cell::number(r.agreement, 3),
                      Cell::number(r.ci_low, 3), Cell::number(r.ci_high, 3)});
  }
  return t;
}

Table inter_rater_table(std::span<const RaterAgreement> rows, std::string name) {
  Table t;
  t.name = std::move(name);
  t.kind = "inter_rater";
  t.title = "Inter-rater agreement";
  t.columns = {"Dimension", "Cases", "Raw agreement", "Kappa"};
  for (const RaterAgreement& r : rows) {
    t.rows.push_back({Cell::of(std::string(dimension_label(r.dimension))),
                      Cell::number(r.cases, 0), Cell::number(r.raw, 2),
                      Cell::number(r.kappa, 2)});
  }
  return t;
}

Table metric_table(std::span<const MetricKind> metrics, std::span<const MetricRow> rows,
                   std::string name) {
  Table t;
  t.name = std::move(name);
  t.kind = "metric";
  t.title = "Reference metrics";
  t.columns = {"Generator"};
  for (MetricKind m : metrics) t.columns.emplace_back(metric_name(m));
  for (const MetricRow& r : rows) {
    if (r.scores.size() != metrics.size()) {
      throw Error(ErrorCode::kInvalidArgument, "metric row width mismatch for " + r.generator);
    }
    std::vector<Cell> row{Cell::of(r.generator)};
    for (double v : r.scores) row.push_back(Cell::number(v, 2));
    t.rows.push_back(std::move(row));
  }
  return t;
}

std::optional<ReportFormat> parse_report_format(std::string_view s) {
  if (s == "md" || s == "markdown") return ReportFormat::kMarkdown;
  if (s == "csv") return ReportFormat::kCsv;
  if (s == "records" || s == "jsonl") return ReportFormat::kRecords;
  return std::nullopt;
}

std::string render_markdown(const ReportBundle& bundle) {
  std::string out = "# Evaluation report\n\n";
  out += "- generated_at: " + bundle.generated_at + "\n";
  out += "- fingerprint: `" + bundle.fingerprint.dump() + "`\n";
  for (const Table& t : bundle.tables) {
    out += "\n## " + t.title + "\n";
    std::vector<std::string> header;
    for (std::size_t c = 0; c < t.columns.size(); ++c) {
      if (c != t.group_column) header.push_back(t.columns[c]);
    }
    std::vector<std::string> rule;
    for (std::size_t c = 0; c < header.size(); ++c) rule.push_back("---");
    const auto start_block = [&](const std::string* group) {
      out += "\n";
      if (group) out += "**" + md_field(*group) + "**\n\n";
      out += md_row(header);
      out += md_row(rule);
    };
    const std::string* current = nullptr;
    if (!t.group_column || t.rows.empty()) start_block(nullptr);
    for (const auto& row : t.rows) {
      if (t.group_column) {
        const std::string& g = row[*t.group_column].text;
        if (!current || *current != g) {
          current = &g;
          start_block(current);
        }
      }
      std::vector<std::string> cells;
      for (std::size_t c = 0; c < row.size(); ++c) {
        if (c != t.group_column) cells.push_back(row[c].text);
      }
      out += md_row(cells);
    }
  }
  return out;
}

std::string render_records(const ReportBundle& bundle) {
  std::string out = dump_line(Json{{"record", "report"},
                                   {"generated_at", bundle.generated_at},
                                   {"fingerprint", bundle.fingerprint}});
  for (const Table& t : bundle.tables) {
    for (const auto& row : t.rows) {
      Json j{{"record", "row"}, {"table", t.name}, {"kind", t.kind}};
      for (std::size_t c = 0; c < row.size(); ++c) {
        j[t.columns[c]] = row[c].value ? Json(*row[c].value) : Json(row[c].text);
      }
      out += dump_line(j);
    }
  }
  return out;
}

std::vector<std::pair<std::string, std::string>> render_csv(const ReportBundle& bundle) {
  std::vector<std::pair<std::string, std::string>> files;
  for (const Table& t : bundle.tables) {
    std::vector<bool> numeric(t.columns.size(), false);
    for (const auto& row : t.rows) {
      for (std::size_t c = 0; c < row.size(); ++c) numeric[c] = numeric[c] || row[c].value;
    }
    std::string text;
    for (std::size_t c = 0; c < t.columns.size(); ++c) {
      text += (c ? "," : "") + csv_field(t.columns[c]);
      if (numeric[c]) text += "," + csv_field(t.columns[c] + "_raw");
    }
    text += "\n";
    for (const auto& row : t.rows) {
      for (std::size_t c = 0; c < row.size(); ++c) {
        text += (c ? "," : "") + csv_field(row[c].text);
        if (numeric[c]) text += "," + (row[c].value ? raw_text(*row[c].value) : std::string());
      }
      text += "\n";
    }
    files.emplace_back(t.name + ".csv", std::move(text));
  }
  return files;
}

void render(const ReportBundle& bundle, ReportFormat format, const std::filesystem::path& out) {
  switch (format) {
    case ReportFormat::kMarkdown:
      write_text(out, render_markdown(bundle));
      return;
    case ReportFormat::kRecords:
      write_text(out, render_records(bundle));
      return;
    case ReportFormat::kCsv: {
      std::error_code ec;
      std::filesystem::create_directories(out, ec);
      if (ec || !std::filesystem::is_directory(out)) {
        throw Error(ErrorCode::kUnwritablePath, "cannot create directory " + out.string());
      }
      for (const auto& [file, text] : render_csv(bundle)) write_text(out / file, text);
      return;
    }
  }
}

ReportBundle load_bundle(const std::filesystem::path& dir, std::string generated_at) {
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) {
    throw Error(ErrorCode::kIo, "not a directory: " + dir.string());
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const std::string fn = entry.path().filename().string();
    if (entry.is_regular_file() && fn.size() > 11 && fn.ends_with(".table.json")) {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  ReportBundle bundle;
  bundle.generated_at = std::move(generated_at);
  for (const auto& f : files) {
    std::ifstream in(f);
    Json j;
    try {
      j = Json::parse(in);
    } catch (const Json::exception& e) {
      throw Error(ErrorCode::kMalformedRecord, f.string() + ": " + e.what());
    }
    Table t = parse_table(j);
    if (!t.fingerprint.empty()) bundle.fingerprint[t.name] = t.fingerprint;
    bundle.tables.push_back(std::move(t));
  }
  return bundle;
}

void write_table(const Table& table, const std::filesystem::path& dir) {
  write_text(dir / (table.name + ".table.json"), to_json(table).dump(2) + "\n");
}

}  // namespace pereval
