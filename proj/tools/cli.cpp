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

#include "cli.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <sstream>

#include "pereval/annotation.hpp"
#include "pereval/backends.hpp"
#include "pereval/error.hpp"
#include "pereval/ingest.hpp"
#include "pereval/judge.hpp"
#include "pereval/metrics.hpp"
#include "pereval/rating.hpp"
#include "pereval/records.hpp"
#include "pereval/report.hpp"
#include "pereval/simulate.hpp"
#include "pereval/stats.hpp"

namespace pereval::cli {
namespace {

namespace fs = std::filesystem;
using Pair = std::pair<std::string, std::string>;

constexpr char kFixedTimestamp[] = "1970-01-01T00:00:00Z";

/// A usage problem detected after flag parsing (exit code 2).
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Context {
  std::ostream& out;
  std::ostream& err;
  bool deterministic = false;
  std::size_t threads = 0;
  std::function<void()> action;
};

std::vector<std::string> split_list(const std::string& s, char sep = ',') {
  std::vector<std::string> items;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, sep);) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) items.push_back(item.substr(b, e - b + 1));
  }
  return items;
}

Pair parse_pair(const std::string& s) {
  const auto parts = split_list(s);
  if (parts.size() != 2 || parts[0] == parts[1]) {
    throw UsageError("--pair expects two different generator ids as A,B (got '" + s + "')");
  }
  return {parts[0], parts[1]};
}

std::vector<Dimension> parse_dimensions(const std::string& s) {
  std::vector<Dimension> dims;
  for (const std::string& item : split_list(s)) {
    const auto d = parse_dimension(item);
    if (!d) throw UsageError("--dims: unknown dimension '" + item + "'");
    if (std::find(dims.begin(), dims.end(), *d) == dims.end()) dims.push_back(*d);
  }
  if (dims.empty()) throw UsageError("--dims must name at least one dimension");
  return dims;
}

std::vector<int> parse_sizes(const std::string& s) {
  std::vector<int> sizes;
  for (const std::string& item : split_list(s)) {
    try {
      std::size_t used = 0;
      const int v = std::stoi(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      sizes.push_back(v);
    } catch (const std::exception&) {
      throw UsageError("--sizes: '" + item + "' is not an integer");
    }
  }
  return sizes;
}

/// Generators in order of first appearance.
std::vector<std::string> generators_of(std::span<const CandidateOutput> outputs) {
  std::vector<std::string> gens;
  for (const CandidateOutput& o : outputs) {
    if (std::find(gens.begin(), gens.end(), o.generator_id) == gens.end()) {
      gens.push_back(o.generator_id);
    }
  }
  return gens;
}

std::vector<Pair> resolve_pairs(const std::vector<std::string>& pair_flags, bool all_pairs,
                                std::span<const CandidateOutput> outputs) {
  std::vector<Pair> pairs;
  for (const std::string& p : pair_flags) pairs.push_back(parse_pair(p));
  if (all_pairs) {
    const auto gens = generators_of(outputs);
    for (std::size_t i = 0; i < gens.size(); ++i) {
      for (std::size_t j = i + 1; j < gens.size(); ++j) pairs.emplace_back(gens[i], gens[j]);
    }
  }
  if (pairs.empty()) throw UsageError("name a pair with --pair A,B or use --all-pairs");
  return pairs;
}

std::vector<CaseOutcome> read_all_outcomes(const std::vector<std::string>& files,
                                           const std::string& source) {
  std::vector<CaseOutcome> all;
  for (const std::string& f : files) {
    for (CaseOutcome& o : read_outcomes(f)) {
      if (source.empty() || o.source == source) all.push_back(std::move(o));
    }
  }
  return all;
}

std::string timestamp_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// Writes tables as "*.table.json" into `tables_dir` (when set), the first
/// table as CSV to `csv_out` (when set), and a Markdown view to stdout.
void emit(Context& ctx, const std::vector<Table>& tables, const std::string& tables_dir,
          const std::string& csv_out) {
  for (const Table& t : tables) {
    if (!tables_dir.empty()) write_table(t, tables_dir);
  }
  if (!csv_out.empty() && !tables.empty()) {
    ReportBundle one;
    one.tables.push_back(tables.front());
    write_text(csv_out, render_csv(one).front().second);
  }
  for (const Table& t : tables) {
    ReportBundle view;
    view.tables.push_back(t);
    const std::string md = render_markdown(view);
    // Skip the document header; show the table only.
    ctx.out << md.substr(md.find("\n## ") + 1);
  }
}

// ---------------------------------------------------------------------------

void add_prepare(CLI::App& app, Context& ctx) {
  auto* sub = app.add_subcommand("prepare", "Filter raw documents into train/validation/test cases");
  struct Opts {
    std::string in, out_dir, split = "85/5/10";
    PrepareConfig config;
  };
  auto o = std::make_shared<Opts>();
  sub->add_option("--in", o->in, "Raw documents (JSONL: user_id, timestamp, immediate_context, text)")
      ->required();
  sub->add_option("--out-dir", o->out_dir, "Directory for train/validation/test.jsonl")->required();
  sub->add_option("--min-chars", o->config.min_chars, "Keep documents longer than this")
      ->capture_default_str();
  sub->add_option("--min-prior-docs", o->config.min_prior_docs,
                  "Earlier documents required before a kept document")
      ->capture_default_str();
  sub->add_option("--min-user-examples", o->config.min_user_examples,
                  "Drop users with fewer kept documents")
      ->capture_default_str();
  sub->add_option("--max-user-examples", o->config.max_user_examples,
                  "Keep at most this many (earliest) per user")
      ->capture_default_str();
  sub->add_option("--split", o->split, "Train/validation/test percentages")->capture_default_str();
  sub->add_option("--seed", o->config.seed, "User split seed")->capture_default_str();
  sub->callback([&ctx, o] {
    ctx.action = [&ctx, o] {
      const auto parts = split_list(o->split, '/');
      if (parts.size() != 3) throw UsageError("--split expects three percentages like 85/5/10");
      for (int i = 0; i < 3; ++i) o->config.split_percent[i] = std::stoi(parts[i]);
      const auto docs = read_records(o->in, &parse_raw_document);
      const DatasetSplits splits = prepare(docs, o->config);
      const fs::path dir(o->out_dir);
      write_records(dir / "train.jsonl", splits.train);
      write_records(dir / "validation.jsonl", splits.validation);
      write_records(dir / "test.jsonl", splits.test);
      ctx.out << "train " << splits.train.size() << "\nvalidation " << splits.validation.size()
              << "\ntest " << splits.test.size() << "\n";
    };
  });
}

void add_sample(CLI::App& app, Context& ctx) {
  auto* sub = app.add_subcommand("sample", "Draw a seeded sample of test cases");
  struct Opts {
    std::string in, out;
    std::size_t n = 0;
    std::uint64_t seed = 0;
  };
  auto o = std::make_shared<Opts>();
  sub->add_option("--in", o->in, "Cases (JSONL)")->required();
  sub->add_option("--out", o->out, "Sampled cases (JSONL)")->required();
  sub->add_option("-n,--n", o->n, "Number of cases")->required();
  sub->add_option("--seed", o->seed, "Sampling seed")->capture_default_str();
  sub->callback([&ctx, o] {
    ctx.action = [&ctx, o] {
      const auto cases = read_cases(o->in);
      write_records(o->out, sample_cases(cases, o->n, o->seed));
      ctx.out << "sampled " << o->n << " of " << cases.size() << "\n";
    };
  });
}

void add_ablate(CLI::App& app, Context& ctx) {
  auto* sub = app.add_subcommand("ablate", "Swap personal or immediate contexts across cases");
  struct Opts {
    std::string in, out, mode;
    std::uint64_t seed = 0;
  };
  auto o = std::make_shared<Opts>();
  sub->add_option("--in", o->in, "Cases (JSONL)")->required();
  sub->add_option("--out", o->out, "Ablated cases (JSONL)")->required();
  sub->add_option("--mode", o->mode, "Field to swap")
      ->required()
      ->check(CLI::IsMember({"personal", "immediate"}));
  sub->add_option("--seed", o->seed, "Derangement seed")->capture_default_str();
  sub->callback([&ctx, o] {
    ctx.action = [&ctx, o] {
      const auto mode = o->mode == "personal" ? AblationMode::kSwapPersonalContext
                                              : AblationMode::kSwapImmediateContext;
      const auto cases = read_cases(o->in);
      write_records(o->out, ablate(cases, mode, o->seed));
      ctx.out << "ablated " << cases.size() << " cases\n";
    };
  });
}

void add_judge(CLI::App& app, Context& ctx) {
  auto* sub = app.add_subcommand("judge", "Pairwise judging with order-balanced replicas");
  struct Opts {
    std::string cases, outputs, dims = "p,q,r", outcomes, log, tables, csv;
    std::vector<std::string> pairs;
    bool all_pairs = false;
    std::string endpoint, replay, simulated, order = "balanced";
    ReplicationPlan plan;
    std::size_t max_in_flight = 8;
    std::optional<std::size_t> profile_examples;
    std::size_t char_budget = 4000;
    std::string prompts;
    RemoteFieldMap fields;
    std::string extra_body;
    int timeout_seconds = 120;
  };
  auto o = std::make_shared<Opts>();
  sub->add_option("--cases", o->cases, "Cases (JSONL)")->required();
  sub->add_option("--outputs", o->outputs, "Candidate outputs (JSONL)")->required();
  sub->add_option("--pair", o->pairs, "Generator pair A,B (repeatable)");
  sub->add_flag("--all-pairs", o->all_pairs, "Judge every pair of generators in --outputs");
  sub->add_option("--dims", o->dims, "Dimensions (p,q,r or names)")->capture_default_str();
  sub->add_option("--outcomes", o->outcomes, "Case outcomes (JSONL)")->required();
  sub->add_option("--judgments-log", o->log, "Append raw replicas here (JSONL)");
  sub->add_option("--tables", o->tables, "Directory for report tables");
  sub->add_option("--csv", o->csv, "Head-to-head table as CSV");
  sub->add_option("--endpoint", o->endpoint, "Remote judge URL (env AUPEL_JUDGE_URL)");
  sub->add_option("--replay", o->replay, "Serve responses from a judgments log");
  sub->add_option("--simulated", o->simulated, "Simulated judge config (JSON)");
  sub->add_option("--replicas", o->plan.replicas, "Replicas per case, even")->capture_default_str();
  sub->add_option("--temperature", o->plan.temperature, "Sampling temperature")
      ->capture_default_str();
  sub->add_option("--max-tokens", o->plan.max_tokens, "Response token cap")->capture_default_str();
  sub->add_option("--tie-margin", o->plan.tie_margin,
                  "Tie when |prefers_a - prefers_b| <= margin")
      ->capture_default_str();
  sub->add_option("--order", o->order, "Presentation order plan")
      ->check(CLI::IsMember({"balanced", "a-first"}))
      ->capture_default_str();
  sub->add_option("--max-in-flight", o->max_in_flight, "Concurrent cases")->capture_default_str();
  sub->add_option("--profile-examples", o->profile_examples,
                  "Profile examples in personalization prompts (default all)");
  sub->add_option("--char-budget", o->char_budget, "Characters per inserted text block")
      ->capture_default_str();
  sub->add_option("--prompts", o->prompts,
                  "JSON object of instruction templates keyed by dimension");
  sub->add_option("--field-prompt", o->fields.prompt, "Request field for the prompt")
      ->capture_default_str();
  sub->add_option("--field-temperature", o->fields.temperature, "Request field for temperature")
      ->capture_default_str();
  sub->add_option("--field-max-tokens", o->fields.max_tokens, "Request field for max tokens")
      ->capture_default_str();
  sub->add_option("--response-pointer", o->fields.response_pointer,
                  "JSON pointer to the response text")
      ->capture_default_str();
  sub->add_option("--extra-body", o->extra_body, "JSON object merged into every request");
  sub->add_option("--timeout", o->timeout_seconds, "Remote read timeout in seconds")
      ->capture_default_str();
  sub->callback([&ctx, o] {
    ctx.action = [&ctx, o] {
      std::string endpoint = o->endpoint;
      if (endpoint.empty() && o->replay.empty() && o->simulated.empty()) {
        if (const char* env = std::getenv("AUPEL_JUDGE_URL")) endpoint = env;
      }
      const int backends = !endpoint.empty() + !o->replay.empty() + !o->simulated.empty();
      if (backends == 0) {
        throw UsageError("missing backend: pass --endpoint (or set AUPEL_JUDGE_URL), --replay or "
                         "--simulated");
      }
      if (backends > 1) throw UsageError("choose one of --endpoint, --replay, --simulated");

      std::unique_ptr<JudgeBackend> backend;
      Json fingerprint;
      if (!o->simulated.empty()) {
        std::ifstream in(o->simulated);
        if (!in) throw Error(ErrorCode::kIo, "cannot open " + o->simulated);
        Json j;
        try {
          j = Json::parse(in);
        } catch (const Json::exception& e) {
          throw Error(ErrorCode::kMalformedRecord, o->simulated + ": " + e.what());
        }
        backend = std::make_unique<SimulatedJudge>(parse_simulated_judge_config(j));
      } else if (!o->replay.empty()) {
        backend = std::make_unique<ReplayCache>(ReplayCache::from_file(o->replay));
      } else {
        RemoteConfig rc;
        rc.url = endpoint;
        if (const char* token = std::getenv("AUPEL_JUDGE_TOKEN")) rc.bearer_token = token;
        rc.fields = o->fields;
        if (!o->extra_body.empty()) {
          try {
            rc.extra_body = Json::parse(o->extra_body);
          } catch (const Json::exception& e) {
            throw UsageError(std::string("--extra-body is not JSON: ") + e.what());
          }
          if (!rc.extra_body.is_object()) throw UsageError("--extra-body must be a JSON object");
        }
        rc.timeout = std::chrono::seconds(o->timeout_seconds);
        backend = std::make_unique<RemoteEndpoint>(rc);
      }

      JudgeOptions options;
      options.plan = o->plan;
      options.plan.order =
          o->order == "balanced" ? PresentationOrder::kBalanced : PresentationOrder::kAlwaysAFirst;
      options.max_in_flight = o->max_in_flight;
      for (JudgePromptSpec& spec : options.prompts) {
        spec.profile_example_budget = o->profile_examples;
        spec.char_budget = o->char_budget;
      }
      if (!o->prompts.empty()) {
        std::ifstream in(o->prompts);
        if (!in) throw Error(ErrorCode::kIo, "cannot open " + o->prompts);
        Json j;
        try {
          j = Json::parse(in);
        } catch (const Json::exception& e) {
          throw Error(ErrorCode::kMalformedRecord, o->prompts + ": " + e.what());
        }
        for (auto it = j.begin(); it != j.end(); ++it) {
          const auto d = parse_dimension(it.key());
          if (!d || !it->is_string()) {
            throw Error(ErrorCode::kInvalidTemplate, "bad prompt entry '" + it.key() + "'");
          }
          options.prompts[static_cast<std::size_t>(*d)].instruction = it->get<std::string>();
        }
      }
      std::unique_ptr<JsonlJudgmentLog> log;
      if (!o->log.empty()) {
        log = std::make_unique<JsonlJudgmentLog>(o->log);
        options.sink = log.get();
      }

      const auto cases = read_cases(o->cases);
      const auto outputs = read_outputs(o->outputs);
      const auto dims = parse_dimensions(o->dims);
      const auto pairs = resolve_pairs(o->pairs, o->all_pairs, outputs);
      const PairwiseJudge judge(*backend, options);

      std::vector<CaseOutcome> outcomes;
      std::vector<MatchSummary> summaries;
      std::vector<CaseFailure> failures;
      for (const Pair& pair : pairs) {
        PairJudgment r = judge.judge_pair(cases, outputs, pair, dims);
        outcomes.insert(outcomes.end(), r.outcomes.begin(), r.outcomes.end());
        summaries.insert(summaries.end(), r.summaries.begin(), r.summaries.end());
        failures.insert(failures.end(), r.failures.begin(), r.failures.end());
        for (const std::string& w : r.warnings) ctx.err << "warning: " << w << "\n";
      }
      write_records(o->outcomes, outcomes);

      Table table = head_to_head_table(summaries);
      table.fingerprint = Json{{"backend_id", backend->backend_id()},
                               {"replicas", options.plan.replicas},
                               {"order", o->order},
                               {"temperature", options.plan.temperature},
                               {"tie_margin", options.plan.tie_margin},
                               {"cases", cases.size()}};
      emit(ctx, {table}, o->tables, o->csv);

      if (!failures.empty()) {
        const std::string path = o->outcomes + ".failures.jsonl";
        std::string text;
        for (const CaseFailure& f : failures) {
          text += dump_line(Json{{"case_id", f.case_id},
                                 {"dimension", dimension_name(f.dimension)},
                                 {"message", f.message}});
        }
        write_text(path, text);
        throw Error(ErrorCode::kBackendUnavailable,
                    std::to_string(failures.size()) + " case judgments failed; see " + path);
      }
    };
  });
}

void add_baseline(CLI::App& app, Context& ctx) {
  auto* sub = app.add_subcommand("baseline", "Reference-metric pairwise evaluator");
  struct Opts {
    std::string cases, outputs, metric, dims = "p,q,r", outcomes, tables, csv;
    std::vector<std::string> pairs;
    bool all_pairs = false;
    double epsilon = 1e-9;
  };
  auto o = std::make_shared<Opts>();
  sub->add_option("--cases", o->cases, "Cases with references (JSONL)")->required();
  sub->add_option("--outputs", o->outputs, "Candidate outputs (JSONL)")->required();
  sub->add_option("--metric", o->metric, "Metric")
      ->required()
      ->check(CLI::IsMember({"bleu", "rouge1", "rouge2", "rougeL"}));
  sub->add_option("--pair", o->pairs, "Generator pair A,B (repeatable)");
  sub->add_flag("--all-pairs", o->all_pairs, "Compare every pair of generators");
  sub->add_option("--dims", o->dims, "Dimensions to stamp on outcomes")->capture_default_str();
  sub->add_option("--epsilon", o->epsilon, "Tie tolerance on the 0-100 scale")
      ->capture_default_str();
  sub->add_option("--outcomes", o->outcomes, "Case outcomes (JSONL)")->required();
  sub->add_option("--tables", o->tables, "Directory for report tables");
  sub->add_option("--csv", o->csv, "Metric table as CSV");
  sub->callback([&ctx, o] {
    ctx.action = [&ctx, o] {
      const MetricKind kind = *parse_metric(o->metric);
      const auto cases = read_cases(o->cases);
      const auto outputs = read_outputs(o->outputs);
      const auto dims = parse_dimensions(o->dims);
      const auto pairs = resolve_pairs(o->pairs, o->all_pairs, outputs);
      std::vector<CaseOutcome> outcomes;
      std::vector<MatchSummary> summaries;
      for (const Pair& pair : pairs) {
        auto r = metric_outcomes(cases, outputs, pair, kind, dims, o->epsilon);
        outcomes.insert(outcomes.end(), r.begin(), r.end());
        summaries.push_back(summarize(r, pair.first, pair.second, dims.front()));
      }
      write_records(o->outcomes, outcomes);

      // Mean score per generator over cases with a reference.
      std::map<std::string, const TestCase*> by_id;
      for (const TestCase& c : cases) by_id[c.case_id] = &c;
      std::vector<MetricRow> rows;
      for (const std::string& g : generators_of(outputs)) {
        double sum = 0;
        int n = 0;
        for (const CandidateOutput& out : outputs) {
          if (out.generator_id != g) continue;
          auto it = by_id.find(out.case_id);
          if (it == by_id.end() || !it->second->reference) continue;
          sum += metric_score(kind, out.text, *it->second->reference);
          ++n;
        }
        if (n > 0) rows.push_back({g, {sum / n}});
      }
      const MetricKind kinds[] = {kind};
      Table metric = metric_table(kinds, rows);
      metric.fingerprint = Json{{"metric", o->metric}, {"cases", cases.size()}};
      Table h2h = head_to_head_table(summaries, "baseline_head_to_head");
      h2h.title = "Head-to-head records (" + o->metric + ")";
      h2h.fingerprint = metric.fingerprint;
      emit(ctx, {metric, h2h}, o->tables, o->csv);
    };
  });
}

void add_elo(CLI::App& app, Context& ctx) {
  auto* sub = app.add_subcommand("elo", "Bootstrap Elo ratings from case outcomes");
  struct Opts {
    std::vector<std::string> outcomes;
    std::string dims = "p,q,r,overall", source, tables, csv;
    EloConfig config;
  };
  auto o = std::make_shared<Opts>();
  sub->add_option("--outcomes", o->outcomes, "Case outcome files (JSONL)")->required();
  sub->add_option("--dims", o->dims, "Tables: p,q,r and/or overall")->capture_default_str();
  sub->add_option("--source", o->source, "Only outcomes with this source");
  sub->add_option("--bootstrap", o->config.bootstrap_rounds, "Bootstrap rounds")
      ->capture_default_str();
  sub->add_option("--seed", o->config.seed, "Bootstrap seed")->capture_default_str();
  sub->add_option("--k", o->config.k_weight, "K weight")->capture_default_str();
  sub->add_option("--initial", o->config.initial_rating, "Initial rating")->capture_default_str();
  sub->add_option("--scale", o->config.scale, "Logistic scale")->capture_default_str();
  sub->add_option("--ci", o->config.ci_level, "Interval level")->capture_default_str();
  sub->add_flag("--block-by-case", o->config.block_by_case,
                "Permute all games of a case together");
  sub->add_option("--tables", o->tables, "Directory for report tables");
  sub->add_option("--csv", o->csv, "Rating table as CSV");
  sub->callback([&ctx, o] {
    ctx.action = [&ctx, o] {
      std::vector<std::string> labels;
      for (const std::string& item : split_list(o->dims)) {
        if (item == "overall" || item == "o") {
          labels.emplace_back("overall");
        } else if (auto d = parse_dimension(item)) {
          labels.emplace_back(dimension_name(*d));
        } else {
          throw UsageError("--dims: unknown table '" + item + "'");
        }
      }
      o->config.max_threads = ctx.threads;
      const auto outcomes = read_all_outcomes(o->outcomes, o->source);
      const auto elo = elo_tables(outcomes, labels, o->config);
      const Json fingerprint{{"seed", o->config.seed},
                             {"bootstrap_rounds", o->config.bootstrap_rounds},
                             {"k_weight", o->config.k_weight},
                             {"block_by_case", o->config.block_by_case},
                             {"source", o->source}};
      Table wide = elo_table(elo);
      wide.fingerprint = fingerprint;
      Table intervals = elo_interval_table(elo);
      intervals.fingerprint = fingerprint;
      emit(ctx, {wide, intervals}, o->tables, o->csv);
    };
  });
}

void add_resampling(CLI::App& app, Context& ctx, bool is_consistency) {
  const std::string name = is_consistency ? "consistency" : "sensitivity";
  auto* sub = app.add_subcommand(
      name, is_consistency ? "Agreement of conclusions between disjoint samples"
                           : "Chance that a sample yields a significant difference");
  struct Opts {
    std::vector<std::string> outcomes;
    std::string pair, dim = "quality", sizes, source, tables, csv;
    ResampleConfig config;
  };
  auto o = std::make_shared<Opts>();
  sub->add_option("--outcomes", o->outcomes, "Case outcome files (JSONL)")->required();
  sub->add_option("--pair", o->pair, "Generator pair A,B")->required();
  sub->add_option("--dim", o->dim, "Dimension")->capture_default_str();
  sub->add_option("--sizes", o->sizes, "Sample sizes, comma separated")->required();
  sub->add_option("--repetitions", o->config.repetitions, "Resamples per size")
      ->capture_default_str();
  sub->add_option("--alpha", o->config.alpha, "Significance level")->capture_default_str();
  sub->add_option("--seed", o->config.seed, "Resampling seed")->capture_default_str();
  sub->add_option("--source", o->source, "Only outcomes with this source");
  if (is_consistency) {
    sub->add_flag("--strict-conclusive", o->config.strict_conclusive,
                  "Count only agreeing conclusive results");
  }
  sub->add_option("--tables", o->tables, "Directory for report tables");
  sub->add_option("--csv", o->csv, "Curve as CSV (size, estimate, repetitions)");
  sub->callback([&ctx, o, name, is_consistency] {
    ctx.action = [&ctx, o, name, is_consistency] {
      const Pair pair = parse_pair(o->pair);
      const auto dim = parse_dimension(o->dim);
      if (!dim) throw UsageError("--dim: unknown dimension '" + o->dim + "'");
      o->config.sizes = parse_sizes(o->sizes);
      o->config.max_threads = ctx.threads;
      const auto outcomes = read_all_outcomes(o->outcomes, o->source);
      const auto pool = verdict_pool(outcomes, pair.first, pair.second, *dim);
      const auto curve =
          is_consistency ? consistency(pool, o->config) : sensitivity(pool, o->config);
      const std::string label = pair.first + "_vs_" + pair.second + "_" +
                                std::string(dimension_name(*dim));
      Table t = curve_table(curve, name + "_" + label,
                            std::string(is_consistency ? "Consistency" : "Sensitivity") + ": " +
                                pair.first + " vs " + pair.second + ", " +
                                std::string(dimension_label(*dim)));
      t.fingerprint = Json{{"seed", o->config.seed},
                           {"repetitions", o->config.repetitions},
                           {"alpha", o->config.alpha},
                           {"pool", pool.size()},
                           {"strict_conclusive", o->config.strict_conclusive}};
      emit(ctx, {t}, o->tables, o->csv);
    };
  });
}

void add_agreement(CLI::App& app, Context& ctx) {
  auto* sub = app.add_subcommand("agreement", "Agreement with an assumed ranking and between raters");
  struct Opts {
    std::vector<std::string> outcomes;
    std::string truth, human_judgments, tables, csv;
    double tie_credit = 0.5;
  };
  auto o = std::make_shared<Opts>();
  sub->add_option("--outcomes", o->outcomes, "Case outcome files (JSONL)");
  sub->add_option("--truth", o->truth, "Assumed ranking, strongest first (A,B,C)");
  sub->add_option("--tie-credit", o->tie_credit, "Credit for a tie")->capture_default_str();
  sub->add_option("--human-judgments", o->human_judgments,
                  "Rater judgments (JSONL) for inter-rater agreement");
  sub->add_option("--tables", o->tables, "Directory for report tables");
  sub->add_option("--csv", o->csv, "First table as CSV");
  sub->callback([&ctx, o] {
    ctx.action = [&ctx, o] {
      std::vector<Table> tables;
      if (!o->outcomes.empty()) {
        if (o->truth.empty()) throw UsageError("--outcomes requires --truth");
        const auto truth = split_list(o->truth);
        const auto outcomes = read_all_outcomes(o->outcomes, "");
        Table t = agreement_table(agreement_with_truth(outcomes, truth, o->tie_credit));
        t.fingerprint = Json{{"truth", truth}, {"tie_credit", o->tie_credit}};
        tables.push_back(std::move(t));
      }
      if (!o->human_judgments.empty()) {
        const auto judgments = read_records(o->human_judgments, &parse_human_judgment);
        tables.push_back(inter_rater_table(inter_rater_agreement(judgments)));
      }
      if (tables.empty()) throw UsageError("pass --outcomes with --truth, or --human-judgments");
      emit(ctx, tables, o->tables, o->csv);
    };
  });
}

std::atomic<AnnotationServer*> g_server{nullptr};

extern "C" void stop_server(int) {
  if (AnnotationServer* s = g_server.load()) s->stop();
}

void add_annotate_serve(CLI::App& app, Context& ctx) {
  auto* sub = app.add_subcommand("annotate-serve", "Serve blinded pairwise tasks to human raters");
  struct Opts {
    std::string cases, outputs, pair, store = "annotations.jsonl", host = "127.0.0.1", ui;
    int port = 8080;
    BatchOptions batch;
    std::optional<std::size_t> profile_examples;
    int lease_minutes = 30;
  };
  auto o = std::make_shared<Opts>();
  sub->add_option("--cases", o->cases, "Cases (JSONL); omit to serve an existing store");
  sub->add_option("--outputs", o->outputs, "Candidate outputs (JSONL)");
  sub->add_option("--pair", o->pair, "Generator pair A,B");
  sub->add_option("--raters-per-case", o->batch.raters_per_case, "Judgments per case")
      ->capture_default_str();
  sub->add_option("--seed", o->batch.seed, "Presentation order seed")->capture_default_str();
  sub->add_option("--profile-examples", o->profile_examples, "Profile examples shown");
  sub->add_option("--store", o->store, "Append-only record log")->capture_default_str();
  sub->add_option("--host", o->host, "Bind address")->capture_default_str();
  sub->add_option("--port", o->port, "Port")->capture_default_str();
  sub->add_option("--lease-minutes", o->lease_minutes, "Task lease length")->capture_default_str();
  sub->add_option("--ui", o->ui, "Directory served at /");
  sub->callback([&ctx, o] {
    ctx.action = [&ctx, o] {
      ServiceOptions service_options;
      service_options.lease = std::chrono::minutes(o->lease_minutes);
      AnnotationService service(o->store, service_options);
      if (!o->cases.empty()) {
        if (o->outputs.empty() || o->pair.empty()) {
          throw UsageError("--cases requires --outputs and --pair");
        }
        o->batch.profile_examples = o->profile_examples;
        const auto cases = read_cases(o->cases);
        const auto outputs = read_outputs(o->outputs);
        const auto tasks = create_batch(cases, outputs, parse_pair(o->pair), o->batch);
        const std::size_t added = service.add_tasks(tasks);
        ctx.out << "added " << added << " of " << tasks.size() << " tasks\n";
      }
      ServerOptions server_options;
      if (const char* token = std::getenv("AUPEL_ADMIN_TOKEN")) server_options.admin_token = token;
      if (!o->ui.empty()) server_options.ui_dir = o->ui;
      AnnotationServer server(service, server_options);
      const int port = server.bind(o->host, o->port);
      if (port < 0) {
        throw Error(ErrorCode::kIo, "cannot bind " + o->host + ":" + std::to_string(o->port));
      }
      ctx.out << "serving " << service.task_count() << " tasks on http://" << o->host << ":"
              << port << std::endl;
      g_server = &server;
      std::signal(SIGINT, stop_server);
      std::signal(SIGTERM, stop_server);
      server.serve();
      g_server = nullptr;
    };
  });
}

void add_simulate(CLI::App& app, Context& ctx) {
  auto* sub = app.add_subcommand(
      "simulate", "Write a synthetic corpus and a simulated judge from a head-to-head table");
  struct Opts {
    std::string out_dir, table, generators = "XXL,XL,Large,Base";
    SyntheticCorpusOptions corpus;
    double position_bias = 0.0;
    double strength = 0.8;
  };
  auto o = std::make_shared<Opts>();
  sub->add_option("--out-dir", o->out_dir, "Writes cases.jsonl, outputs.jsonl, judge.json")
      ->required();
  sub->add_option("--table", o->table,
                  "Head-to-head CSV (generator_a,generator_b,dimension,win,loss,tie); "
                  "default: built-in book-review table");
  sub->add_option("--generators", o->generators, "Generators to emit outputs for")
      ->capture_default_str();
  sub->add_option("--cases", o->corpus.cases, "Number of cases")->capture_default_str();
  sub->add_option("--users", o->corpus.users, "Number of users")->capture_default_str();
  sub->add_option("--seed", o->corpus.seed, "Corpus and judge seed")->capture_default_str();
  sub->add_option("--position-bias", o->position_bias, "Extra chance to pick the first text")
      ->capture_default_str();
  sub->add_option("--strength", o->strength,
                  "Chance a replica prefers the better text in a decided case")
      ->capture_default_str();
  sub->callback([&ctx, o] {
    ctx.action = [&ctx, o] {
      std::vector<HeadToHeadRow> rows;
      if (o->table.empty()) {
        rows = book_review_head_to_head();
      } else {
        std::ifstream in(o->table);
        if (!in) throw Error(ErrorCode::kIo, "cannot open " + o->table);
        std::stringstream ss;
        ss << in.rdbuf();
        rows = parse_head_to_head_csv(ss.str());
      }
      const auto generators = split_list(o->generators);
      if (generators.size() < 2) throw UsageError("--generators needs at least two ids");
      std::erase_if(rows, [&](const HeadToHeadRow& r) {
        const auto has = [&](const std::string& g) {
          return std::find(generators.begin(), generators.end(), g) != generators.end();
        };
        return !has(r.generator_a) || !has(r.generator_b);
      });
      const SimulatedJudgeConfig config =
          config_from_head_to_head(rows, o->position_bias, o->strength, o->corpus.seed);
      const SyntheticCorpus corpus = synthetic_corpus(generators, o->corpus);
      const fs::path dir(o->out_dir);
      write_records(dir / "cases.jsonl", corpus.cases);
      write_records(dir / "outputs.jsonl", corpus.outputs);
      write_text(dir / "judge.json", to_json(config).dump(2) + "\n");
      ctx.out << "wrote " << corpus.cases.size() << " cases, " << corpus.outputs.size()
              << " outputs and " << config.preferences.size() << " preference rows to "
              << o->out_dir << "\n";
    };
  });
}

void add_report(CLI::App& app, Context& ctx) {
  auto* sub = app.add_subcommand("report", "Render saved tables as Markdown, CSV or records");
  struct Opts {
    std::string in, format = "md", out, generated_at;
  };
  auto o = std::make_shared<Opts>();
  sub->add_option("--in", o->in, "Directory of *.table.json files")->required();
  sub->add_option("--format", o->format, "md, csv or records")
      ->check(CLI::IsMember({"md", "markdown", "csv", "records"}))
      ->capture_default_str();
  sub->add_option("--out", o->out, "Output file (md, records) or directory (csv)")->required();
  sub->add_option("--generated-at", o->generated_at,
                  "Timestamp to embed (fixed under --deterministic)");
  sub->callback([&ctx, o] {
    ctx.action = [&ctx, o] {
      std::string stamp = o->generated_at;
      if (stamp.empty()) stamp = ctx.deterministic ? kFixedTimestamp : timestamp_now();
      const ReportBundle bundle = load_bundle(o->in, stamp);
      render(bundle, *parse_report_format(o->format), o->out);
      ctx.out << "rendered " << bundle.tables.size() << " tables to " << o->out << "\n";
    };
  });
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Context ctx{out, err, false, 0, {}};
  CLI::App app("Pairwise evaluation of personalized text generation", "pereval");
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value config file; flags override it");
  app.add_flag("--deterministic", ctx.deterministic,
               "Fix embedded timestamps so reruns are byte-identical");
  app.add_option("--threads", ctx.threads, "Worker threads for resampling (0 = all cores)")
      ->capture_default_str();

  add_prepare(app, ctx);
  add_sample(app, ctx);
  add_ablate(app, ctx);
  add_judge(app, ctx);
  add_baseline(app, ctx);
  add_elo(app, ctx);
  add_resampling(app, ctx, true);
  add_resampling(app, ctx, false);
  add_agreement(app, ctx);
  add_annotate_serve(app, ctx);
  add_simulate(app, ctx);
  add_report(app, ctx);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }
  if (!ctx.action) return 0;

  const auto fail = [&](std::string_view code, const std::string& message) {
    err << Json{{"error", code}, {"message", message}}.dump() << "\n";
  };
  try {
    ctx.action();
    return 0;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    fail(error_code_name(e.code()), e.what());
  } catch (const std::exception& e) {
    fail("Internal", e.what());
  }
  return 1;
}

}  // namespace pereval::cli
