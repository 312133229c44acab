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

#include "pereval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_map>

#include "pereval/error.hpp"
#include "pereval/text.hpp"

namespace pereval {
namespace {

using NgramCounts = std::unordered_map<std::string, int>;

NgramCounts count_ngrams(std::span<const std::string> tokens, int n) {
  NgramCounts counts;
  if (n <= 0 || tokens.size() < static_cast<std::size_t>(n)) return counts;
  std::string key;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    key.clear();
    for (int k = 0; k < n; ++k) {
      if (k > 0) key.push_back('\x1f');
      key += tokens[i + k];
    }
    ++counts[key];
  }
  return counts;
}

int clipped_overlap(const NgramCounts& candidate, const NgramCounts& reference) {
  int overlap = 0;
  for (const auto& [gram, count] : candidate) {
    if (auto it = reference.find(gram); it != reference.end()) {
      overlap += std::min(count, it->second);
    }
  }
  return overlap;
}

std::size_t ngram_total(std::size_t tokens, int n) {
  return tokens >= static_cast<std::size_t>(n) ? tokens - n + 1 : 0;
}

double f1(double overlap, double candidate_total, double reference_total) {
  if (overlap <= 0 || candidate_total <= 0 || reference_total <= 0) return 0.0;
  const double precision = overlap / candidate_total;
  const double recall = overlap / reference_total;
  return 100.0 * 2.0 * precision * recall / (precision + recall);
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::vector<std::pair<std::size_t, std::size_t>> spans;  // code point byte ranges
  const auto flush = [&] {
    std::size_t first = 0;
    std::size_t last = spans.size();
    const auto punct = [&](std::size_t i) {
      std::size_t len = 0;
      return is_unicode_punct(utf8_decode(text, spans[i].first, len));
    };
    while (first < last && punct(first)) ++first;
    while (last > first && punct(last - 1)) --last;
    if (first < last) {
      std::string token(text.substr(spans[first].first,
                                    spans[last - 1].first + spans[last - 1].second -
                                        spans[first].first));
      for (char& c : token) {
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
      }
      tokens.push_back(std::move(token));
    }
    spans.clear();
  };
  for (std::size_t pos = 0; pos < text.size();) {
    std::size_t len = 0;
    const char32_t c = utf8_decode(text, pos, len);
    if (is_unicode_space(c)) {
      flush();
    } else {
      spans.emplace_back(pos, len);
    }
    pos += len;
  }
  flush();
  return tokens;
}

double bleu(std::span<const std::string> candidate, std::span<const std::string> reference,
            const BleuOptions& options) {
  if (options.max_n < 1) throw Error(ErrorCode::kInvalidArgument, "BLEU max_n must be >= 1");
  if (candidate.empty()) return 0.0;
  double log_sum = 0.0;
  for (int n = 1; n <= options.max_n; ++n) {
    const int matches = clipped_overlap(count_ngrams(candidate, n), count_ngrams(reference, n));
    const double total = static_cast<double>(ngram_total(candidate.size(), n));
    const double p = matches > 0 ? matches / total
                                 : options.epsilon / (total + options.epsilon);
    log_sum += std::log(p);
  }
  double bp = 1.0;
  if (options.brevity_penalty && candidate.size() < reference.size()) {
    bp = std::exp(1.0 - static_cast<double>(reference.size()) / candidate.size());
  }
  return std::clamp(100.0 * bp * std::exp(log_sum / options.max_n), 0.0, 100.0);
}

double bleu(std::string_view candidate, std::string_view reference, const BleuOptions& options) {
  const auto c = tokenize(candidate);
  const auto r = tokenize(reference);
  return bleu(c, r, options);
}

double rouge_n(std::span<const std::string> candidate, std::span<const std::string> reference,
               int n) {
  if (n < 1) throw Error(ErrorCode::kInvalidArgument, "ROUGE-N order must be >= 1");
  const int overlap = clipped_overlap(count_ngrams(candidate, n), count_ngrams(reference, n));
  return f1(overlap, static_cast<double>(ngram_total(candidate.size(), n)),
            static_cast<double>(ngram_total(reference.size(), n)));
}

double rouge_n(std::string_view candidate, std::string_view reference, int n) {
  const auto c = tokenize(candidate);
  const auto r = tokenize(reference);
  return rouge_n(c, r, n);
}

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b) {
  if (a.size() < b.size()) std::swap(a, b);
  std::vector<std::size_t> row(b.size() + 1, 0);
  for (const std::string& x : a) {
    std::size_t diagonal = 0;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t above = row[j];
      row[j] = x == b[j - 1] ? diagonal + 1 : std::max(row[j], row[j - 1]);
      diagonal = above;
    }
  }
  return row[b.size()];
}

double rouge_l(std::span<const std::string> candidate, std::span<const std::string> reference) {
  return f1(static_cast<double>(lcs_length(candidate, reference)),
            static_cast<double>(candidate.size()), static_cast<double>(reference.size()));
}

double rouge_l(std::string_view candidate, std::string_view reference) {
  const auto c = tokenize(candidate);
  const auto r = tokenize(reference);
  return rouge_l(c, r);
}

std::string_view metric_name(MetricKind kind) {
  switch (kind) {
    case MetricKind::kBleu: return "bleu";
    case MetricKind::kRouge1: return "rouge1";
    case MetricKind::kRouge2: return "rouge2";
    case MetricKind::kRougeL: return "rougeL";
  }
  return "unknown";
}

std::optional<MetricKind> parse_metric(std::string_view s) {
  for (MetricKind k : {MetricKind::kBleu, MetricKind::kRouge1, MetricKind::kRouge2,
                       MetricKind::kRougeL}) {
    if (s == metric_name(k)) return k;
  }
  if (s == "rougel") return MetricKind::kRougeL;
  return std::nullopt;
}

double metric_score(MetricKind kind, std::string_view candidate, std::string_view reference) {
  const auto c = tokenize(candidate);
  const auto r = tokenize(reference);
  switch (kind) {
    case MetricKind::kBleu: return bleu(c, r);
    case MetricKind::kRouge1: return rouge_n(c, r, 1);
    case MetricKind::kRouge2: return rouge_n(c, r, 2);
    case MetricKind::kRougeL: return rouge_l(c, r);
  }
  return 0.0;
}

Verdict metric_preference(const TestCase& test_case, const CandidateOutput& output_a,
                          const CandidateOutput& output_b, MetricKind kind, double epsilon) {
  if (!test_case.reference) {
    throw Error(ErrorCode::kMissingReference, "case " + test_case.case_id + " has no reference");
  }
  const double a = metric_score(kind, output_a.text, *test_case.reference);
  const double b = metric_score(kind, output_b.text, *test_case.reference);
  if (a > b + epsilon) return Verdict::kWin;
  if (b > a + epsilon) return Verdict::kLoss;
  return Verdict::kTie;
}

std::vector<CaseOutcome> metric_outcomes(std::span<const TestCase> cases,
                                         std::span<const CandidateOutput> outputs,
                                         const std::pair<std::string, std::string>& pair,
                                         MetricKind kind,
                                         std::span<const Dimension> dimensions,
                                         double epsilon) {
  const OutputIndex index(outputs);
  std::vector<CaseOutcome> out;
  out.reserve(cases.size() * dimensions.size());
  for (const TestCase& c : cases) {
    const Verdict v = metric_preference(c, index.require(c.case_id, pair.first),
                                        index.require(c.case_id, pair.second), kind, epsilon);
    for (Dimension d : dimensions) {
      CaseOutcome o;
      o.case_id = c.case_id;
      o.generator_a = pair.first;
      o.generator_b = pair.second;
      o.dimension = d;
      o.verdict = v;
      // Recorded as two order-swapped replicas of a deterministic decision; a
      // tie splits them.
      o.prefers_a = v == Verdict::kWin ? 2 : v == Verdict::kTie ? 1 : 0;
      o.prefers_b = 2 - o.prefers_a;
      o.replicas = 2;
      o.source = std::string(metric_name(kind));
      out.push_back(std::move(o));
    }
  }
  return out;
}

}  // namespace pereval
