#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "mcsum/chunker.hpp"
#include "mcsum/embeddings.hpp"
#include "mcsum/io.hpp"
#include "mcsum/text.hpp"

namespace mcsum {

struct RougeScore {
  std::size_t n = 1;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  bool defined = true;  // false when the reference has no n-grams
};

/// Lowercased word tokens; punctuation tokens are dropped.
inline std::vector<std::string> rouge_tokens(std::string_view text) {
  std::vector<std::string> out;
  for (auto& tok : tokenize(text).tokens) {
    const auto c = detail::decode_utf8(tok, 0);
    if (c.valid && detail::classify(c.code) == detail::CharClass::kWord) out.push_back(ascii_lower(std::move(tok)));
  }
  return out;
}

inline std::map<std::vector<std::string>, std::size_t> ngram_counts(const std::vector<std::string>& tokens,
                                                                    std::size_t n) {
  std::map<std::vector<std::string>, std::size_t> counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    ++counts[std::vector<std::string>(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                                      tokens.begin() + static_cast<std::ptrdiff_t>(i + n))];
  }
  return counts;
}

/// ROUGE-N with clipped counts: each candidate n-gram matches at most as
/// often as it occurs in the reference. No stemming, no stopword removal.
inline RougeScore rouge_n(std::string_view candidate, std::string_view reference, std::size_t n) {
  if (n != 1 && n != 2) throw Error(ErrorKind::kContract, "rouge_n supports n = 1 or 2");
  RougeScore s;
  s.n = n;
  const auto cand = ngram_counts(rouge_tokens(candidate), n);
  const auto ref = ngram_counts(rouge_tokens(reference), n);
  std::size_t cand_total = 0;
  std::size_t ref_total = 0;
  std::size_t matches = 0;
  for (const auto& [g, c] : cand) cand_total += c;
  for (const auto& [g, c] : ref) {
    ref_total += c;
    if (auto it = cand.find(g); it != cand.end()) matches += std::min(c, it->second);
  }
  if (ref_total == 0) {
    s.defined = false;
    return s;
  }
  s.recall = static_cast<double>(matches) / static_cast<double>(ref_total);
  s.precision = cand_total == 0 ? 0.0 : static_cast<double>(matches) / static_cast<double>(cand_total);
  s.f1 = s.precision + s.recall > 0.0 ? 2.0 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
  return s;
}

struct CoherenceScore {
  std::optional<double> first_order;   // needs >= 2 sentences
  std::optional<double> second_order;  // needs >= 3 sentences
  std::size_t sentence_count = 0;
};

/// Mean cosine similarity of sentence embeddings one (first order) and two
/// (second order) positions apart.
inline CoherenceScore coherence(std::string_view text, EmbeddingProvider& embedder,
                                EmbeddingCache* cache = nullptr) {
  CoherenceScore score;
  const auto sentences = split_sentences(text);
  score.sentence_count = sentences.size();
  if (sentences.size() < 2) return score;
  const auto vectors = embed_batch(sentences, embedder, cache);
  auto mean_at_gap = [&](std::size_t gap) {
    double sum = 0.0;
    for (std::size_t i = 0; i + gap < vectors.size(); ++i) sum += cosine_similarity(vectors[i], vectors[i + gap]);
    return sum / static_cast<double>(vectors.size() - gap);
  };
  score.first_order = mean_at_gap(1);
  if (sentences.size() >= 3) score.second_order = mean_at_gap(2);
  return score;
}

struct EvalPair {
  std::string id;
  std::string mode;  // approach label, e.g. markov-cluster
  std::string candidate;
  std::string reference;
  std::map<std::string, double> external;  // optional externally computed scores (bertscore_f1, bleurt)
};

struct DocumentEval {
  std::string id;
  std::string mode;
  RougeScore rouge1;
  RougeScore rouge2;
  CoherenceScore coherence;
  std::map<std::string, double> external;
  std::optional<std::string> error;
};

struct MetricMean {
  double mean = 0.0;
  std::size_t count = 0;
};

struct EvalReport {
  std::vector<DocumentEval> documents;
  // mode -> metric -> mean over documents where the metric is defined
  std::map<std::string, std::map<std::string, MetricMean>> aggregates;
  std::size_t failures = 0;
};

/// Aggregated metric names. The last two are reserved for scores computed
/// outside this tool and merged in through EvalPair::external.
inline const std::vector<std::string>& report_metrics() {
  static const std::vector<std::string> metrics = {
      "rouge1_precision", "rouge1_recall",      "rouge1_f1",    "rouge2_precision", "rouge2_recall",
      "rouge2_f1",        "coherence_first",    "coherence_second", "bertscore_f1", "bleurt"};
  return metrics;
}

inline std::map<std::string, double> document_metrics(const DocumentEval& d) {
  std::map<std::string, double> m;
  if (d.rouge1.defined) {
    m["rouge1_precision"] = d.rouge1.precision;
    m["rouge1_recall"] = d.rouge1.recall;
    m["rouge1_f1"] = d.rouge1.f1;
  }
  if (d.rouge2.defined) {
    m["rouge2_precision"] = d.rouge2.precision;
    m["rouge2_recall"] = d.rouge2.recall;
    m["rouge2_f1"] = d.rouge2.f1;
  }
  if (d.coherence.first_order) m["coherence_first"] = *d.coherence.first_order;
  if (d.coherence.second_order) m["coherence_second"] = *d.coherence.second_order;
  for (const auto& [k, v] : d.external) m[k] = v;
  return m;
}

inline EvalReport evaluate_corpus(const std::vector<EvalPair>& pairs, EmbeddingProvider& embedder,
                                  EmbeddingCache* cache = nullptr) {
  if (pairs.empty()) throw Error(ErrorKind::kContract, "evaluate_corpus: no pairs");
  EvalReport report;
  for (const auto& p : pairs) {
    DocumentEval d;
    d.id = p.id;
    d.mode = p.mode;
    d.external = p.external;
    try {
      d.rouge1 = rouge_n(p.candidate, p.reference, 1);
      d.rouge2 = rouge_n(p.candidate, p.reference, 2);
      d.coherence = coherence(p.candidate, embedder, cache);
      if (!d.rouge1.defined) d.error = "reference has no tokens; ROUGE undefined";
    } catch (const Error& e) {
      d.error = e.what();
    }
    report.documents.push_back(std::move(d));
  }

  std::map<std::string, std::map<std::string, double>> sums;
  for (const auto& d : report.documents) {
    if (d.error) {
      ++report.failures;
      continue;
    }
    for (const auto& [metric, value] : document_metrics(d)) {
      sums[d.mode][metric] += value;
      ++report.aggregates[d.mode][metric].count;
    }
  }
  for (auto& [mode, metrics] : report.aggregates) {
    for (auto& [metric, mean] : metrics) mean.mean = sums[mode][metric] / static_cast<double>(mean.count);
  }
  return report;
}

inline nlohmann::ordered_json report_json(const EvalReport& r) {
  using oj = nlohmann::ordered_json;
  auto opt = [](const std::optional<double>& v) { return v ? oj(*v) : oj(nullptr); };
  auto rouge = [](const RougeScore& s) {
    if (!s.defined) return oj(nullptr);
    return oj{{"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1}};
  };
  oj docs = oj::array();
  for (const auto& d : r.documents) {
    oj e{{"id", d.id},
         {"mode", d.mode},
         {"rouge1", rouge(d.rouge1)},
         {"rouge2", rouge(d.rouge2)},
         {"coherence",
          {{"first_order", opt(d.coherence.first_order)},
           {"second_order", opt(d.coherence.second_order)},
           {"sentence_count", d.coherence.sentence_count}}}};
    if (!d.external.empty()) e["external"] = d.external;
    e["error"] = d.error ? oj(*d.error) : oj(nullptr);
    docs.push_back(std::move(e));
  }
  oj agg = oj::object();
  for (const auto& [mode, metrics] : r.aggregates) {
    oj m = oj::object();
    for (const auto& name : report_metrics()) {
      if (auto it = metrics.find(name); it != metrics.end()) m[name] = {{"mean", it->second.mean}, {"count", it->second.count}};
    }
    for (const auto& [name, mean] : metrics) {
      if (!m.contains(name)) m[name] = {{"mean", mean.mean}, {"count", mean.count}};
    }
    agg[mode] = std::move(m);
  }
  return oj{{"documents", std::move(docs)}, {"aggregates", std::move(agg)}, {"failures", r.failures}};
}

/// Aligned text table, one row per approach: ROUGE F1 in percent, coherence
/// and the external semantic scores as raw values, "-" where absent.
inline std::string report_table(const EvalReport& r) {
  struct Column {
    const char* header;
    const char* metric;
    double scale;
    const char* fmt;
  };
  const Column columns[] = {{"R-1", "rouge1_f1", 100.0, "%.2f"},        {"R-2", "rouge2_f1", 100.0, "%.3f"},
                            {"1st-O", "coherence_first", 1.0, "%.3f"},  {"2nd-O", "coherence_second", 1.0, "%.3f"},
                            {"BF1", "bertscore_f1", 1.0, "%.3f"},       {"BLRT", "bleurt", 1.0, "%.3f"}};
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> header{"Approach"};
  for (const auto& c : columns) header.emplace_back(c.header);
  rows.push_back(header);
  for (const auto& [mode, metrics] : r.aggregates) {
    std::vector<std::string> row{mode};
    for (const auto& c : columns) {
      auto it = metrics.find(c.metric);
      if (it == metrics.end()) {
        row.emplace_back("-");
        continue;
      }
      char buf[64];
      std::snprintf(buf, sizeof buf, c.fmt, it->second.mean * c.scale);
      row.emplace_back(buf);
    }
    rows.push_back(std::move(row));
  }
  std::vector<std::size_t> widths(header.size(), 0);
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) widths[i] = std::max(widths[i], row[i].size());
  }
  std::string out;
  for (std::size_t r_i = 0; r_i < rows.size(); ++r_i) {
    for (std::size_t i = 0; i < rows[r_i].size(); ++i) {
      const auto& cell = rows[r_i][i];
      const std::string pad(widths[i] - cell.size(), ' ');
      out += i == 0 ? cell + pad : "  " + pad + cell;
    }
    out += '\n';
    if (r_i == 0) {
      std::size_t total = 0;
      for (auto w : widths) total += w;
      out += std::string(total + 2 * (widths.size() - 1), '-') + '\n';
    }
  }
  if (r.failures) out += std::to_string(r.failures) + " document(s) failed and are excluded from the means\n";
  return out;
}

namespace detail {

inline double parse_external_score(const std::string& field, std::size_t lineno) {
  const auto eq = field.find('=');
  const auto value = field.substr(eq + 1);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != value.size() || !std::isfinite(v)) {
    throw Error(ErrorKind::kParse, "manifest line " + std::to_string(lineno) + ": bad score '" + field + "'");
  }
  return v;
}

inline constexpr std::string_view kCandidateSuffix = ".candidate.txt";
inline constexpr std::string_view kReferenceSuffix = ".reference.txt";

/// "<id>.candidate.txt" -> "<id>"; other names -> their stem.
inline std::string pair_id(const std::filesystem::path& candidate) {
  const auto name = candidate.filename().string();
  if (name.size() > kCandidateSuffix.size() && name.ends_with(kCandidateSuffix)) {
    return name.substr(0, name.size() - kCandidateSuffix.size());
  }
  return candidate.stem().string();
}

}  // namespace detail

/// Loads evaluation pairs from either
///  - a directory of <id>.candidate.txt / <id>.reference.txt files, or
///  - a manifest with one pair per line:
///      candidate_path reference_path [approach] [metric=value ...]
///    '#' lines are comments, relative paths resolve against the manifest's
///    directory, and metric=value entries carry externally computed scores
///    such as bertscore_f1.
/// Pairs without an approach label get `default_mode`.
inline std::vector<EvalPair> load_eval_pairs(const std::filesystem::path& source, const std::string& default_mode) {
  namespace fs = std::filesystem;
  std::vector<EvalPair> pairs;
  if (fs::is_directory(source)) {
    std::vector<fs::path> candidates;
    for (const auto& entry : fs::directory_iterator(source)) {
      const auto name = entry.path().filename().string();
      if (name.size() > detail::kCandidateSuffix.size() && name.ends_with(detail::kCandidateSuffix)) {
        candidates.push_back(entry.path());
      }
    }
    std::sort(candidates.begin(), candidates.end());
    for (const auto& cand : candidates) {
      const auto id = detail::pair_id(cand);
      const auto ref = source / (id + std::string(detail::kReferenceSuffix));
      pairs.push_back({id, default_mode, read_file(cand), read_file(ref), {}});
    }
    return pairs;
  }

  const auto base = source.parent_path();
  auto resolve = [&](const std::string& s) { return fs::path(s).is_absolute() ? fs::path(s) : base / s; };
  std::istringstream in(read_file(source));
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    std::istringstream fields{std::string(body)};
    std::vector<std::string> parts;
    for (std::string f; fields >> f;) parts.push_back(f);
    if (parts.size() < 2) {
      throw Error(ErrorKind::kParse,
                  "manifest line " + std::to_string(lineno) + ": need candidate and reference paths");
    }
    EvalPair p;
    p.id = detail::pair_id(parts[0]);
    p.mode = default_mode;
    p.candidate = read_file(resolve(parts[0]));
    p.reference = read_file(resolve(parts[1]));
    for (std::size_t i = 2; i < parts.size(); ++i) {
      const auto eq = parts[i].find('=');
      if (eq == std::string::npos) {
        p.mode = parts[i];
      } else {
        p.external[parts[i].substr(0, eq)] = detail::parse_external_score(parts[i], lineno);
      }
    }
    pairs.push_back(std::move(p));
  }
  return pairs;
}

}  // namespace mcsum
