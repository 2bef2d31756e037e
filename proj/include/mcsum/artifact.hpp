#pragma once

#include <bit>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mcsum/chunker.hpp"
#include "mcsum/config.hpp"
#include "mcsum/error.hpp"
#include "mcsum/hash.hpp"
#include "mcsum/io.hpp"
#include "mcsum/markov.hpp"
#include "mcsum/pathfinding.hpp"

namespace mcsum {

using ordered_json = nlohmann::ordered_json;

inline constexpr std::string_view kArtifactFormat = "mcsum-run/1";

struct ClusterSummary {
  std::size_t cluster_id = 0;
  std::vector<std::size_t> representative_chunk_ids;
  std::string summary_text;
  std::string model;
  std::size_t prompt_tokens = 0;
  std::size_t completion_tokens = 0;
};

struct ClusteringRecord {
  std::size_t k = 0;
  std::size_t requested_k = 0;  // before capping at the number of distinct vectors
  std::vector<std::size_t> labels;
  double inertia = 0.0;
  std::string centroids_digest;
  std::size_t iterations = 0;
  std::size_t restart = 0;
  std::vector<std::vector<std::size_t>> representatives;
};

/// Everything one summarization run produced. Self-contained: inspection and
/// evaluation need nothing but this record.
struct RunArtifact {
  Mode mode = Mode::kMarkovCluster;
  ordered_json config;  // see config_snapshot()
  std::string prompt_version;
  std::size_t document_bytes = 0;
  std::size_t document_tokens = 0;
  std::string document_digest;
  std::vector<Chunk> chunks;
  std::optional<ClusteringRecord> clustering;
  std::optional<TransitionMatrix> transition_matrix;
  std::optional<HamiltonianPath> path;                // markov-cluster only
  std::vector<ClusterSummary> cluster_summaries;      // in aggregation order
  std::string final_summary;
  ordered_json metadata = ordered_json::object();
  std::optional<ordered_json> eval;
  std::optional<ordered_json> timings;
};

inline std::string digest_of(std::string_view bytes) {
  return to_hex(fnv1a64(bytes)) + to_hex(fnv1a64(bytes, 0x84222325cbf29ce4ULL));
}

/// Digest over the IEEE bit patterns of all centroid coordinates.
inline std::string centroids_digest(const std::vector<EmbeddingVector>& centroids) {
  std::string bytes;
  for (const auto& c : centroids) {
    for (double x : c.values()) bytes += to_hex(std::bit_cast<std::uint64_t>(x));
    bytes += ';';
  }
  return digest_of(bytes);
}

namespace detail {

// JSON has no infinities; a -inf log probability is written as null.
inline ordered_json log_prob_json(double lp) { return lp == kNegInf ? ordered_json(nullptr) : ordered_json(lp); }
inline double log_prob_from_json(const ordered_json& j) { return j.is_null() ? kNegInf : j.get<double>(); }

}  // namespace detail

inline ordered_json to_json(const RunArtifact& a) {
  ordered_json j;
  j["format"] = kArtifactFormat;
  j["mode"] = to_string(a.mode);
  j["config"] = a.config;
  j["prompt_version"] = a.prompt_version;
  j["document"] = {{"bytes", a.document_bytes}, {"tokens", a.document_tokens}, {"digest", a.document_digest}};

  ordered_json chunks = ordered_json::array();
  for (const auto& c : a.chunks) {
    chunks.push_back({{"index", c.index},
                      {"token_start", c.token_start},
                      {"token_count", c.token_count},
                      {"byte_start", c.byte_span.start},
                      {"byte_end", c.byte_span.end},
                      {"text", c.text}});
  }
  j["chunks"] = std::move(chunks);

  if (a.clustering) {
    const auto& c = *a.clustering;
    j["clustering"] = {{"k", c.k},
                       {"requested_k", c.requested_k},
                       {"labels", c.labels},
                       {"inertia", c.inertia},
                       {"centroids_digest", c.centroids_digest},
                       {"iterations", c.iterations},
                       {"restart", c.restart},
                       {"representatives", c.representatives}};
  }
  if (a.transition_matrix) {
    const auto& t = *a.transition_matrix;
    j["transition_matrix"] = {{"k", t.k}, {"rows", t.rows()}, {"zero_rows", t.zero_rows}};
  }
  if (a.path) {
    j["path"] = {{"order", a.path->order},
                 {"log_prob", detail::log_prob_json(a.path->log_prob)},
                 {"probability", a.path->probability()},
                 {"method", to_string(a.path->method)}};
  }
  ordered_json summaries = ordered_json::array();
  for (const auto& s : a.cluster_summaries) {
    summaries.push_back({{"cluster_id", s.cluster_id},
                         {"representative_chunk_ids", s.representative_chunk_ids},
                         {"summary_text", s.summary_text},
                         {"model", s.model},
                         {"prompt_tokens", s.prompt_tokens},
                         {"completion_tokens", s.completion_tokens}});
  }
  j["cluster_summaries"] = std::move(summaries);
  j["final_summary"] = a.final_summary;
  j["metadata"] = a.metadata;
  if (a.eval) j["eval"] = *a.eval;
  if (a.timings) j["timings"] = *a.timings;
  return j;
}

inline RunArtifact artifact_from_json(const ordered_json& j) {
  try {
    if (j.at("format").get<std::string>() != kArtifactFormat) {
      throw Error(ErrorKind::kParse, "unsupported artifact format '" + j.at("format").get<std::string>() + "'");
    }
    RunArtifact a;
    a.mode = mode_from_string(j.at("mode").get<std::string>());
    a.config = j.at("config");
    a.prompt_version = j.at("prompt_version").get<std::string>();
    const auto& doc = j.at("document");
    a.document_bytes = doc.at("bytes").get<std::size_t>();
    a.document_tokens = doc.at("tokens").get<std::size_t>();
    a.document_digest = doc.at("digest").get<std::string>();
    for (const auto& c : j.at("chunks")) {
      Chunk chunk;
      chunk.index = c.at("index").get<std::size_t>();
      chunk.token_start = c.at("token_start").get<std::size_t>();
      chunk.token_count = c.at("token_count").get<std::size_t>();
      chunk.byte_span = {c.at("byte_start").get<std::size_t>(), c.at("byte_end").get<std::size_t>()};
      chunk.text = c.at("text").get<std::string>();
      a.chunks.push_back(std::move(chunk));
    }
    if (j.contains("clustering")) {
      const auto& c = j["clustering"];
      ClusteringRecord r;
      r.k = c.at("k").get<std::size_t>();
      r.requested_k = c.at("requested_k").get<std::size_t>();
      r.labels = c.at("labels").get<std::vector<std::size_t>>();
      r.inertia = c.at("inertia").get<double>();
      r.centroids_digest = c.at("centroids_digest").get<std::string>();
      r.iterations = c.at("iterations").get<std::size_t>();
      r.restart = c.at("restart").get<std::size_t>();
      r.representatives = c.at("representatives").get<std::vector<std::vector<std::size_t>>>();
      a.clustering = std::move(r);
    }
    if (j.contains("transition_matrix")) {
      const auto& t = j["transition_matrix"];
      auto m = TransitionMatrix::from_rows(t.at("rows").get<std::vector<std::vector<double>>>());
      m.zero_rows = t.at("zero_rows").get<std::vector<std::size_t>>();
      if (m.k != t.at("k").get<std::size_t>()) throw Error(ErrorKind::kParse, "transition matrix k mismatch");
      a.transition_matrix = std::move(m);
    }
    if (j.contains("path")) {
      const auto& p = j["path"];
      a.path = HamiltonianPath{p.at("order").get<std::vector<std::size_t>>(),
                               detail::log_prob_from_json(p.at("log_prob")),
                               path_method_from_string(p.at("method").get<std::string>())};
    }
    for (const auto& s : j.at("cluster_summaries")) {
      a.cluster_summaries.push_back({s.at("cluster_id").get<std::size_t>(),
                                     s.at("representative_chunk_ids").get<std::vector<std::size_t>>(),
                                     s.at("summary_text").get<std::string>(), s.at("model").get<std::string>(),
                                     s.at("prompt_tokens").get<std::size_t>(),
                                     s.at("completion_tokens").get<std::size_t>()});
    }
    a.final_summary = j.at("final_summary").get<std::string>();
    a.metadata = j.at("metadata");
    if (j.contains("eval")) a.eval = j["eval"];
    if (j.contains("timings")) a.timings = j["timings"];
    return a;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kParse, std::string("malformed artifact: ") + e.what());
  }
}

inline std::string serialize(const RunArtifact& a) { return to_json(a).dump(2) + "\n"; }

inline RunArtifact parse_artifact(std::string_view text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::kParse, std::string("artifact is not valid JSON: ") + e.what());
  }
  return artifact_from_json(j);
}

inline RunArtifact load_artifact(const std::filesystem::path& path) { return parse_artifact(read_file(path)); }

}  // namespace mcsum
