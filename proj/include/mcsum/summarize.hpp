#pragma once

#include <chrono>
#include <functional>
#include <set>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "mcsum/artifact.hpp"
#include "mcsum/chunker.hpp"
#include "mcsum/clustering.hpp"
#include "mcsum/concurrency.hpp"
#include "mcsum/config.hpp"
#include "mcsum/embeddings.hpp"
#include "mcsum/llm.hpp"
#include "mcsum/markov.hpp"
#include "mcsum/pathfinding.hpp"
#include "mcsum/prompts.hpp"

namespace mcsum {

inline ClusterSummary summarize_cluster(const std::vector<std::string>& rep_texts, LlmProvider& llm,
                                        const PromptSet& prompts = default_prompts()) {
  if (rep_texts.empty()) throw Error(ErrorKind::kContract, "summarize_cluster: no representative texts");
  const auto reply = llm.complete(make_cluster_request(prompts, rep_texts));
  if (trim(reply.text).empty()) throw Error(ErrorKind::kProtocol, "provider returned an empty cluster summary");
  ClusterSummary s;
  s.summary_text = reply.text;
  s.model = reply.model;
  s.prompt_tokens = reply.prompt_tokens;
  s.completion_tokens = reply.completion_tokens;
  return s;
}

/// Feeds the summaries, in the given order, to one aggregation call.
inline std::string aggregate_final(const std::vector<ClusterSummary>& ordered, LlmProvider& llm,
                                   const PromptSet& prompts = default_prompts()) {
  if (ordered.empty()) throw Error(ErrorKind::kContract, "aggregate_final: no summaries");
  std::vector<std::string> texts;
  for (const auto& s : ordered) texts.push_back(s.summary_text);
  const auto reply = llm.complete(make_aggregate_request(prompts, std::move(texts)));
  if (trim(reply.text).empty()) throw Error(ErrorKind::kProtocol, "provider returned an empty final summary");
  return reply.text;
}

/// Cluster ids in the order they first occur in `labels`.
inline std::vector<std::size_t> first_appearance_order(const std::vector<std::size_t>& labels) {
  std::vector<std::size_t> order;
  std::set<std::size_t> seen;
  for (auto l : labels) {
    if (seen.insert(l).second) order.push_back(l);
  }
  return order;
}

/// Wall-clock milliseconds per pipeline stage, in execution order.
using StageTimings = std::vector<std::pair<std::string, double>>;

/// Optional observers of a pipeline run.
struct PipelineHooks {
  StageTimings* timings = nullptr;
  std::function<void(const std::string& stage, double ms)> on_stage;
};

inline ordered_json timings_json(const StageTimings& t) {
  ordered_json j = ordered_json::object();
  for (const auto& [stage, ms] : t) j[stage] = ms;
  return j;
}

namespace detail {

template <class Fn>
auto run_stage(const char* name, const PipelineHooks* hooks, Fn&& fn) {
  const auto start = std::chrono::steady_clock::now();
  auto record = [&] {
    if (!hooks) return;
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    if (hooks->timings) hooks->timings->emplace_back(name, ms);
    if (hooks->on_stage) hooks->on_stage(name, ms);
  };
  try {
    if constexpr (std::is_void_v<decltype(fn())>) {
      fn();
      record();
    } else {
      auto result = fn();
      record();
      return result;
    }
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(name, e);
  }
}

inline std::string summarize_full_document(std::string_view document, std::size_t document_tokens,
                                           const RunConfig& cfg, LlmProvider& llm, const PromptSet& prompts,
                                           ordered_json& metadata) {
  const std::size_t budget = cfg.llm.context_tokens - cfg.llm.context_margin_tokens;
  if (document_tokens <= budget) {
    metadata["llm_full_pieces"] = 1;
    const auto reply = llm.complete(make_full_request(prompts, std::string(document)));
    if (trim(reply.text).empty()) throw Error(ErrorKind::kProtocol, "provider returned an empty summary");
    return reply.text;
  }
  // Over-context document: summarize budget-sized pieces, then merge them.
  const auto pieces = chunk_document(document, {budget, 0});
  metadata["llm_full_pieces"] = pieces.size();
  std::vector<std::string> partial(pieces.size());
  parallel_for(pieces.size(), llm.parallelism(), [&](std::size_t i) {
    const auto reply = llm.complete(make_full_request(prompts, pieces[i].text));
    if (trim(reply.text).empty()) throw Error(ErrorKind::kProtocol, "provider returned an empty piece summary");
    partial[i] = reply.text;
  });
  const auto reply = llm.complete(make_aggregate_request(prompts, std::move(partial)));
  if (trim(reply.text).empty()) throw Error(ErrorKind::kProtocol, "provider returned an empty summary");
  return reply.text;
}

}  // namespace detail

/// Runs one summarization mode end to end and records every intermediate
/// product. Errors come out as StageError tagged with the failing stage.
///
/// markov-cluster: chunk, embed, cluster, pick representatives, estimate the
/// transition matrix, solve the path (DP up to path_cap, greedy above),
/// summarize each cluster, aggregate in path order.
/// cluster-sum: the same without the matrix and path; summaries are
/// aggregated in order of first appearance in the label sequence.
/// llm-full: one call over the whole document.
inline RunArtifact run_pipeline(std::string_view document, const RunConfig& cfg, EmbeddingProvider& embedder,
                                LlmProvider& llm, EmbeddingCache* cache = nullptr, const PipelineHooks& hooks = {}) {
  const PipelineHooks* observe = &hooks;
  detail::run_stage("config", nullptr, [&] { cfg.validate(); });
  const PromptSet prompts = detail::run_stage(
      "prompts", nullptr, [&] { return cfg.prompt_dir.empty() ? default_prompts() : load_prompts(cfg.prompt_dir); });

  RunArtifact art;
  art.mode = cfg.mode;
  art.config = config_snapshot(cfg);
  art.prompt_version = prompts.version;
  art.document_bytes = document.size();
  art.document_digest = digest_of(document);

  const auto tokens = detail::run_stage("chunk", observe, [&] {
    auto seq = tokenize(document);
    if (seq.empty()) throw Error(ErrorKind::kContract, "document contains no tokens");
    if (cfg.mode != Mode::kLlmFull) art.chunks = chunk_tokens(document, seq, cfg.chunker);
    return seq;
  });
  art.document_tokens = tokens.size();

  if (cfg.mode == Mode::kLlmFull) {
    art.final_summary = detail::run_stage("summarize", observe, [&] {
      return detail::summarize_full_document(document, tokens.size(), cfg, llm, prompts, art.metadata);
    });
    return art;
  }

  const auto vectors = detail::run_stage("embed", observe, [&] {
    std::vector<std::string> texts;
    texts.reserve(art.chunks.size());
    for (const auto& c : art.chunks) texts.push_back(c.text);
    return embed_batch(texts, embedder, cache);
  });

  ClusteringRecord record;
  const auto assignment = detail::run_stage("cluster", observe, [&] {
    record.requested_k = choose_k(art.chunks.size(), {.explicit_k = cfg.k});
    const auto k = std::min(record.requested_k, count_distinct(vectors));
    return kmeans(vectors, k, cfg.seed, cfg.kmeans);
  });
  const auto reps = representatives(assignment, vectors, cfg.top_k);
  record.k = assignment.k;
  record.labels = assignment.labels;
  record.inertia = assignment.inertia;
  record.centroids_digest = centroids_digest(assignment.centroids);
  record.iterations = assignment.iterations;
  record.restart = assignment.restart;
  record.representatives = reps.per_cluster;
  art.clustering = record;

  std::vector<std::size_t> order;
  if (cfg.mode == Mode::kMarkovCluster) {
    art.transition_matrix = detail::run_stage(
        "markov", observe, [&] { return build_transition_matrix(assignment.labels, assignment.k, cfg.collapse_runs); });
    art.path = detail::run_stage("path", observe, [&] { return solve_path(*art.transition_matrix, cfg.path_cap); });
    order = art.path->order;
  } else {
    order = first_appearance_order(assignment.labels);
  }

  std::vector<ClusterSummary> per_cluster(assignment.k);
  detail::run_stage("summarize", observe, [&] {
    parallel_for(assignment.k, llm.parallelism(), [&](std::size_t c) {
      std::vector<std::string> texts;
      for (auto idx : reps.per_cluster[c]) texts.push_back(art.chunks[idx].text);
      per_cluster[c] = summarize_cluster(texts, llm, prompts);
      per_cluster[c].cluster_id = c;
      per_cluster[c].representative_chunk_ids = reps.per_cluster[c];
    });
  });
  for (auto c : order) art.cluster_summaries.push_back(per_cluster[c]);

  art.final_summary =
      detail::run_stage("aggregate", observe, [&] { return aggregate_final(art.cluster_summaries, llm, prompts); });
  return art;
}

}  // namespace mcsum
