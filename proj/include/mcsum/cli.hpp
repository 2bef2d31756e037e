#pragma once

// Implementation of the mcsum subcommands. Each command returns the process
// exit code: 0 success, 1 internal/provider failure, 2 usage or input error.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "mcsum/artifact.hpp"
#include "mcsum/config.hpp"
#include "mcsum/eval.hpp"
#include "mcsum/pathfinding.hpp"
#include "mcsum/providers.hpp"
#include "mcsum/summarize.hpp"

namespace mcsum::cli {

namespace fs = std::filesystem;

inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitUsage = 2;

inline int exit_code_for(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::kContract:
    case ErrorKind::kIo:
    case ErrorKind::kParse:
    case ErrorKind::kInfeasible:
    case ErrorKind::kDegenerateInput:
      return kExitUsage;
    case ErrorKind::kTransport:
    case ErrorKind::kProtocol:
      return kExitInternal;
  }
  return kExitInternal;
}

inline int report_error(std::ostream& err, const Error& e) {
  if (const auto* staged = dynamic_cast<const StageError*>(&e)) {
    err << "error [" << staged->stage() << "] (" << to_string(e.kind()) << "): " << e.what() << '\n';
  } else {
    err << "error (" << to_string(e.kind()) << "): " << e.what() << '\n';
  }
  return exit_code_for(e);
}

struct SummarizeArgs {
  fs::path input;
  std::optional<fs::path> config;
  std::optional<std::string> mode;
  std::optional<std::size_t> k;
  std::optional<std::uint64_t> seed;
  std::optional<fs::path> out_dir;
  std::optional<std::string> provider;  // remote | mock
  std::optional<fs::path> reference;    // score the summary against this text
  bool timings_in_artifact = false;
};

inline RunConfig resolve_config(const SummarizeArgs& a) {
  RunConfig cfg = a.config ? load_config(*a.config) : RunConfig{};
  if (a.mode) cfg.mode = mode_from_string(*a.mode);
  if (a.k) cfg.k = *a.k;
  if (a.seed) cfg.seed = *a.seed;
  if (a.out_dir) cfg.out_dir = a.out_dir->string();
  if (a.provider) {
    if (*a.provider == "mock") {
      cfg.embedding.kind = EmbeddingKind::kDeterministicTest;
      cfg.llm.kind = LlmKind::kMockExtractive;
    } else if (*a.provider == "remote") {
      cfg.embedding.kind = EmbeddingKind::kRemote;
      cfg.llm.kind = LlmKind::kRemoteChat;
    } else {
      throw Error(ErrorKind::kContract, "--provider must be remote or mock");
    }
  }
  cfg.validate();
  return cfg;
}

inline ordered_json eval_json(const RougeScore& r1, const RougeScore& r2, const CoherenceScore& coh) {
  auto rouge = [](const RougeScore& s) {
    return s.defined ? ordered_json{{"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1}}
                     : ordered_json(nullptr);
  };
  auto opt = [](const std::optional<double>& v) { return v ? ordered_json(*v) : ordered_json(nullptr); };
  return {{"rouge1", rouge(r1)},
          {"rouge2", rouge(r2)},
          {"coherence", {{"first_order", opt(coh.first_order)}, {"second_order", opt(coh.second_order)}}}};
}

/// Writes <out>/artifact.json, <out>/summary.txt and <out>/timings.json; the
/// embedding cache lives in <out>/embeddings.cache.
inline int cmd_summarize(const SummarizeArgs& args, std::ostream& out, std::ostream& err) {
  try {
    const RunConfig cfg = resolve_config(args);
    std::string document;
    try {
      document = read_file(args.input);
    } catch (const Error&) {
      err << "error (io): cannot read input file " << args.input.string() << '\n';
      return kExitUsage;
    }
    const fs::path out_dir = cfg.out_dir;
    fs::create_directories(out_dir);

    auto embedder = make_embedder(cfg.embedding);
    auto llm = make_llm(cfg.llm);
    EmbeddingCache cache(out_dir / "embeddings.cache",
                         [&err](const std::string& msg) { err << "warning: " << msg << '\n'; });

    StageTimings timings;
    PipelineHooks hooks;
    hooks.timings = &timings;
    hooks.on_stage = [&out](const std::string& stage, double ms) {
      char buf[96];
      std::snprintf(buf, sizeof buf, "[%-9s] done in %.1f ms", stage.c_str(), ms);
      out << buf << std::endl;
    };
    out << "summarizing " << args.input.string() << " (mode " << to_string(cfg.mode) << ", seed " << cfg.seed
        << ")" << std::endl;
    RunArtifact art = run_pipeline(document, cfg, *embedder, *llm, &cache, hooks);

    if (args.reference) {
      const auto reference = read_file(*args.reference);
      art.eval = eval_json(rouge_n(art.final_summary, reference, 1), rouge_n(art.final_summary, reference, 2),
                           coherence(art.final_summary, *embedder, &cache));
    }
    if (args.timings_in_artifact) art.timings = timings_json(timings);

    write_file_atomic(out_dir / "artifact.json", serialize(art));
    write_file_atomic(out_dir / "summary.txt", art.final_summary + "\n");
    write_file_atomic(out_dir / "timings.json", timings_json(timings).dump(2) + "\n");
    out << "wrote " << (out_dir / "artifact.json").string() << " and " << (out_dir / "summary.txt").string()
        << std::endl;
    return kExitOk;
  } catch (const Error& e) {
    return report_error(err, e);
  } catch (const std::exception& e) {
    err << "error (internal): " << e.what() << '\n';
    return kExitInternal;
  }
}

struct EvaluateArgs {
  fs::path manifest;  // manifest file, or a directory of <name>.candidate.txt / <name>.reference.txt pairs
  std::optional<fs::path> config;
  fs::path out_dir = "out";
  std::string mode = "candidate";  // approach label for directory input and manifest lines without one
};

/// Writes <out>/eval_report.json and <out>/eval_report.txt and prints the table.
inline int cmd_evaluate(const EvaluateArgs& args, std::ostream& out, std::ostream& err) {
  try {
    const RunConfig cfg = args.config ? load_config(*args.config) : RunConfig{};
    if (!fs::exists(args.manifest)) {
      err << "error (io): manifest " << args.manifest.string() << " does not exist\n";
      return kExitUsage;
    }
    const auto pairs = load_eval_pairs(args.manifest, args.mode);
    if (pairs.empty()) {
      err << "error (contract): manifest " << args.manifest.string() << " lists no pairs\n";
      return kExitUsage;
    }
    auto embedder = make_embedder(cfg.embedding);
    const auto report = evaluate_corpus(pairs, *embedder);
    const auto table = report_table(report);
    write_file_atomic(args.out_dir / "eval_report.json", report_json(report).dump(2) + "\n");
    write_file_atomic(args.out_dir / "eval_report.txt", table);
    out << table;
    return kExitOk;
  } catch (const Error& e) {
    return report_error(err, e);
  } catch (const std::exception& e) {
    err << "error (internal): " << e.what() << '\n';
    return kExitInternal;
  }
}

inline std::string format_prob(double p) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", p);
  return buf;
}

inline std::string render_path(const TransitionMatrix& t, const HamiltonianPath& path) {
  std::string out;
  for (std::size_t i = 0; i < path.order.size(); ++i) {
    if (i) out += " → ";
    out += std::to_string(path.order[i]);
  }
  out += ", p = " + format_prob(path.probability()) + "\n";
  for (std::size_t i = 0; i + 1 < path.order.size(); ++i) {
    out += "  " + std::to_string(path.order[i]) + " → " + std::to_string(path.order[i + 1]) +
           "  p = " + format_prob(t(path.order[i], path.order[i + 1])) + "\n";
  }
  out += "  method: " + std::string(to_string(path.method)) + "\n";
  return out;
}

inline std::string render_matrix(const TransitionMatrix& t) {
  std::string out = "transition matrix k=" + std::to_string(t.k) +
                    " (row-stochastic: " + (validate_row_stochastic(t) ? "yes" : "NO") + ")\n";
  char buf[64];
  out += "     ";
  for (std::size_t j = 0; j < t.k; ++j) {
    std::snprintf(buf, sizeof buf, " %8zu", j);
    out += buf;
  }
  out += "\n";
  for (std::size_t i = 0; i < t.k; ++i) {
    std::snprintf(buf, sizeof buf, "%4zu ", i);
    out += buf;
    double sum = 0.0;
    for (std::size_t j = 0; j < t.k; ++j) {
      std::snprintf(buf, sizeof buf, " %8.4f", t(i, j));
      out += buf;
      sum += t(i, j);
    }
    if (t.is_zero_row(i)) {
      out += "  | zero row (no outgoing transitions)\n";
    } else {
      std::snprintf(buf, sizeof buf, "  | sum = %.6g\n", sum);
      out += buf;
    }
  }
  return out;
}

inline std::string render_clusters(const RunArtifact& a) {
  const auto& c = *a.clustering;
  std::vector<std::size_t> sizes(c.k, 0);
  for (auto l : c.labels) ++sizes[l];
  std::string out = "k=" + std::to_string(c.k) + " clusters over " + std::to_string(c.labels.size()) + " chunks\n";
  for (std::size_t i = 0; i < c.k; ++i) {
    out += "cluster " + std::to_string(i) + ": size " + std::to_string(sizes[i]) + ", representatives [";
    for (std::size_t j = 0; j < c.representatives[i].size(); ++j) {
      if (j) out += ", ";
      out += std::to_string(c.representatives[i][j]);
    }
    out += "]\n";
  }
  return out;
}

inline int cmd_inspect(const fs::path& artifact_path, const std::string& what, std::ostream& out, std::ostream& err) {
  RunArtifact art;
  try {
    art = load_artifact(artifact_path);
  } catch (const Error& e) {
    return report_error(err, e);
  }
  if (what == "matrix") {
    if (!art.transition_matrix) {
      err << "error: artifact (mode " << to_string(art.mode) << ") has no transition matrix\n";
      return kExitUsage;
    }
    out << render_matrix(*art.transition_matrix);
  } else if (what == "path") {
    if (!art.path || !art.transition_matrix) {
      err << "error: artifact (mode " << to_string(art.mode) << ") has no path\n";
      return kExitUsage;
    }
    out << render_path(*art.transition_matrix, *art.path);
  } else if (what == "clusters") {
    if (!art.clustering) {
      err << "error: artifact (mode " << to_string(art.mode) << ") has no clustering\n";
      return kExitUsage;
    }
    out << render_clusters(art);
  } else {
    err << "error: unknown inspect target '" << what << "' (matrix, path, clusters)\n";
    return kExitUsage;
  }
  return kExitOk;
}

struct BenchArgs {
  std::size_t min_k = 2;
  std::size_t max_k = 20;
  std::size_t trials = 3;
  std::uint64_t seed = 1;
};

struct BenchRow {
  std::size_t k = 0;
  double median_ms = 0.0;
};

/// Median wall time of solve_dp on random dense row-stochastic matrices.
inline std::vector<BenchRow> run_bench(const BenchArgs& args) {
  if (args.max_k > kDefaultDpCap) throw Error(ErrorKind::kContract, "bench max_k must be <= 22");
  if (args.min_k < 1 || args.min_k > args.max_k) throw Error(ErrorKind::kContract, "bench needs 1 <= min_k <= max_k");
  if (args.trials < 1) throw Error(ErrorKind::kContract, "bench needs at least one trial");
  Rng rng(args.seed);
  std::vector<BenchRow> rows;
  for (std::size_t k = args.min_k; k <= args.max_k; ++k) {
    std::vector<double> times;
    for (std::size_t trial = 0; trial < args.trials; ++trial) {
      const auto t = random_row_stochastic(k, rng);
      const auto start = std::chrono::steady_clock::now();
      const auto path = solve_dp(t);
      times.push_back(std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count());
      if (path.order.size() != k) throw Error(ErrorKind::kContract, "solver returned a short path");
    }
    std::sort(times.begin(), times.end());
    const auto mid = times.size() / 2;
    rows.push_back({k, times.size() % 2 ? times[mid] : 0.5 * (times[mid - 1] + times[mid])});
  }
  return rows;
}

inline int cmd_bench(const BenchArgs& args, std::ostream& out, std::ostream& err) {
  try {
    const auto rows = run_bench(args);
    out << "k,median_ms\n";
    char buf[64];
    for (const auto& r : rows) {
      std::snprintf(buf, sizeof buf, "%zu,%.3f\n", r.k, r.median_ms);
      out << buf;
    }
    return kExitOk;
  } catch (const Error& e) {
    return report_error(err, e);
  }
}

}  // namespace mcsum::cli
