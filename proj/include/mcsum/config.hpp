#pragma once

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>

#include <json.hpp>

#include "mcsum/chunker.hpp"
#include "mcsum/clustering.hpp"
#include "mcsum/embeddings.hpp"
#include "mcsum/error.hpp"
#include "mcsum/llm.hpp"
#include "mcsum/pathfinding.hpp"
#include "mcsum/text.hpp"

namespace mcsum {

enum class Mode { kMarkovCluster, kClusterSum, kLlmFull };

inline std::string_view to_string(Mode m) {
  switch (m) {
    case Mode::kMarkovCluster: return "markov-cluster";
    case Mode::kClusterSum: return "cluster-sum";
    case Mode::kLlmFull: return "llm-full";
  }
  return "unknown";
}

inline Mode mode_from_string(std::string_view s) {
  if (s == "markov-cluster") return Mode::kMarkovCluster;
  if (s == "cluster-sum") return Mode::kClusterSum;
  if (s == "llm-full") return Mode::kLlmFull;
  throw Error(ErrorKind::kParse, "unknown mode '" + std::string(s) + "' (markov-cluster, cluster-sum, llm-full)");
}

struct RunConfig {
  ChunkerConfig chunker;
  EmbeddingProviderConfig embedding;
  std::optional<std::size_t> k;  // unset: choose_k
  std::size_t top_k = 5;
  bool collapse_runs = false;
  std::size_t path_cap = kDefaultDpCap;
  KMeansOptions kmeans;
  LlmProviderConfig llm;
  std::string prompt_dir;  // empty: built-in v1 prompts
  Mode mode = Mode::kMarkovCluster;
  std::uint64_t seed = 42;
  std::string out_dir = "out";

  void validate() const {
    chunker.validate();
    embedding.validate();
    llm.validate();
    if (top_k < 1) throw Error(ErrorKind::kContract, "top_k must be >= 1");
    if (k && *k < 1) throw Error(ErrorKind::kContract, "k must be >= 1");
    if (path_cap < 1 || path_cap > 30) throw Error(ErrorKind::kContract, "path_cap must be in [1, 30]");
  }
};

namespace detail {

inline std::string interpolate_env(std::string_view value, std::size_t lineno) {
  std::string out;
  for (std::size_t i = 0; i < value.size();) {
    if (value.compare(i, 2, "${") == 0) {
      const auto close = value.find('}', i + 2);
      if (close == std::string_view::npos) {
        throw Error(ErrorKind::kParse, "config line " + std::to_string(lineno) + ": unterminated ${");
      }
      const std::string name(value.substr(i + 2, close - i - 2));
      const char* env = std::getenv(name.c_str());
      if (env == nullptr) {
        throw Error(ErrorKind::kParse,
                    "config line " + std::to_string(lineno) + ": environment variable " + name + " is not set");
      }
      out += env;
      i = close + 1;
    } else {
      out += value[i++];
    }
  }
  return out;
}

inline std::size_t parse_count(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  unsigned long long n = 0;
  try {
    if (!v.empty() && v[0] == '-') throw std::invalid_argument(v);
    n = std::stoull(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || pos != v.size()) throw Error(ErrorKind::kParse, key + ": expected a non-negative integer, got '" + v + "'");
  return static_cast<std::size_t>(n);
}

inline double parse_real(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  double x = 0.0;
  try {
    x = std::stod(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || pos != v.size()) throw Error(ErrorKind::kParse, key + ": expected a number, got '" + v + "'");
  return x;
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw Error(ErrorKind::kParse, key + ": expected true/false, got '" + v + "'");
}

inline std::string_view to_string(EmbeddingKind k) {
  return k == EmbeddingKind::kRemote ? "remote" : "deterministic-test";
}
inline std::string_view to_string(LlmKind k) { return k == LlmKind::kRemoteChat ? "remote-chat" : "mock-extractive"; }

using Setter = std::function<void(RunConfig&, const std::string&)>;

inline const std::map<std::string, Setter, std::less<>>& config_setters() {
  static const std::map<std::string, Setter, std::less<>> setters = {
      {"chunk_size", [](RunConfig& c, const std::string& v) { c.chunker.chunk_size = parse_count("chunk_size", v); }},
      {"overlap", [](RunConfig& c, const std::string& v) { c.chunker.overlap = parse_count("overlap", v); }},
      {"embedding.kind",
       [](RunConfig& c, const std::string& v) {
         if (v == "remote") c.embedding.kind = EmbeddingKind::kRemote;
         else if (v == "deterministic-test") c.embedding.kind = EmbeddingKind::kDeterministicTest;
         else throw Error(ErrorKind::kParse, "embedding.kind: expected remote or deterministic-test, got '" + v + "'");
       }},
      {"embedding.endpoint", [](RunConfig& c, const std::string& v) { c.embedding.endpoint = v; }},
      {"embedding.model", [](RunConfig& c, const std::string& v) { c.embedding.model_name = v; }},
      {"embedding.auth_token_env", [](RunConfig& c, const std::string& v) { c.embedding.auth_token_env = v; }},
      {"embedding.batch_size",
       [](RunConfig& c, const std::string& v) { c.embedding.batch_size = parse_count("embedding.batch_size", v); }},
      {"embedding.timeout",
       [](RunConfig& c, const std::string& v) { c.embedding.timeout_seconds = parse_real("embedding.timeout", v); }},
      {"embedding.max_retries",
       [](RunConfig& c, const std::string& v) { c.embedding.max_retries = parse_count("embedding.max_retries", v); }},
      {"embedding.parallelism",
       [](RunConfig& c, const std::string& v) { c.embedding.parallelism = parse_count("embedding.parallelism", v); }},
      {"embedding.backoff",
       [](RunConfig& c, const std::string& v) {
         c.embedding.initial_backoff_seconds = parse_real("embedding.backoff", v);
       }},
      {"embedding.request_model_field", [](RunConfig& c, const std::string& v) { c.embedding.request_model_field = v; }},
      {"embedding.request_input_field", [](RunConfig& c, const std::string& v) { c.embedding.request_input_field = v; }},
      {"embedding.response_items_field",
       [](RunConfig& c, const std::string& v) { c.embedding.response_items_field = v; }},
      {"embedding.response_vector_field",
       [](RunConfig& c, const std::string& v) { c.embedding.response_vector_field = v; }},
      {"k",
       [](RunConfig& c, const std::string& v) {
         if (v == "auto") c.k.reset();
         else c.k = parse_count("k", v);
       }},
      {"top_k", [](RunConfig& c, const std::string& v) { c.top_k = parse_count("top_k", v); }},
      {"collapse_runs", [](RunConfig& c, const std::string& v) { c.collapse_runs = parse_bool("collapse_runs", v); }},
      {"path_cap", [](RunConfig& c, const std::string& v) { c.path_cap = parse_count("path_cap", v); }},
      {"kmeans.n_init", [](RunConfig& c, const std::string& v) { c.kmeans.n_init = parse_count("kmeans.n_init", v); }},
      {"kmeans.max_iters",
       [](RunConfig& c, const std::string& v) { c.kmeans.max_iters = parse_count("kmeans.max_iters", v); }},
      {"kmeans.tol", [](RunConfig& c, const std::string& v) { c.kmeans.tol = parse_real("kmeans.tol", v); }},
      {"llm.kind",
       [](RunConfig& c, const std::string& v) {
         if (v == "remote-chat") c.llm.kind = LlmKind::kRemoteChat;
         else if (v == "mock-extractive") c.llm.kind = LlmKind::kMockExtractive;
         else throw Error(ErrorKind::kParse, "llm.kind: expected remote-chat or mock-extractive, got '" + v + "'");
       }},
      {"llm.endpoint", [](RunConfig& c, const std::string& v) { c.llm.endpoint = v; }},
      {"llm.model", [](RunConfig& c, const std::string& v) { c.llm.model_name = v; }},
      {"llm.auth_token_env", [](RunConfig& c, const std::string& v) { c.llm.auth_token_env = v; }},
      {"llm.temperature",
       [](RunConfig& c, const std::string& v) { c.llm.temperature = parse_real("llm.temperature", v); }},
      {"llm.max_output_tokens",
       [](RunConfig& c, const std::string& v) { c.llm.max_output_tokens = parse_count("llm.max_output_tokens", v); }},
      {"llm.timeout", [](RunConfig& c, const std::string& v) { c.llm.timeout_seconds = parse_real("llm.timeout", v); }},
      {"llm.max_retries",
       [](RunConfig& c, const std::string& v) { c.llm.max_retries = parse_count("llm.max_retries", v); }},
      {"llm.backoff",
       [](RunConfig& c, const std::string& v) { c.llm.initial_backoff_seconds = parse_real("llm.backoff", v); }},
      {"llm.parallelism",
       [](RunConfig& c, const std::string& v) { c.llm.parallelism = parse_count("llm.parallelism", v); }},
      {"llm.context_tokens",
       [](RunConfig& c, const std::string& v) { c.llm.context_tokens = parse_count("llm.context_tokens", v); }},
      {"llm.context_margin_tokens",
       [](RunConfig& c, const std::string& v) {
         c.llm.context_margin_tokens = parse_count("llm.context_margin_tokens", v);
       }},
      {"prompt_dir", [](RunConfig& c, const std::string& v) { c.prompt_dir = v; }},
      {"mode", [](RunConfig& c, const std::string& v) { c.mode = mode_from_string(v); }},
      {"seed", [](RunConfig& c, const std::string& v) { c.seed = parse_count("seed", v); }},
      {"out_dir", [](RunConfig& c, const std::string& v) { c.out_dir = v; }},
  };
  return setters;
}

}  // namespace detail

/// Applies one `key = value` setting (value already interpolated).
inline void apply_setting(RunConfig& cfg, std::string_view key, const std::string& value) {
  const auto& setters = detail::config_setters();
  auto it = setters.find(key);
  if (it == setters.end()) throw Error(ErrorKind::kParse, "unknown config key '" + std::string(key) + "'");
  it->second(cfg, value);
}

/// Flat `key = value` format; '#' starts a comment line, `${NAME}` inside a
/// value is replaced by the environment variable NAME.
inline RunConfig parse_config(std::string_view text, RunConfig cfg = {}) {
  std::size_t lineno = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto eol = std::min(text.find('\n', pos), text.size());
    const auto line = trim(text.substr(pos, eol - pos));
    pos = eol + 1;
    ++lineno;
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorKind::kParse, "config line " + std::to_string(lineno) + ": expected key = value");
    }
    const auto key = trim(line.substr(0, eq));
    const auto value = detail::interpolate_env(trim(line.substr(eq + 1)), lineno);
    try {
      apply_setting(cfg, key, value);
    } catch (const Error& e) {
      throw Error(e.kind(), "config line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return cfg;
}

inline RunConfig load_config(const std::filesystem::path& path, RunConfig cfg = {}) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot read config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), std::move(cfg));
}

/// Snapshot recorded in run artifacts. Same keys as the config file; out_dir
/// is left out so the artifact does not depend on where it was written, and
/// secrets never appear (only the names of their environment variables).
inline nlohmann::ordered_json config_snapshot(const RunConfig& c) {
  nlohmann::ordered_json j;
  j["mode"] = to_string(c.mode);
  j["seed"] = c.seed;
  j["chunk_size"] = c.chunker.chunk_size;
  j["overlap"] = c.chunker.overlap;
  j["embedding.kind"] = detail::to_string(c.embedding.kind);
  j["embedding.endpoint"] = c.embedding.endpoint;
  j["embedding.model"] = c.embedding.model_name;
  j["embedding.auth_token_env"] = c.embedding.auth_token_env;
  j["embedding.batch_size"] = c.embedding.batch_size;
  j["embedding.timeout"] = c.embedding.timeout_seconds;
  j["embedding.max_retries"] = c.embedding.max_retries;
  j["embedding.parallelism"] = c.embedding.parallelism;
  j["embedding.backoff"] = c.embedding.initial_backoff_seconds;
  j["embedding.request_model_field"] = c.embedding.request_model_field;
  j["embedding.request_input_field"] = c.embedding.request_input_field;
  j["embedding.response_items_field"] = c.embedding.response_items_field;
  j["embedding.response_vector_field"] = c.embedding.response_vector_field;
  if (c.k) j["k"] = *c.k;
  else j["k"] = "auto";
  j["top_k"] = c.top_k;
  j["collapse_runs"] = c.collapse_runs;
  j["path_cap"] = c.path_cap;
  j["kmeans.n_init"] = c.kmeans.n_init;
  j["kmeans.max_iters"] = c.kmeans.max_iters;
  j["kmeans.tol"] = c.kmeans.tol;
  j["llm.kind"] = detail::to_string(c.llm.kind);
  j["llm.endpoint"] = c.llm.endpoint;
  j["llm.model"] = c.llm.model_name;
  j["llm.auth_token_env"] = c.llm.auth_token_env;
  j["llm.temperature"] = c.llm.temperature;
  j["llm.max_output_tokens"] = c.llm.max_output_tokens;
  j["llm.timeout"] = c.llm.timeout_seconds;
  j["llm.max_retries"] = c.llm.max_retries;
  j["llm.backoff"] = c.llm.initial_backoff_seconds;
  j["llm.parallelism"] = c.llm.parallelism;
  j["llm.context_tokens"] = c.llm.context_tokens;
  j["llm.context_margin_tokens"] = c.llm.context_margin_tokens;
  j["prompt_dir"] = c.prompt_dir;
  return j;
}

/// Rebuilds a config from a snapshot (values re-parsed through the setters).
inline RunConfig config_from_snapshot(const nlohmann::ordered_json& j) {
  RunConfig cfg;
  for (const auto& [key, value] : j.items()) {
    apply_setting(cfg, key, value.is_string() ? value.get<std::string>() : value.dump());
  }
  return cfg;
}

/// Renders a config in the flat file format, one key per line.
inline std::string render_config(const RunConfig& c) {
  std::string out;
  const auto snapshot = config_snapshot(c);
  for (const auto& [key, value] : snapshot.items()) {
    out += key + " = " + (value.is_string() ? value.get<std::string>() : value.dump()) + "\n";
  }
  out += "out_dir = " + c.out_dir + "\n";
  return out;
}

}  // namespace mcsum
