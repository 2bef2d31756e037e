#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "mcsum/chunker.hpp"
#include "mcsum/concurrency.hpp"
#include "mcsum/error.hpp"
#include "mcsum/hash.hpp"
#include "mcsum/text.hpp"

namespace mcsum {

class EmbeddingVector {
 public:
  EmbeddingVector() = default;
  explicit EmbeddingVector(std::vector<double> values) : values_(std::move(values)) {
    for (double v : values_) {
      if (!std::isfinite(v)) throw Error(ErrorKind::kProtocol, "embedding contains a non-finite value");
    }
  }
  EmbeddingVector(std::initializer_list<double> values) : EmbeddingVector(std::vector<double>(values)) {}

  std::size_t dim() const noexcept { return values_.size(); }
  const std::vector<double>& values() const noexcept { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }

  friend bool operator==(const EmbeddingVector&, const EmbeddingVector&) = default;

 private:
  std::vector<double> values_;
};

inline double dot(const EmbeddingVector& a, const EmbeddingVector& b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) sum += a[i] * b[i];
  return sum;
}

inline double norm(const EmbeddingVector& v) { return std::sqrt(dot(v, v)); }

inline EmbeddingVector normalize(const EmbeddingVector& v) {
  const double n = norm(v);
  if (n == 0.0) throw Error(ErrorKind::kDegenerateInput, "cannot normalize a zero vector");
  std::vector<double> out(v.values());
  for (double& x : out) x /= n;
  return EmbeddingVector(std::move(out));
}

inline double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.dim() != b.dim()) {
    throw Error(ErrorKind::kContract, "cosine_similarity: dimension mismatch (" +
                                          std::to_string(a.dim()) + " vs " + std::to_string(b.dim()) + ")");
  }
  const double na = norm(a);
  const double nb = norm(b);
  if (na == 0.0 || nb == 0.0) throw Error(ErrorKind::kDegenerateInput, "cosine_similarity: zero vector");
  return std::clamp(dot(a, b) / (na * nb), -1.0, 1.0);
}

enum class EmbeddingKind { kRemote, kDeterministicTest };

struct EmbeddingProviderConfig {
  EmbeddingKind kind = EmbeddingKind::kDeterministicTest;
  std::string endpoint;  // e.g. http://localhost:8080/v1/embeddings
  std::string model_name = "nomic-embed-text-v1";
  std::string auth_token_env;
  std::size_t batch_size = 32;
  double timeout_seconds = 60.0;
  std::size_t max_retries = 3;
  std::size_t parallelism = 1;
  double initial_backoff_seconds = 0.5;
  // Wire field names of the remote contract.
  std::string request_model_field = "model";
  std::string request_input_field = "input";
  std::string response_items_field = "data";
  std::string response_vector_field = "embedding";

  void validate() const {
    if (batch_size < 1) throw Error(ErrorKind::kContract, "embedding batch_size must be >= 1");
    if (parallelism < 1) throw Error(ErrorKind::kContract, "embedding parallelism must be >= 1");
    if (kind == EmbeddingKind::kRemote && !endpoint.starts_with("http://") && !endpoint.starts_with("https://")) {
      throw Error(ErrorKind::kContract, "remote embedding provider needs an http(s) endpoint, got '" + endpoint + "'");
    }
  }
};

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;

  // One vector per text, same order. Implementations may assume
  // texts.size() <= batch_size().
  virtual std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) = 0;
  virtual std::string model_name() const = 0;
  virtual std::size_t batch_size() const { return 32; }
  virtual std::size_t parallelism() const { return 1; }
};

/// Offline embedder for tests and reproducible runs: every word token
/// (ASCII-lowercased) is hashed with FNV-1a 64 into one of 64 buckets, bucket
/// counts are summed and the result L2-normalized. Texts without word tokens
/// fall back to hashing their punctuation tokens, and texts with no tokens at
/// all map to a fixed sentinel feature so the vector is never zero.
class DeterministicEmbedder final : public EmbeddingProvider {
 public:
  static constexpr std::size_t kDim = 64;

  explicit DeterministicEmbedder(std::string model_name = "deterministic-test-64",
                                 std::uint64_t seed = 0x6d63737566ULL)
      : model_name_(std::move(model_name)), seed_(seed) {}

  EmbeddingVector embed_one(std::string_view text) const {
    const auto seq = tokenize(text);
    std::vector<std::string> features;
    for (const auto& tok : seq.tokens) {
      if (is_word(tok)) features.push_back(ascii_lower(tok));
    }
    if (features.empty()) features = seq.tokens;
    if (features.empty()) features.emplace_back("\x01<empty>");

    std::vector<double> counts(kDim, 0.0);
    const std::uint64_t basis = fnv1a64(std::string_view(reinterpret_cast<const char*>(&seed_), sizeof seed_));
    for (const auto& f : features) counts[fnv1a64(f, basis) % kDim] += 1.0;
    return normalize(EmbeddingVector(std::move(counts)));
  }

  std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) override {
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(embed_one(t));
    return out;
  }

  std::string model_name() const override { return model_name_; }
  std::size_t batch_size() const override { return 256; }

 private:
  static bool is_word(const std::string& tok) {
    const auto c = detail::decode_utf8(tok, 0);
    return c.valid && detail::classify(c.code) == detail::CharClass::kWord;
  }

  std::string model_name_;
  std::uint64_t seed_;
};

/// 128-bit content key of (model_name, text), hex encoded.
inline std::string content_key(std::string_view model_name, std::string_view text) {
  std::string material;
  material.reserve(model_name.size() + text.size() + 1);
  material.append(model_name).push_back('\x1f');
  material.append(text);
  return to_hex(fnv1a64(material)) + to_hex(fnv1a64(material, 0x84222325cbf29ce4ULL));
}

/// Append-only on-disk embedding cache. One line per entry:
///   <key> <dim> <16-hex-digit IEEE bits> ... <line checksum>
/// Lines that fail to parse or whose checksum mismatches are skipped on load
/// and reported through the warning sink. Later lines for the same key win.
class EmbeddingCache {
 public:
  using WarningSink = std::function<void(const std::string&)>;

  EmbeddingCache() = default;  // in-memory only
  explicit EmbeddingCache(std::filesystem::path file, WarningSink warn = default_warning_sink())
      : file_(std::move(file)), warn_(std::move(warn)) {
    load();
  }

  std::optional<EmbeddingVector> get(const std::string& key) const {
    std::shared_lock lock(mutex_);
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
  }

  void put(const std::string& key, const EmbeddingVector& v) {
    std::unique_lock lock(mutex_);
    entries_[key] = v;
    if (!file_.empty()) {
      std::ofstream out(file_, std::ios::app | std::ios::binary);
      if (!out) throw Error(ErrorKind::kIo, "cannot open embedding cache " + file_.string());
      out << encode_line(key, v) << '\n';
    }
  }

  std::size_t size() const {
    std::shared_lock lock(mutex_);
    return entries_.size();
  }

  std::size_t skipped_lines() const noexcept { return skipped_; }

  static std::string encode_line(const std::string& key, const EmbeddingVector& v) {
    std::string body = key + ' ' + std::to_string(v.dim());
    for (double x : v.values()) body += ' ' + to_hex(std::bit_cast<std::uint64_t>(x));
    return body + ' ' + to_hex(fnv1a64(body));
  }

  static std::optional<std::pair<std::string, EmbeddingVector>> decode_line(const std::string& line) {
    const auto last_space = line.rfind(' ');
    if (last_space == std::string::npos) return std::nullopt;
    const std::string body = line.substr(0, last_space);
    if (line.substr(last_space + 1) != to_hex(fnv1a64(body))) return std::nullopt;

    std::istringstream in(body);
    std::string key;
    std::size_t dim = 0;
    if (!(in >> key >> dim)) return std::nullopt;
    std::vector<double> values;
    values.reserve(dim);
    std::string word;
    while (in >> word) {
      if (word.size() != 16) return std::nullopt;
      std::uint64_t bits = 0;
      try {
        bits = std::stoull(word, nullptr, 16);
      } catch (const std::exception&) {
        return std::nullopt;
      }
      values.push_back(std::bit_cast<double>(bits));
    }
    if (values.size() != dim || dim == 0) return std::nullopt;
    for (double x : values) {
      if (!std::isfinite(x)) return std::nullopt;
    }
    return std::make_pair(std::move(key), EmbeddingVector(std::move(values)));
  }

 private:
  static WarningSink default_warning_sink() {
    return [](const std::string& msg) { std::cerr << "warning: " << msg << '\n'; };
  }

  void load() {
    std::ifstream in(file_, std::ios::binary);
    if (!in) return;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      if (auto entry = decode_line(line)) {
        entries_[entry->first] = std::move(entry->second);
      } else {
        ++skipped_;
        if (warn_) warn_("corrupt embedding cache entry at " + file_.string() + ":" + std::to_string(lineno));
      }
    }
  }

  std::filesystem::path file_;
  WarningSink warn_;
  mutable std::shared_mutex mutex_;
  std::unordered_map<std::string, EmbeddingVector> entries_;
  std::size_t skipped_ = 0;
};

/// Embeds `texts` through `provider`, consulting `cache` first when given.
/// Misses are sent in provider-sized batches, up to provider.parallelism()
/// batches in flight. Every returned vector is L2-normalized.
inline std::vector<EmbeddingVector> embed_batch(const std::vector<std::string>& texts,
                                                EmbeddingProvider& provider,
                                                EmbeddingCache* cache = nullptr) {
  if (texts.empty()) throw Error(ErrorKind::kContract, "embed_batch: no texts");

  const std::string model = provider.model_name();
  std::vector<std::optional<EmbeddingVector>> raw(texts.size());
  std::vector<std::size_t> misses;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    if (cache) raw[i] = cache->get(content_key(model, texts[i]));
    if (!raw[i]) misses.push_back(i);
  }

  const std::size_t batch = std::max<std::size_t>(1, provider.batch_size());
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t b = 0; b < misses.size(); b += batch) {
    batches.emplace_back(misses.begin() + static_cast<std::ptrdiff_t>(b),
                         misses.begin() + static_cast<std::ptrdiff_t>(std::min(b + batch, misses.size())));
  }

  auto run_batch = [&](const std::vector<std::size_t>& ids) {
    std::vector<std::string> inputs;
    inputs.reserve(ids.size());
    for (auto i : ids) inputs.push_back(texts[i]);
    auto vectors = provider.embed(inputs);
    if (vectors.size() != ids.size()) {
      throw Error(ErrorKind::kProtocol, "provider returned " + std::to_string(vectors.size()) +
                                            " vectors for " + std::to_string(ids.size()) + " inputs");
    }
    for (std::size_t j = 0; j < ids.size(); ++j) {
      if (cache) cache->put(content_key(model, texts[ids[j]]), vectors[j]);
      raw[ids[j]] = std::move(vectors[j]);
    }
  };

  parallel_for(batches.size(), provider.parallelism(), [&](std::size_t b) { run_batch(batches[b]); });

  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (auto& v : raw) {
    if (v->dim() != raw.front()->dim()) {
      throw Error(ErrorKind::kProtocol, "embedding dimension mismatch (" + std::to_string(v->dim()) + " vs " +
                                            std::to_string(raw.front()->dim()) + ")");
    }
    out.push_back(normalize(*v));
  }
  return out;
}

}  // namespace mcsum
