#pragma once

#include <string>
#include <vector>

#include "mcsum/embeddings.hpp"
#include "mcsum/http.hpp"

namespace mcsum {

/// Embedding client for "model + list of inputs -> list of vectors" HTTP
/// APIs (OpenAI, Nomic, Ollama, TEI style). Field names come from the config;
/// with the defaults the exchange is
///   request:  {"model": "...", "input": ["...", ...]}
///   response: {"data": [{"embedding": [...], "index": 0}, ...]}
/// An empty response_items_field means the response is the list itself, an
/// empty response_vector_field means each item is the bare vector.
class RemoteEmbedder final : public EmbeddingProvider {
 public:
  explicit RemoteEmbedder(EmbeddingProviderConfig cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }

  std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) override {
    nlohmann::json body;
    body[cfg_.request_model_field] = cfg_.model_name;
    body[cfg_.request_input_field] = texts;
    const auto reply = http::post_json(cfg_.endpoint, body, http::bearer_auth(cfg_.auth_token_env),
                                       {cfg_.max_retries, cfg_.initial_backoff_seconds, cfg_.timeout_seconds});
    return parse_response(reply, texts.size());
  }

  std::string model_name() const override { return cfg_.model_name; }
  std::size_t batch_size() const override { return cfg_.batch_size; }
  std::size_t parallelism() const override { return cfg_.parallelism; }

  std::vector<EmbeddingVector> parse_response(const nlohmann::json& reply, std::size_t expected) const {
    const nlohmann::json* items = &reply;
    if (!cfg_.response_items_field.empty()) {
      if (!reply.is_object() || !reply.contains(cfg_.response_items_field)) {
        throw Error(ErrorKind::kProtocol, "embedding response lacks field '" + cfg_.response_items_field + "'");
      }
      items = &reply.at(cfg_.response_items_field);
    }
    if (!items->is_array() || items->size() != expected) {
      throw Error(ErrorKind::kProtocol, "embedding response must hold " + std::to_string(expected) + " items");
    }

    std::vector<EmbeddingVector> out(expected);
    std::vector<bool> filled(expected, false);
    for (std::size_t pos = 0; pos < items->size(); ++pos) {
      const auto& item = (*items)[pos];
      std::size_t slot = pos;
      if (item.is_object() && item.contains("index") && item["index"].is_number_unsigned()) {
        slot = item["index"].get<std::size_t>();
      }
      const nlohmann::json* vec = &item;
      if (!cfg_.response_vector_field.empty()) {
        if (!item.is_object() || !item.contains(cfg_.response_vector_field)) {
          throw Error(ErrorKind::kProtocol, "embedding item lacks field '" + cfg_.response_vector_field + "'");
        }
        vec = &item.at(cfg_.response_vector_field);
      }
      if (slot >= expected || filled[slot] || !vec->is_array() || vec->empty()) {
        throw Error(ErrorKind::kProtocol, "malformed embedding item at position " + std::to_string(pos));
      }
      std::vector<double> values;
      values.reserve(vec->size());
      for (const auto& x : *vec) {
        if (!x.is_number()) throw Error(ErrorKind::kProtocol, "embedding holds a non-number");
        values.push_back(x.get<double>());
      }
      out[slot] = EmbeddingVector(std::move(values));
      filled[slot] = true;
    }
    for (std::size_t i = 1; i < out.size(); ++i) {
      if (out[i].dim() != out[0].dim()) throw Error(ErrorKind::kProtocol, "embedding dimension mismatch in batch");
    }
    return out;
  }

 private:
  EmbeddingProviderConfig cfg_;
};

}  // namespace mcsum
