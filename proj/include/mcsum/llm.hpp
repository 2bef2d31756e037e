#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "mcsum/chunker.hpp"
#include "mcsum/error.hpp"
#include "mcsum/prompts.hpp"
#include "mcsum/text.hpp"

namespace mcsum {

enum class LlmKind { kRemoteChat, kMockExtractive };

struct LlmProviderConfig {
  LlmKind kind = LlmKind::kMockExtractive;
  std::string endpoint;  // e.g. https://api.openai.com/v1/chat/completions
  std::string model_name = "gpt-4o-mini";
  std::string auth_token_env = "OPENAI_API_KEY";
  double temperature = 0.0;
  std::size_t max_output_tokens = 1024;
  double timeout_seconds = 120.0;
  std::size_t max_retries = 3;
  double initial_backoff_seconds = 1.0;
  std::size_t parallelism = 4;
  // Context window in word-tokenizer tokens; llm-full splits above
  // context_tokens - context_margin_tokens.
  std::size_t context_tokens = 128000;
  std::size_t context_margin_tokens = 4096;

  void validate() const {
    if (temperature < 0.0) throw Error(ErrorKind::kContract, "llm temperature must be >= 0");
    if (max_output_tokens < 1) throw Error(ErrorKind::kContract, "llm max_output_tokens must be >= 1");
    if (context_margin_tokens >= context_tokens) {
      throw Error(ErrorKind::kContract, "llm context_margin_tokens must be below context_tokens");
    }
    if (kind == LlmKind::kRemoteChat && !endpoint.starts_with("http://") && !endpoint.starts_with("https://")) {
      throw Error(ErrorKind::kContract, "remote chat provider needs an http(s) endpoint, got '" + endpoint + "'");
    }
  }
};

enum class RequestKind { kClusterSummary, kFinalAggregate, kFullDocument };

struct LlmRequest {
  RequestKind kind = RequestKind::kClusterSummary;
  std::vector<std::string> passages;  // raw inputs, in prompt order
  std::string system;                 // rendered prompt
  std::string user;
};

struct LlmResponse {
  std::string text;
  std::string model;
  std::size_t prompt_tokens = 0;
  std::size_t completion_tokens = 0;
};

class LlmProvider {
 public:
  virtual ~LlmProvider() = default;
  virtual LlmResponse complete(const LlmRequest& request) = 0;
  virtual std::string model_name() const = 0;
  virtual std::size_t parallelism() const { return 1; }
};

inline LlmRequest make_cluster_request(const PromptSet& prompts, std::vector<std::string> passages) {
  LlmRequest r{RequestKind::kClusterSummary, std::move(passages), prompts.cluster_summary.system, {}};
  r.user = render(prompts.cluster_summary.user, "passages", enumerate_blocks(r.passages, "Passage"));
  return r;
}

inline LlmRequest make_aggregate_request(const PromptSet& prompts, std::vector<std::string> summaries) {
  LlmRequest r{RequestKind::kFinalAggregate, std::move(summaries), prompts.final_summary.system, {}};
  r.user = render(prompts.final_summary.user, "summaries", enumerate_blocks(r.passages, "Section"));
  return r;
}

inline LlmRequest make_full_request(const PromptSet& prompts, std::string document) {
  LlmRequest r{RequestKind::kFullDocument, {std::move(document)}, prompts.full_document.system, {}};
  r.user = render(prompts.full_document.user, "document", r.passages.front());
  return r;
}

/// Offline stand-in for a chat model. Cluster and full-document requests
/// answer with the first sentence of every passage joined by a space;
/// aggregation answers with the passages joined by a blank line.
class MockExtractiveProvider final : public LlmProvider {
 public:
  explicit MockExtractiveProvider(std::string model_name = "mock-extractive") : model_(std::move(model_name)) {}

  LlmResponse complete(const LlmRequest& request) override {
    std::vector<std::string> parts;
    if (request.kind == RequestKind::kFinalAggregate) {
      for (const auto& p : request.passages) parts.emplace_back(trim(p));
    } else {
      for (const auto& p : request.passages) {
        auto sentences = split_sentences(p);
        if (!sentences.empty()) parts.push_back(std::move(sentences.front()));
      }
    }
    LlmResponse r;
    r.text = join(parts, request.kind == RequestKind::kFinalAggregate ? "\n\n" : " ");
    r.model = model_;
    r.prompt_tokens = tokenize(request.system).size() + tokenize(request.user).size();
    r.completion_tokens = tokenize(r.text).size();
    return r;
  }

  std::string model_name() const override { return model_; }

 private:
  std::string model_;
};

}  // namespace mcsum
