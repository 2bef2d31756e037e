#pragma once

#include "mcsum/http.hpp"
#include "mcsum/llm.hpp"

namespace mcsum {

/// Chat-completions client:
///   {"model", "temperature", "max_tokens", "messages": [system, user]}
///   -> {"choices": [{"message": {"content": "..."}}], "usage": {...}}
class RemoteChatProvider final : public LlmProvider {
 public:
  explicit RemoteChatProvider(LlmProviderConfig cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }

  LlmResponse complete(const LlmRequest& request) override {
    nlohmann::json body = {
        {"model", cfg_.model_name},
        {"temperature", cfg_.temperature},
        {"max_tokens", cfg_.max_output_tokens},
        {"messages",
         {{{"role", "system"}, {"content", request.system}}, {{"role", "user"}, {"content", request.user}}}},
    };
    const auto reply = http::post_json(cfg_.endpoint, body, http::bearer_auth(cfg_.auth_token_env),
                                       {cfg_.max_retries, cfg_.initial_backoff_seconds, cfg_.timeout_seconds});
    return parse_response(reply);
  }

  std::string model_name() const override { return cfg_.model_name; }
  std::size_t parallelism() const override { return cfg_.parallelism; }

  LlmResponse parse_response(const nlohmann::json& reply) const {
    LlmResponse r;
    try {
      r.text = reply.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception&) {
      throw Error(ErrorKind::kProtocol, "chat response lacks choices[0].message.content");
    }
    if (trim(r.text).empty()) throw Error(ErrorKind::kProtocol, "chat provider returned an empty completion");
    r.model = reply.value("model", cfg_.model_name);
    if (reply.contains("usage") && reply["usage"].is_object()) {
      r.prompt_tokens = reply["usage"].value("prompt_tokens", std::size_t{0});
      r.completion_tokens = reply["usage"].value("completion_tokens", std::size_t{0});
    }
    return r;
  }

 private:
  LlmProviderConfig cfg_;
};

}  // namespace mcsum
