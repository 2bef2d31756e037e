#pragma once

#include <memory>

#include "mcsum/embeddings.hpp"
#include "mcsum/llm.hpp"
#include "mcsum/remote_chat.hpp"
#include "mcsum/remote_embedder.hpp"

namespace mcsum {

inline std::unique_ptr<EmbeddingProvider> make_embedder(const EmbeddingProviderConfig& cfg) {
  cfg.validate();
  if (cfg.kind == EmbeddingKind::kRemote) return std::make_unique<RemoteEmbedder>(cfg);
  return std::make_unique<DeterministicEmbedder>();
}

inline std::unique_ptr<LlmProvider> make_llm(const LlmProviderConfig& cfg) {
  cfg.validate();
  if (cfg.kind == LlmKind::kRemoteChat) return std::make_unique<RemoteChatProvider>(cfg);
  return std::make_unique<MockExtractiveProvider>();
}

}  // namespace mcsum
