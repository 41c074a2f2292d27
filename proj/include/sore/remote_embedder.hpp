#pragma once

#include <string>

#include "sore/embedder.hpp"

namespace sore {

// Generic JSON-over-HTTP embedding client.
//
//   POST <endpoint>   Authorization: Bearer <token>
//   request:  {"texts": ["...", ...], "dim": N}
//   response: {"vectors": [[f, ...], ...]}
//
// Transport failures, 429 and 5xx responses are retried with exponential
// backoff (retry_backoff_ms * 2^attempt) up to max_retries times, after which
// ProviderUnavailable is thrown. Vectors of the wrong length raise
// DimensionMismatch. Output is always re-normalized client-side.
class RemoteEmbedder final : public EmbeddingProvider {
 public:
  explicit RemoteEmbedder(EmbedderConfig config);

  std::size_t dim() const override { return config_.dim; }
  std::string name() const override { return "remote"; }
  std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) const override;
  bool healthy() const override;

 private:
  std::vector<EmbeddingVector> call(std::span<const std::string> texts, int max_retries) const;

  EmbedderConfig config_;
  std::string base_url_;
  std::string path_;
};

}  // namespace sore
