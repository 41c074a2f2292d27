#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sore {

// Dense float32 vector. Providers always return unit-norm instances.
class EmbeddingVector {
 public:
  EmbeddingVector() = default;
  explicit EmbeddingVector(std::vector<float> values) : values_(std::move(values)) {}

  // L2-normalizes `values`. Throws InvalidArgument on zero norm or
  // non-finite components.
  static EmbeddingVector normalized(std::span<const double> values);
  static EmbeddingVector normalized(std::span<const float> values);

  std::size_t dim() const { return values_.size(); }
  std::span<const float> values() const { return values_; }
  float operator[](std::size_t i) const { return values_[i]; }
  double norm() const;

  bool operator==(const EmbeddingVector&) const = default;

 private:
  std::vector<float> values_;
};

// Throws DimensionMismatch when dims differ.
float dot(const EmbeddingVector& a, const EmbeddingVector& b);

// 1 - dot(a, b), clamped to [0, 2]. Equals cosine distance for unit vectors.
float ip_distance(const EmbeddingVector& a, const EmbeddingVector& b);

// Unchecked kernel shared by the ANN index.
float ip_distance(std::span<const float> a, std::span<const float> b);

enum class ProviderKind { Hashing, Remote };

struct EmbedderConfig {
  ProviderKind provider = ProviderKind::Hashing;
  std::size_t dim = 256;
  std::size_t batch_size = 96;
  std::uint64_t hashing_seed = 0;
  std::string remote_endpoint;
  std::string remote_auth;
  int timeout_ms = 10000;
  int max_retries = 3;
  int retry_backoff_ms = 100;
  // Inputs longer than this many code points are truncated before embedding.
  std::size_t max_text_chars = 8000;

  void validate() const;
};

// Applies SORE_EMBED_ENDPOINT when set.
void apply_env_overrides(EmbedderConfig& config);

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;

  virtual std::size_t dim() const = 0;
  virtual std::string name() const = 0;

  // A single provider call. Must return one unit-norm vector per text.
  virtual std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) const = 0;

  virtual bool healthy() const { return true; }
};

// Seeded 64-bit hash of a byte string (FNV-1a body, splitmix64 finalizer).
std::uint64_t seeded_hash64(std::string_view bytes, std::uint64_t seed);

// Signed feature hashing of lowercase character 3/4/5-grams with log(1 + count)
// weights, L2-normalized. Throws TextTooShort below 3 code points and
// InvalidArgument when dim < 16.
EmbeddingVector hash_embed(std::string_view text, std::size_t dim, std::uint64_t seed);

class HashingEmbedder final : public EmbeddingProvider {
 public:
  HashingEmbedder(std::size_t dim, std::uint64_t seed);

  std::size_t dim() const override { return dim_; }
  std::string name() const override { return "hashing"; }
  std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) const override;

 private:
  std::size_t dim_;
  std::uint64_t seed_;
};

std::unique_ptr<EmbeddingProvider> make_provider(const EmbedderConfig& config);

// Splits `texts` into `batch_size` chunks, one provider call per chunk, and
// concatenates the results in input order. Texts longer than
// `max_text_chars` are truncated first.
std::vector<EmbeddingVector> embed_texts(std::span<const std::string> texts,
                                         const EmbeddingProvider& provider,
                                         std::size_t batch_size,
                                         std::size_t max_text_chars = 8000);

std::vector<EmbeddingVector> embed_texts(std::span<const std::string> texts,
                                         const EmbedderConfig& config);

}  // namespace sore
