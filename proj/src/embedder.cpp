#include "sore/embedder.hpp"

#include "sore/errors.hpp"
#include "sore/remote_embedder.hpp"
#include "sore/text.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>

namespace sore {

namespace {

template <typename T>
EmbeddingVector normalize_impl(std::span<const T> values) {
  double sq = 0.0;
  for (T v : values) {
    if (!std::isfinite(static_cast<double>(v))) {
      throw Error(ErrorKind::InvalidArgument, "embedding has non-finite component");
    }
    sq += static_cast<double>(v) * static_cast<double>(v);
  }
  if (sq <= 0.0) throw Error(ErrorKind::InvalidArgument, "embedding has zero norm");
  const double inv = 1.0 / std::sqrt(sq);
  std::vector<float> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    out[i] = static_cast<float>(static_cast<double>(values[i]) * inv);
  }
  return EmbeddingVector(std::move(out));
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace

EmbeddingVector EmbeddingVector::normalized(std::span<const double> values) {
  return normalize_impl(values);
}

EmbeddingVector EmbeddingVector::normalized(std::span<const float> values) {
  return normalize_impl(values);
}

double EmbeddingVector::norm() const {
  double sq = 0.0;
  for (float v : values_) sq += static_cast<double>(v) * v;
  return std::sqrt(sq);
}

float ip_distance(std::span<const float> a, std::span<const float> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += static_cast<double>(a[i]) * b[i];
  return static_cast<float>(std::clamp(1.0 - acc, 0.0, 2.0));
}

float dot(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.dim() != b.dim()) {
    throw Error(ErrorKind::DimensionMismatch,
                "dimension mismatch: " + std::to_string(a.dim()) + " vs " + std::to_string(b.dim()));
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) acc += static_cast<double>(a[i]) * b[i];
  return static_cast<float>(acc);
}

float ip_distance(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.dim() != b.dim()) {
    throw Error(ErrorKind::DimensionMismatch,
                "dimension mismatch: " + std::to_string(a.dim()) + " vs " + std::to_string(b.dim()));
  }
  return ip_distance(a.values(), b.values());
}

void EmbedderConfig::validate() const {
  if (dim == 0) throw Error(ErrorKind::InvalidArgument, "embedder dim must be > 0");
  if (batch_size == 0) throw Error(ErrorKind::InvalidArgument, "batch_size must be > 0");
  if (provider == ProviderKind::Hashing && dim < 16) {
    throw Error(ErrorKind::InvalidArgument, "hashing embedder requires dim >= 16");
  }
  if (provider == ProviderKind::Remote && remote_endpoint.empty()) {
    throw Error(ErrorKind::InvalidArgument, "remote embedder requires an endpoint");
  }
  if (max_retries < 0) throw Error(ErrorKind::InvalidArgument, "max_retries must be >= 0");
}

void apply_env_overrides(EmbedderConfig& config) {
  if (const char* endpoint = std::getenv("SORE_EMBED_ENDPOINT"); endpoint && *endpoint) {
    config.remote_endpoint = endpoint;
  }
}

std::uint64_t seeded_hash64(std::string_view bytes, std::uint64_t seed) {
  std::uint64_t h = 0xCBF29CE484222325ULL ^ splitmix64(seed);
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return splitmix64(h ^ bytes.size());
}

EmbeddingVector hash_embed(std::string_view text, std::size_t dim, std::uint64_t seed) {
  if (dim < 16) throw Error(ErrorKind::InvalidArgument, "hash_embed requires dim >= 16");
  const std::string lowered = text::to_lower(text::sanitize_utf8(text));

  // Byte offsets of code point starts, plus the end.
  std::vector<std::size_t> bounds;
  for (std::size_t i = 0; i < lowered.size(); ++i) {
    if ((static_cast<unsigned char>(lowered[i]) & 0xC0) != 0x80) bounds.push_back(i);
  }
  const std::size_t length = bounds.size();
  bounds.push_back(lowered.size());
  if (length < 3) {
    throw Error(ErrorKind::TextTooShort, "text has fewer than 3 characters");
  }

  // Ordered map: accumulation order must not depend on hash-table layout.
  std::map<std::string_view, int> counts;
  const std::string_view view(lowered);
  for (std::size_t n = 3; n <= 5; ++n) {
    for (std::size_t i = 0; i + n <= length; ++i) {
      ++counts[view.substr(bounds[i], bounds[i + n] - bounds[i])];
    }
  }

  std::vector<double> acc(dim, 0.0);
  for (const auto& [gram, count] : counts) {
    const std::uint64_t h = seeded_hash64(gram, seed);
    const double weight = std::log1p(static_cast<double>(count));
    acc[h % dim] += (h >> 63) ? -weight : weight;
  }

  double sq = 0.0;
  for (double v : acc) sq += v * v;
  if (sq == 0.0) {
    // Every bucket cancelled; fall back to the first gram's bucket.
    const std::uint64_t h = seeded_hash64(counts.begin()->first, seed);
    acc[h % dim] = 1.0;
  }
  return EmbeddingVector::normalized(std::span<const double>(acc));
}

HashingEmbedder::HashingEmbedder(std::size_t dim, std::uint64_t seed) : dim_(dim), seed_(seed) {
  if (dim < 16) throw Error(ErrorKind::InvalidArgument, "hashing embedder requires dim >= 16");
}

std::vector<EmbeddingVector> HashingEmbedder::embed_batch(std::span<const std::string> texts) const {
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(hash_embed(t, dim_, seed_));
  return out;
}

std::unique_ptr<EmbeddingProvider> make_provider(const EmbedderConfig& config) {
  config.validate();
  if (config.provider == ProviderKind::Remote) return std::make_unique<RemoteEmbedder>(config);
  return std::make_unique<HashingEmbedder>(config.dim, config.hashing_seed);
}

std::vector<EmbeddingVector> embed_texts(std::span<const std::string> texts,
                                         const EmbeddingProvider& provider,
                                         std::size_t batch_size, std::size_t max_text_chars) {
  if (texts.empty()) throw Error(ErrorKind::InvalidArgument, "embed_texts requires at least one text");
  if (batch_size == 0) throw Error(ErrorKind::InvalidArgument, "batch_size must be > 0");
  for (const auto& t : texts) {
    if (t.empty()) throw Error(ErrorKind::InvalidArgument, "embed_texts received an empty text");
  }

  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  std::vector<std::string> batch;
  for (std::size_t start = 0; start < texts.size(); start += batch_size) {
    const std::size_t end = std::min(texts.size(), start + batch_size);
    batch.clear();
    for (std::size_t i = start; i < end; ++i) {
      batch.push_back(text::truncate_codepoints(texts[i], max_text_chars));
    }
    auto vectors = provider.embed_batch(batch);
    if (vectors.size() != batch.size()) {
      throw Error(ErrorKind::ProviderUnavailable, "provider returned " + std::to_string(vectors.size()) +
                                                      " vectors for " + std::to_string(batch.size()) +
                                                      " texts");
    }
    for (auto& v : vectors) {
      if (v.dim() != provider.dim()) {
        throw Error(ErrorKind::DimensionMismatch, "provider returned dim " + std::to_string(v.dim()) +
                                                      ", expected " + std::to_string(provider.dim()));
      }
      out.push_back(std::move(v));
    }
  }
  return out;
}

std::vector<EmbeddingVector> embed_texts(std::span<const std::string> texts,
                                         const EmbedderConfig& config) {
  auto provider = make_provider(config);
  return embed_texts(texts, *provider, config.batch_size, config.max_text_chars);
}

}  // namespace sore
