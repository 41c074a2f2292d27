#include "sore/embedder.hpp"
#include "sore/errors.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <unordered_map>

using namespace sore;

namespace {

// Independent restatement of the hashing embedder for ASCII input: FNV-1a
// over the gram bytes with a splitmix-derived basis, splitmix finalizer,
// signed bucket, log1p(count) weight, L2 normalization.
std::uint64_t ref_splitmix(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t ref_hash(const std::string& s, std::uint64_t seed) {
  std::uint64_t h = 14695981039346656037ULL ^ ref_splitmix(seed);
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return ref_splitmix(h ^ s.size());
}

std::vector<double> ref_embed_ascii(std::string text, std::size_t dim, std::uint64_t seed) {
  for (auto& c : text) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  std::unordered_map<std::string, int> counts;
  for (std::size_t n = 3; n <= 5; ++n) {
    for (std::size_t i = 0; i + n <= text.size(); ++i) ++counts[text.substr(i, n)];
  }
  std::vector<double> v(dim, 0.0);
  for (const auto& [g, c] : counts) {
    const auto h = ref_hash(g, seed);
    v[h % dim] += ((h >> 63) ? -1.0 : 1.0) * std::log(1.0 + c);
  }
  double norm = 0.0;
  for (double x : v) norm += x * x;
  norm = std::sqrt(norm);
  for (auto& x : v) x /= norm;
  return v;
}

class CountingProvider : public EmbeddingProvider {
 public:
  std::size_t dim() const override { return 16; }
  std::string name() const override { return "counting"; }
  std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) const override {
    calls.push_back(texts.size());
    for (const auto& t : texts) seen.push_back(t);
    std::vector<EmbeddingVector> out;
    for (const auto& t : texts) out.push_back(hash_embed(t, 16, 0));
    return out;
  }
  mutable std::vector<std::size_t> calls;
  mutable std::vector<std::string> seen;
};

class ShortProvider : public CountingProvider {
 public:
  std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) const override {
    auto v = CountingProvider::embed_batch(texts);
    v.pop_back();
    return v;
  }
};

}  // namespace

TEST(HashEmbed, MatchesReferenceImplementation) {
  std::mt19937_64 rng(3);
  const std::string alphabet = "abcdefghij KLMNOP.,-";
  for (int i = 0; i < 300; ++i) {
    std::string s;
    const std::size_t len = 3 + rng() % 60;
    for (std::size_t j = 0; j < len; ++j) s += alphabet[rng() % alphabet.size()];
    const std::size_t dim = (i % 2) ? 64 : 256;
    const std::uint64_t seed = rng() % 5;
    const auto ref = ref_embed_ascii(s, dim, seed);
    const auto got = hash_embed(s, dim, seed);
    ASSERT_EQ(got.dim(), dim);
    for (std::size_t k = 0; k < dim; ++k) ASSERT_NEAR(got[k], ref[k], 1e-6) << s;
  }
}

TEST(HashEmbed, UnitNormAndDeterministic) {
  const auto a = hash_embed("Semantic outlier removal", 256, 0);
  EXPECT_NEAR(a.norm(), 1.0, 1e-6);
  EXPECT_EQ(a, hash_embed("Semantic outlier removal", 256, 0));
  EXPECT_NE(a, hash_embed("Semantic outlier removal", 256, 1));
}

TEST(HashEmbed, CaseInsensitive) {
  EXPECT_EQ(hash_embed("All Rights Reserved", 256, 0), hash_embed("all rights reserved", 256, 0));
  EXPECT_NEAR(ip_distance(hash_embed("HOME", 256, 0), hash_embed("home", 256, 0)), 0.0f, 1e-6);
}

TEST(HashEmbed, RejectsShortTextAndSmallDim) {
  try {
    hash_embed("ab", 256, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::TextTooShort);
  }
  EXPECT_NO_THROW(hash_embed("abc", 256, 0));
  EXPECT_NO_THROW(hash_embed("\xC3\xA9t\xC3\xA9", 256, 0));  // 3 code points, 5 bytes
  EXPECT_THROW(hash_embed("abcdef", 8, 0), Error);
}

TEST(HashEmbed, SimilarTextIsCloser) {
  const auto a = hash_embed("the orchestra rehearsal", 256, 0);
  const auto b = hash_embed("orchestra rehearsals", 256, 0);
  const auto c = hash_embed("volcanic basalt crater", 256, 0);
  EXPECT_LT(ip_distance(a, b), ip_distance(a, c));
}

TEST(Vectors, DistanceRangeAndMismatch) {
  const auto a = EmbeddingVector::normalized(std::vector<double>{1, 0, 0});
  const auto b = EmbeddingVector::normalized(std::vector<double>{-1, 0, 0});
  const auto c = EmbeddingVector::normalized(std::vector<double>{0, 2, 0});
  EXPECT_FLOAT_EQ(ip_distance(a, a), 0.0f);
  EXPECT_FLOAT_EQ(ip_distance(a, b), 2.0f);
  EXPECT_FLOAT_EQ(ip_distance(a, c), 1.0f);
  const auto d = EmbeddingVector::normalized(std::vector<double>{1, 1});
  try {
    ip_distance(a, d);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DimensionMismatch);
  }
  EXPECT_THROW(EmbeddingVector::normalized(std::vector<double>{0, 0}), Error);
  EXPECT_THROW(EmbeddingVector::normalized(std::vector<double>{NAN, 1}), Error);
}

TEST(EmbedTexts, BatchesInOrder) {
  CountingProvider p;
  const std::vector<std::string> texts = {"first", "second", "third", "fourth", "fifth"};
  const auto out = embed_texts(texts, p, 2);
  EXPECT_EQ(p.calls, (std::vector<std::size_t>{2, 2, 1}));
  ASSERT_EQ(out.size(), 5u);
  for (std::size_t i = 0; i < texts.size(); ++i) EXPECT_EQ(out[i], hash_embed(texts[i], 16, 0));
}

TEST(EmbedTexts, TruncatesLongInputs) {
  CountingProvider p;
  const std::vector<std::string> texts = {std::string(50, 'x') + "\xC3\xA9\xC3\xA9"};
  embed_texts(texts, p, 8, 51);
  ASSERT_EQ(p.seen.size(), 1u);
  EXPECT_EQ(p.seen[0], std::string(50, 'x') + "\xC3\xA9");
}

TEST(EmbedTexts, ProviderCountMismatchIsAnError) {
  ShortProvider p;
  const std::vector<std::string> texts = {"alpha", "beta"};
  EXPECT_THROW(embed_texts(texts, p, 8), Error);
}

TEST(EmbedderConfig, Validation) {
  EmbedderConfig c;
  EXPECT_NO_THROW(c.validate());
  c.dim = 8;
  EXPECT_THROW(c.validate(), Error);
  c = {};
  c.provider = ProviderKind::Remote;
  EXPECT_THROW(c.validate(), Error);
  c.remote_endpoint = "http://127.0.0.1:1/embed";
  EXPECT_NO_THROW(c.validate());
  c.batch_size = 0;
  EXPECT_THROW(c.validate(), Error);
}

TEST(HashEmbed, RepeatedLetterHasAtMostTwoBuckets) {
  const auto v = hash_embed("aaaa", 64, 0);
  std::size_t nonzero = 0;
  for (std::size_t i = 0; i < v.dim(); ++i) nonzero += v[i] != 0.0f;
  EXPECT_GE(nonzero, 1u);
  EXPECT_LE(nonzero, 2u);
  EXPECT_NEAR(v.norm(), 1.0, 1e-6);
}

TEST(EmbedTexts, TwoHundredTextsInThreeCalls) {
  CountingProvider p;
  std::vector<std::string> texts;
  for (int i = 0; i < 200; ++i) texts.push_back("text number " + std::to_string(i));
  const auto out = embed_texts(texts, p, 96);
  EXPECT_EQ(p.calls, (std::vector<std::size_t>{96, 96, 8}));
  EXPECT_EQ(out.size(), 200u);
  EXPECT_EQ(out, embed_texts(texts, p, 96));
}
