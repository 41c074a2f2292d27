#include "sore/corpus_io.hpp"
#include "sore/errors.hpp"
#include "sore/segmenter.hpp"
#include "sore/synthetic_corpus.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

using namespace sore;

namespace {

std::string fixture(const std::string& name) { return read_file(std::string(SORE_FIXTURE_DIR) + "/" + name); }

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string l;
  while (std::getline(in, l)) out.push_back(l);
  return out;
}

}  // namespace

TEST(SyntheticCorpus, SeedSevenGolden) {
  const auto docs = generate_synthetic_corpus(1, 7);
  ASSERT_EQ(docs.size(), 1u);
  EXPECT_EQ(docs[0].html, fixture("synthetic_seed7.html"));
  EXPECT_EQ(docs[0].truth, fixture("synthetic_seed7.truth.txt"));
}

TEST(SyntheticCorpus, Deterministic) {
  const auto a = generate_synthetic_corpus(20, 11);
  const auto b = generate_synthetic_corpus(20, 11);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].html, b[i].html);
    EXPECT_EQ(a[i].truth, b[i].truth);
  }
  EXPECT_NE(generate_synthetic_corpus(1, 12)[0].html, a[0].html);
  // A longer run starts with the same documents.
  EXPECT_EQ(generate_synthetic_corpus(3, 11)[2].html, a[2].html);
}

TEST(SyntheticCorpus, TruthLinesAreSegmentsInOrder) {
  for (const auto& doc : generate_synthetic_corpus(40, 5, {0.5})) {
    const auto parsed = parse_document(doc.html);
    std::size_t j = 0;
    for (const auto& line : lines(doc.truth)) {
      while (j < parsed.segments.size() && parsed.segments[j].text != line) ++j;
      ASSERT_LT(j, parsed.segments.size()) << "truth line not found: " << line;
      ++j;
    }
    ASSERT_FALSE(doc.boilerplate.empty());
    EXPECT_TRUE(doc.boilerplate[0].phrase == "All rights reserved" || doc.boilerplate[0].phrase == "Copyright");
    EXPECT_GE(doc.boilerplate.size(), 3u);
    EXPECT_LE(doc.boilerplate.size(), 8u);
  }
}

TEST(SyntheticCorpus, BoilerplateStaysNearItsPhrase) {
  const auto groups = builtin_outlier_groups();
  const auto phrases = flatten_phrases(groups);
  std::vector<EmbeddingVector> pv;
  for (const auto& p : phrases) pv.push_back(hash_embed(p.phrase, 256, 0));
  std::size_t total = 0, close = 0;
  for (const auto& doc : generate_synthetic_corpus(50, 7)) {
    for (const auto& item : doc.boilerplate) {
      const auto v = hash_embed(item.text, 256, 0);
      float best = 2.0f;
      for (const auto& p : pv) best = std::min(best, ip_distance(v, p));
      ++total;
      close += best <= 0.25f;
    }
  }
  EXPECT_GE(static_cast<double>(close) / static_cast<double>(total), 0.90);
}

TEST(SyntheticCorpus, HomeAmbiguity) {
  const auto docs = generate_synthetic_corpus(30, 4, {1.0});
  for (const auto& doc : docs) {
    EXPECT_TRUE(doc.home_in_body);
    EXPECT_NE(doc.html.find("<h2>Home</h2>"), std::string::npos);
    EXPECT_NE(doc.truth.find("\nHome\n"), std::string::npos);
    EXPECT_EQ(doc.boilerplate[1].phrase, "Home");
  }
  for (const auto& doc : generate_synthetic_corpus(30, 4)) EXPECT_FALSE(doc.home_in_body);
  EXPECT_THROW(generate_synthetic_corpus(0, 1), Error);
  EXPECT_THROW(generate_synthetic_corpus(1, 1, {1.5}), Error);
}

TEST(CorpusIo, WriteReadRoundTrip) {
  const auto dir = std::filesystem::temp_directory_path() / "sore_corpus_io_test";
  std::filesystem::remove_all(dir);
  const auto docs = generate_synthetic_corpus(3, 2);
  write_corpus(dir, docs);
  const auto back = read_corpus(dir);
  ASSERT_EQ(back.size(), 3u);
  const auto labeled = to_labeled(docs);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(back[i].id, labeled[i].id);
    EXPECT_EQ(back[i].html, docs[i].html);
    EXPECT_EQ(back[i].truth, docs[i].truth);
  }
  EXPECT_EQ(labeled[1].id, "0001");

  const auto preds = dir / "pred";
  std::filesystem::create_directories(preds);
  write_file(preds / "0000.txt", docs[0].truth);
  const auto pairs = read_prediction_pairs(preds, dir);
  ASSERT_EQ(pairs.size(), 3u);
  EXPECT_EQ(pairs[0].first, docs[0].truth);
  EXPECT_EQ(pairs[1].first, "");
  std::filesystem::remove_all(dir);
  EXPECT_THROW(read_file(dir / "missing"), Error);
}
