#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "sore/evalkit.hpp"
#include "sore/outlier_groups.hpp"

namespace sore {

struct BoilerplateItem {
  std::string text;    // as written into the page
  std::string phrase;  // source outlier phrase
  std::string group;
};

struct SyntheticDocument {
  std::string html;
  std::string truth;  // title and body paragraphs, one per line
  std::string title;
  std::vector<BoilerplateItem> boilerplate;
  bool home_in_body = false;
};

struct SyntheticCorpusOptions {
  // Probability that a document also carries an in-article "Home" heading
  // (part of the truth) next to a navigation "Home" link.
  double home_ambiguity_rate = 0.0;
};

// Deterministic per (n_docs, seed, options): the RNG is a fixed-algorithm
// Mersenne Twister and all draws are done by hand, so output does not depend
// on the standard library's distribution implementations.
std::vector<SyntheticDocument> generate_synthetic_corpus(std::size_t n_docs, std::uint64_t seed,
                                                         const SyntheticCorpusOptions& options = {});

std::vector<LabeledDocument> to_labeled(const std::vector<SyntheticDocument>& docs);

}  // namespace sore
