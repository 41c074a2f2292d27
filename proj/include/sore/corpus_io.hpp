#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "sore/evalkit.hpp"
#include "sore/synthetic_corpus.hpp"

namespace sore {

// Whole-file reads and writes; failures throw InvalidArgument naming the path.
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

// Corpus layout: NNNN.html next to NNNN.truth.txt.
void write_corpus(const std::filesystem::path& dir, const std::vector<SyntheticDocument>& docs);

// Every *.html with a sibling .truth.txt, ordered by id.
std::vector<LabeledDocument> read_corpus(const std::filesystem::path& dir);

// Pairs prediction NNNN.txt from `predictions` with NNNN.truth.txt from
// `truths`, ordered by id. A missing prediction counts as empty output.
std::vector<TextPair> read_prediction_pairs(const std::filesystem::path& predictions,
                                            const std::filesystem::path& truths);

}  // namespace sore
