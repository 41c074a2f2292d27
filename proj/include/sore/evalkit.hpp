#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sore/core.hpp"

namespace sore {

struct EvalScores {
  double precision = 0.0;
  double recall = 0.0;
  double f_score = 0.0;
};

// 2PR / (P + R), or 0 when both are 0.
double harmonic_f(double precision, double recall);

struct OverlapCounts {
  std::size_t intersection = 0;
  std::size_t extracted = 0;
  std::size_t truth = 0;
};

// Token multisets after NFKC + lowercase + Unicode whitespace split.
OverlapCounts overlap_counts(const std::string& extracted, const std::string& truth);

// Both empty scores (1, 1, 1); exactly one empty scores (0, 0, 0).
EvalScores scores_from_counts(const OverlapCounts& counts);

EvalScores overlap_scores(const std::string& extracted, const std::string& truth);

enum class Aggregation { Macro, Micro };

struct CorpusScores {
  EvalScores macro;          // mean P, mean R, F of those means
  double macro_mean_f = 0.0; // mean of per-document F
  EvalScores micro;          // pooled token counts
  std::size_t n_docs = 0;
};

using TextPair = std::pair<std::string, std::string>;  // (extracted, truth)

// Throws InvalidArgument on an empty corpus.
CorpusScores corpus_scores(std::span<const TextPair> pairs);
EvalScores corpus_eval(std::span<const TextPair> pairs, Aggregation aggregation);

// Pooled counts of already-counted documents.
EvalScores micro_from_counts(std::span<const OverlapCounts> counts);

struct KeywordAccuracyRow {
  std::string phrase;
  std::size_t occurrence = 0;
  std::optional<double> accuracy;  // null when occurrence == 0
};

struct DocumentDecisions {
  std::vector<std::string> segment_texts;  // indexed by segment id
  std::vector<RemovalDecision> decisions;
  std::string truth;
};

// A removal is judged correct when fewer than half of the removed segment's
// tokens also occur in the truth document (multiset overlap).
bool removal_is_correct(const std::string& segment_text, const std::string& truth);

// One row per distinct phrase of `groups`, ascending by accuracy; rows
// without occurrences go last. Ties keep phrase-table order.
std::vector<KeywordAccuracyRow> keyword_accuracy(std::span<const DocumentDecisions> documents,
                                                 const std::vector<OutlierGroup>& groups);

std::string keyword_accuracy_table(std::span<const KeywordAccuracyRow> rows);

struct LabeledDocument {
  std::string id;
  std::string html;
  std::string truth;
};

struct SweepPoint {
  double k = 0.0;
  double d = 0.0;
  EvalScores scores;  // macro, F of mean P and R
  double macro_mean_f = 0.0;
  EvalScores micro;
  double mean_removed_fraction = 0.0;
  std::size_t skipped = 0;
};

struct SweepOptions {
  std::size_t threads = 0;  // 0 = hardware concurrency
};

// Embeds each document once and re-decides it at every (k, d); documents
// whose pipeline run fails are skipped and counted. Points come out k-major
// in grid order.
std::vector<SweepPoint> sweep(const Pipeline& pipeline, std::span<const LabeledDocument> corpus,
                              std::span<const double> k_grid, std::span<const double> d_grid,
                              const SweepOptions& options = {});

// Header `k,d,precision,recall,f,mean_removed_fraction,skipped`.
std::string sweep_csv(std::span<const SweepPoint> points);

// Cleans every document with `knobs`; a failed document yields nullopt.
std::vector<std::optional<CleanResult>> clean_corpus(const Pipeline& pipeline,
                                                     std::span<const LabeledDocument> corpus,
                                                     const CleanConfig& knobs,
                                                     const SweepOptions& options = {});

// Keep-everything reference: all extracted segments, nothing removed.
CorpusScores keep_everything_scores(std::span<const LabeledDocument> corpus,
                                    const SegmenterOptions& options = {});

}  // namespace sore
