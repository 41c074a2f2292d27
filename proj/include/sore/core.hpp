#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sore/ann.hpp"
#include "sore/embedder.hpp"
#include "sore/outlier_groups.hpp"
#include "sore/segmenter.hpp"

namespace sore {

struct CleanConfig {
  double core_fraction_k = 0.2;
  double distance_cutoff_d = 0.8;
  double outlier_match_cutoff = 0.25;
  double max_removal_fraction = 0.8;
  bool include_metadata_in_core_anchors = true;

  EmbedderConfig embedder;
  AnnParams ann;
  std::size_t ef_search = 64;
  SegmenterOptions segmenter;

  // Throws InvalidArgument when a field is out of range.
  void validate() const;
};

enum class Verdict { KeptCore, Kept, RemovedOutlier, RemovedIrrelevant, KeptByFallback };

std::string_view verdict_name(Verdict verdict);
bool is_removed(Verdict verdict);

inline constexpr std::string_view kTooIrrelevant = "too irrelevant";

struct RemovalDecision {
  std::size_t segment_id = 0;
  Verdict verdict = Verdict::Kept;
  // Outlier group name or "too irrelevant"; kept for KeptByFallback too.
  std::optional<std::string> reason;
  float d_core = 0.0f;
  float d_outlier = 0.0f;
  std::optional<std::string> nearest_phrase;
};

struct CleanStats {
  std::size_t n_segments = 0;
  std::size_t n_removed = 0;             // net of fallback
  double removed_char_fraction = 0.0;    // net of fallback
  double attempted_removal_fraction = 0.0;
  std::size_t n_truncated = 0;
  double elapsed_ms = 0.0;
};

struct CleanResult {
  DocumentMetadata metadata;
  std::vector<Segment> segments;
  std::vector<Segment> kept_segments;
  std::vector<RemovalDecision> decisions;  // one per segment, in id order
  bool fallback_applied = false;
  CleanStats stats;
};

// max(1, ceil(k * n)).
std::size_t core_size(std::size_t n, double k);

// Ids of the core_size(N, k) segments nearest to the metadata vector,
// ascending; distance ties go to the smaller id.
std::vector<std::size_t> select_core(std::span<const EmbeddingVector> segment_vectors,
                                     const EmbeddingVector& metadata_vector, double k);

struct AnchorDistances {
  float d_core = 0.0f;
  float d_outlier = 0.0f;
  std::optional<std::uint64_t> nearest_phrase;  // index into the flattened phrase table
};

// Nearest core anchor and nearest outlier phrase in an augmented index.
AnchorDistances measure_anchors(const AnnIndex& anchors, const EmbeddingVector& vector,
                                std::size_t ef_search);

struct Classification {
  Verdict verdict = Verdict::Kept;
  std::optional<std::string> reason;
};

// Rules, in order: outlier match (nearer an outlier phrase than any core
// anchor and within outlier_match_cutoff), then irrelevance (d_core above
// distance_cutoff_d), else kept.
Classification classify(const AnchorDistances& distances, std::string_view nearest_group,
                        const CleanConfig& config);

RemovalDecision classify_segment(std::size_t segment_id, const EmbeddingVector& vector,
                                 const AnnIndex& anchors, std::span<const PhraseEntry> phrases,
                                 const CleanConfig& config);

AnnIndex build_outlier_index(const std::vector<OutlierGroup>& groups,
                             const EmbeddingProvider& provider, const AnnParams& params,
                             std::size_t batch_size = 96);

struct EmbeddedDocument {
  ParsedDocument parsed;
  std::vector<EmbeddingVector> segment_vectors;
  EmbeddingVector metadata_vector;
  bool metadata_from_centroid = false;
  std::size_t n_truncated = 0;
};

struct MeasuredDocument {
  std::vector<std::size_t> core_ids;
  std::vector<bool> is_core;
  std::vector<AnchorDistances> distances;  // per segment
};

// Holds the shared, read-only state for cleaning: config, outlier lexicon,
// the prebuilt outlier index and the embedding provider. All methods are
// const and safe to call concurrently.
class Pipeline {
 public:
  Pipeline(CleanConfig config, std::vector<OutlierGroup> groups,
           std::shared_ptr<const EmbeddingProvider> provider);
  Pipeline(CleanConfig config, std::vector<OutlierGroup> groups,
           std::shared_ptr<const EmbeddingProvider> provider, AnnIndex prebuilt_outlier_index);

  const CleanConfig& config() const { return config_; }
  const std::vector<OutlierGroup>& groups() const { return groups_; }
  const std::vector<PhraseEntry>& phrases() const { return phrases_; }
  const AnnIndex& outlier_index() const { return outlier_index_; }
  const EmbeddingProvider& provider() const { return *provider_; }

  // Parse plus one embedding pass over metadata and all segments.
  EmbeddedDocument embed(std::string_view html) const;

  // Core selection and anchor distances. Reads core_fraction_k and
  // include_metadata_in_core_anchors from `knobs`; the cutoffs are not used.
  MeasuredDocument measure(const EmbeddedDocument& doc, const CleanConfig& knobs) const;

  // Verdicts, removal and fallback for the cutoffs in `knobs`.
  CleanResult decide(const EmbeddedDocument& doc, const MeasuredDocument& measured,
                     const CleanConfig& knobs) const;

  CleanResult clean(std::string_view html) const;
  // Uses the classification knobs of `knobs`; embedding and index settings
  // always come from the pipeline's own config.
  CleanResult clean(std::string_view html, const CleanConfig& knobs) const;

 private:
  void check_index() const;

  CleanConfig config_;
  std::vector<OutlierGroup> groups_;
  std::vector<PhraseEntry> phrases_;
  std::shared_ptr<const EmbeddingProvider> provider_;
  AnnIndex outlier_index_;
};

CleanResult clean_document(std::string_view html, const CleanConfig& config,
                           const AnnIndex& prebuilt_outlier_index,
                           const std::vector<OutlierGroup>& groups,
                           const EmbeddingProvider& provider);

}  // namespace sore
