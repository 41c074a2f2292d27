#include "sore/core.hpp"

#include "sore/errors.hpp"
#include "sore/text.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

namespace sore {

namespace {

[[noreturn]] void invalid(const std::string& what) { throw Error(ErrorKind::InvalidArgument, what); }

constexpr float kMaxDistance = 2.0f;

}  // namespace

void CleanConfig::validate() const {
  if (!(core_fraction_k > 0.0 && core_fraction_k <= 1.0)) invalid("core_fraction_k must be in (0, 1]");
  if (!(distance_cutoff_d >= 0.0)) invalid("distance_cutoff_d must be >= 0");
  if (!(outlier_match_cutoff >= 0.0)) invalid("outlier_match_cutoff must be >= 0");
  if (!(max_removal_fraction > 0.0 && max_removal_fraction <= 1.0)) {
    invalid("max_removal_fraction must be in (0, 1]");
  }
  if (ef_search < 1) invalid("ef_search must be >= 1");
  if (ann.M < 2) invalid("M must be >= 2");
  if (ann.ef_construction < 1) invalid("ef_construction must be >= 1");
  if (segmenter.min_segment_chars < 1) invalid("min_segment_chars must be >= 1");
  embedder.validate();
}

std::string_view verdict_name(Verdict verdict) {
  switch (verdict) {
    case Verdict::KeptCore: return "kept_core";
    case Verdict::Kept: return "kept";
    case Verdict::RemovedOutlier: return "removed_outlier";
    case Verdict::RemovedIrrelevant: return "removed_irrelevant";
    case Verdict::KeptByFallback: return "kept_by_fallback";
  }
  return "kept";
}

bool is_removed(Verdict verdict) {
  return verdict == Verdict::RemovedOutlier || verdict == Verdict::RemovedIrrelevant;
}

std::size_t core_size(std::size_t n, double k) {
  if (n == 0) return 0;
  // The epsilon keeps k*n that is integral in exact arithmetic (0.2 * 10)
  // from rounding up to the next integer.
  const double raw = std::ceil(k * static_cast<double>(n) - 1e-9);
  const auto size = raw < 1.0 ? std::size_t{1} : static_cast<std::size_t>(raw);
  return std::min(size, n);
}

std::vector<std::size_t> select_core(std::span<const EmbeddingVector> segment_vectors,
                                     const EmbeddingVector& metadata_vector, double k) {
  if (segment_vectors.empty()) invalid("select_core needs at least one segment");
  if (!(k > 0.0 && k <= 1.0)) invalid("core_fraction_k must be in (0, 1]");
  std::vector<std::pair<float, std::size_t>> ranked;
  ranked.reserve(segment_vectors.size());
  for (std::size_t i = 0; i < segment_vectors.size(); ++i) {
    ranked.emplace_back(ip_distance(segment_vectors[i], metadata_vector), i);
  }
  const std::size_t n = core_size(segment_vectors.size(), k);
  std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(n), ranked.end());
  std::vector<std::size_t> ids;
  ids.reserve(n);
  for (std::size_t i = 0; i < n; ++i) ids.push_back(ranked[i].second);
  std::sort(ids.begin(), ids.end());
  return ids;
}

AnchorDistances measure_anchors(const AnnIndex& anchors, const EmbeddingVector& vector,
                                std::size_t ef_search) {
  AnchorDistances out{kMaxDistance, kMaxDistance, std::nullopt};
  bool have_core = false;
  bool have_outlier = false;
  auto absorb = [&](PointKind kind, float dist, std::uint64_t ref) {
    if (kind == PointKind::OutlierPhrase) {
      if (!have_outlier) {
        have_outlier = true;
        out.d_outlier = dist;
        out.nearest_phrase = ref;
      }
    } else if (!have_core) {
      have_core = true;
      out.d_core = dist;
    }
  };

  const std::size_t ef = std::max<std::size_t>(ef_search, 1);
  for (const auto& hit : anchors.search(vector, ef, ef)) absorb(hit.label.kind, hit.distance, hit.label.ref_id);
  if (have_core && have_outlier) return out;

  // One population fell outside the beam; widen to the whole index.
  if (anchors.size() > ef) {
    have_core = have_outlier = false;
    for (const auto& hit : anchors.search(vector, anchors.size(), anchors.size())) {
      absorb(hit.label.kind, hit.distance, hit.label.ref_id);
    }
    if (have_core && have_outlier) return out;
  }

  // Graph search can still miss nodes; an exact scan is the final word.
  have_core = have_outlier = false;
  std::vector<std::pair<float, std::uint32_t>> all;
  all.reserve(anchors.size());
  for (std::uint32_t i = 0; i < anchors.size(); ++i) {
    all.emplace_back(ip_distance(vector.values(), anchors.vector_data(i)), i);
  }
  std::sort(all.begin(), all.end());
  for (const auto& [dist, node] : all) absorb(anchors.label(node).kind, dist, anchors.label(node).ref_id);
  return out;
}

Classification classify(const AnchorDistances& distances, std::string_view nearest_group,
                        const CleanConfig& config) {
  if (distances.nearest_phrase && distances.d_outlier < distances.d_core &&
      distances.d_outlier <= config.outlier_match_cutoff) {
    return {Verdict::RemovedOutlier, std::string(nearest_group)};
  }
  if (distances.d_core > config.distance_cutoff_d) {
    return {Verdict::RemovedIrrelevant, std::string(kTooIrrelevant)};
  }
  return {Verdict::Kept, std::nullopt};
}

namespace {

RemovalDecision make_decision(std::size_t segment_id, const AnchorDistances& distances,
                              std::span<const PhraseEntry> phrases, const CleanConfig& config) {
  const PhraseEntry* phrase = nullptr;
  if (distances.nearest_phrase) {
    if (*distances.nearest_phrase >= phrases.size()) {
      invalid("outlier label refers to phrase " + std::to_string(*distances.nearest_phrase) +
              " beyond the phrase table");
    }
    phrase = &phrases[*distances.nearest_phrase];
  }
  const auto c = classify(distances, phrase ? std::string_view(phrase->group) : std::string_view{}, config);
  RemovalDecision d;
  d.segment_id = segment_id;
  d.verdict = c.verdict;
  d.reason = c.reason;
  d.d_core = distances.d_core;
  d.d_outlier = distances.d_outlier;
  if (phrase) d.nearest_phrase = phrase->phrase;
  return d;
}

}  // namespace

RemovalDecision classify_segment(std::size_t segment_id, const EmbeddingVector& vector,
                                 const AnnIndex& anchors, std::span<const PhraseEntry> phrases,
                                 const CleanConfig& config) {
  return make_decision(segment_id, measure_anchors(anchors, vector, config.ef_search), phrases, config);
}

AnnIndex build_outlier_index(const std::vector<OutlierGroup>& groups,
                             const EmbeddingProvider& provider, const AnnParams& params,
                             std::size_t batch_size) {
  const auto phrases = flatten_phrases(groups);
  if (phrases.empty()) invalid("no outlier phrases to index");
  std::vector<std::string> texts;
  texts.reserve(phrases.size());
  for (const auto& p : phrases) texts.push_back(p.phrase);
  auto vectors = embed_texts(texts, provider, batch_size);
  std::vector<IndexedPoint> points;
  points.reserve(phrases.size());
  for (std::size_t i = 0; i < phrases.size(); ++i) {
    points.push_back({std::move(vectors[i]), PointLabel::outlier(phrases[i].group, i)});
  }
  return AnnIndex::build(points, params);
}

namespace {

AnnIndex checked_build(const CleanConfig& config, const std::vector<OutlierGroup>& groups,
                       const std::shared_ptr<const EmbeddingProvider>& provider) {
  if (!provider) invalid("pipeline needs an embedding provider");
  config.validate();
  return build_outlier_index(groups, *provider, config.ann, config.embedder.batch_size);
}

}  // namespace

Pipeline::Pipeline(CleanConfig config, std::vector<OutlierGroup> groups,
                   std::shared_ptr<const EmbeddingProvider> provider)
    : config_(std::move(config)),
      groups_(std::move(groups)),
      phrases_(flatten_phrases(groups_)),
      provider_(std::move(provider)),
      outlier_index_(checked_build(config_, groups_, provider_)) {}

Pipeline::Pipeline(CleanConfig config, std::vector<OutlierGroup> groups,
                   std::shared_ptr<const EmbeddingProvider> provider, AnnIndex prebuilt_outlier_index)
    : config_(std::move(config)),
      groups_(std::move(groups)),
      phrases_(flatten_phrases(groups_)),
      provider_(std::move(provider)),
      outlier_index_(std::move(prebuilt_outlier_index)) {
  if (!provider_) invalid("pipeline needs an embedding provider");
  config_.validate();
  check_index();
}

void Pipeline::check_index() const {
  if (outlier_index_.dim() != provider_->dim()) {
    throw Error(ErrorKind::DimensionMismatch,
                "outlier index dim " + std::to_string(outlier_index_.dim()) +
                    " does not match embedder dim " + std::to_string(provider_->dim()));
  }
  if (outlier_index_.size() != phrases_.size()) {
    invalid("outlier index holds " + std::to_string(outlier_index_.size()) +
            " points but the groups define " + std::to_string(phrases_.size()) + " phrases");
  }
  for (std::uint32_t i = 0; i < outlier_index_.size(); ++i) {
    const auto& label = outlier_index_.label(i);
    if (label.kind != PointKind::OutlierPhrase || label.ref_id >= phrases_.size() ||
        label.group_name != phrases_[label.ref_id].group) {
      invalid("outlier index point " + std::to_string(i) + " does not match the outlier groups");
    }
  }
}

EmbeddedDocument Pipeline::embed(std::string_view html) const {
  EmbeddedDocument doc;
  doc.parsed = parse_document(html, config_.segmenter);
  const auto& segments = doc.parsed.segments;

  // Metadata shorter than an n-gram cannot be embedded; treat it as absent.
  const std::string& meta = doc.parsed.metadata.combined_text;
  const bool has_meta = text::codepoint_count(meta) >= 3;

  std::vector<std::string> texts;
  texts.reserve(segments.size() + 1);
  if (has_meta) texts.push_back(meta);
  for (const auto& s : segments) texts.push_back(s.text);
  for (const auto& t : texts) {
    if (text::codepoint_count(t) > config_.embedder.max_text_chars) ++doc.n_truncated;
  }

  auto vectors = embed_texts(texts, *provider_, config_.embedder.batch_size,
                             config_.embedder.max_text_chars);
  std::size_t offset = 0;
  if (has_meta) {
    doc.metadata_vector = std::move(vectors[0]);
    offset = 1;
  }
  doc.segment_vectors.assign(std::make_move_iterator(vectors.begin() + static_cast<std::ptrdiff_t>(offset)),
                             std::make_move_iterator(vectors.end()));

  if (!has_meta) {
    doc.metadata_from_centroid = true;
    const std::size_t dim = provider_->dim();
    std::vector<double> sum(dim, 0.0);
    for (const auto& v : doc.segment_vectors) {
      for (std::size_t i = 0; i < dim; ++i) sum[i] += v[i];
    }
    const double norm = std::sqrt(std::inner_product(sum.begin(), sum.end(), sum.begin(), 0.0));
    // Segment vectors that cancel out leave no direction; anchor on the first.
    doc.metadata_vector = norm > 1e-12 ? EmbeddingVector::normalized(std::span<const double>(sum))
                                       : doc.segment_vectors.front();
  }
  return doc;
}

MeasuredDocument Pipeline::measure(const EmbeddedDocument& doc, const CleanConfig& knobs) const {
  MeasuredDocument m;
  const auto& vectors = doc.segment_vectors;
  m.core_ids = select_core(vectors, doc.metadata_vector, knobs.core_fraction_k);
  m.is_core.assign(vectors.size(), false);

  std::vector<IndexedPoint> anchors;
  anchors.reserve(m.core_ids.size() + 1);
  for (auto id : m.core_ids) {
    m.is_core[id] = true;
    anchors.push_back({vectors[id], PointLabel::core(id)});
  }
  if (knobs.include_metadata_in_core_anchors) {
    anchors.push_back({doc.metadata_vector, PointLabel::metadata()});
  }
  const AnnIndex augmented = outlier_index_.add_points(anchors);

  m.distances.reserve(vectors.size());
  for (const auto& v : vectors) m.distances.push_back(measure_anchors(augmented, v, config_.ef_search));
  return m;
}

CleanResult Pipeline::decide(const EmbeddedDocument& doc, const MeasuredDocument& measured,
                             const CleanConfig& knobs) const {
  const auto& segments = doc.parsed.segments;
  CleanResult r;
  r.metadata = doc.parsed.metadata;
  r.segments = segments;
  r.decisions.reserve(segments.size());

  std::size_t total_chars = 0;
  std::size_t removed_chars = 0;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    auto d = make_decision(i, measured.distances[i], phrases_, knobs);
    if (measured.is_core[i]) {
      d.verdict = Verdict::KeptCore;
      d.reason.reset();
    }
    const std::size_t chars = text::codepoint_count(segments[i].text);
    total_chars += chars;
    if (is_removed(d.verdict)) removed_chars += chars;
    r.decisions.push_back(std::move(d));
  }

  const double attempted = total_chars == 0 ? 0.0 : static_cast<double>(removed_chars) / total_chars;
  r.stats.n_segments = segments.size();
  r.stats.attempted_removal_fraction = attempted;
  r.stats.n_truncated = doc.n_truncated;

  if (attempted > knobs.max_removal_fraction) {
    r.fallback_applied = true;
    for (auto& d : r.decisions) {
      if (is_removed(d.verdict)) d.verdict = Verdict::KeptByFallback;
    }
  }
  for (std::size_t i = 0; i < segments.size(); ++i) {
    if (is_removed(r.decisions[i].verdict)) {
      ++r.stats.n_removed;
    } else {
      r.kept_segments.push_back(segments[i]);
    }
  }
  r.stats.removed_char_fraction = r.fallback_applied ? 0.0 : attempted;
  return r;
}

CleanResult Pipeline::clean(std::string_view html) const { return clean(html, config_); }

CleanResult Pipeline::clean(std::string_view html, const CleanConfig& knobs) const {
  knobs.validate();
  const auto start = std::chrono::steady_clock::now();
  const auto doc = embed(html);
  const auto measured = measure(doc, knobs);
  auto result = decide(doc, measured, knobs);
  result.stats.elapsed_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return result;
}

CleanResult clean_document(std::string_view html, const CleanConfig& config,
                           const AnnIndex& prebuilt_outlier_index,
                           const std::vector<OutlierGroup>& groups,
                           const EmbeddingProvider& provider) {
  // Borrow the caller's provider for the duration of the call.
  std::shared_ptr<const EmbeddingProvider> borrowed(&provider, [](const EmbeddingProvider*) {});
  const Pipeline pipeline(config, groups, std::move(borrowed), prebuilt_outlier_index);
  return pipeline.clean(html);
}

}  // namespace sore
