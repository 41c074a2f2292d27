#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sore/embedder.hpp"

namespace sore {

enum class PointKind : std::uint8_t { OutlierPhrase = 0, CoreSegment = 1, Metadata = 2 };

// `group_name` is present iff kind == OutlierPhrase. `ref_id` is the phrase
// index (outliers) or segment id (core segments).
struct PointLabel {
  PointKind kind = PointKind::CoreSegment;
  std::optional<std::string> group_name;
  std::uint64_t ref_id = 0;

  static PointLabel outlier(std::string group, std::uint64_t phrase_index) {
    return {PointKind::OutlierPhrase, std::move(group), phrase_index};
  }
  static PointLabel core(std::uint64_t segment_id) { return {PointKind::CoreSegment, std::nullopt, segment_id}; }
  static PointLabel metadata() { return {PointKind::Metadata, std::nullopt, 0}; }

  bool operator==(const PointLabel&) const = default;
};

struct IndexedPoint {
  EmbeddingVector vector;
  PointLabel label;
};

struct AnnParams {
  std::size_t M = 16;
  std::size_t ef_construction = 200;
  std::uint64_t seed = 0;
};

struct SearchHit {
  PointLabel label;
  float distance = 0.0f;
  std::uint32_t node = 0;  // insertion order; breaks distance ties
};

// Hierarchical navigable small-world graph over unit vectors with
// inner-product distance. Values are immutable once built: `add_points`
// returns a new index and leaves the receiver untouched, so a built index can
// be shared across threads for concurrent `search`.
class AnnIndex {
 public:
  static constexpr std::uint32_t kNoNode = 0xFFFFFFFFu;

  static AnnIndex build(std::span<const IndexedPoint> points, const AnnParams& params = {});

  AnnIndex add_points(std::span<const IndexedPoint> points) const;

  // Up to k hits, ascending by (distance, node). Requires k >= 1 and ef_search >= k.
  std::vector<SearchHit> search(const EmbeddingVector& query, std::size_t k,
                                std::size_t ef_search = 64) const;

  // Layout: "SOREANN1", little-endian header (dim, M, ef_construction, seed,
  // count, entry point, max level), one record per node (label, level, vector,
  // per-layer adjacency), then a CRC32 of everything before it.
  std::vector<std::uint8_t> serialize() const;
  static AnnIndex deserialize(std::span<const std::uint8_t> bytes);

  std::size_t size() const { return labels_.size(); }
  std::size_t dim() const { return dim_; }
  const AnnParams& params() const { return params_; }
  std::uint32_t entry_point() const { return entry_point_; }
  int max_level() const { return max_level_; }
  int level(std::uint32_t node) const { return static_cast<int>(links_[node].size()) - 1; }
  const std::vector<std::uint32_t>& neighbors(std::uint32_t node, int layer) const {
    return links_[node][static_cast<std::size_t>(layer)];
  }
  const PointLabel& label(std::uint32_t node) const { return labels_[node]; }
  std::span<const float> vector_data(std::uint32_t node) const {
    return {data_.data() + static_cast<std::size_t>(node) * dim_, dim_};
  }
  std::vector<IndexedPoint> points() const;

 private:
  using Candidate = std::pair<float, std::uint32_t>;

  AnnIndex(std::size_t dim, const AnnParams& params) : dim_(dim), params_(params) {}

  void insert(const IndexedPoint& point);
  int draw_level(std::uint32_t node) const;
  float distance(std::span<const float> query, std::uint32_t node) const;
  float distance(std::uint32_t a, std::uint32_t b) const;
  std::vector<Candidate> search_layer(std::span<const float> query,
                                      const std::vector<Candidate>& entry, std::size_t ef,
                                      int layer) const;
  std::vector<std::uint32_t> select_neighbors(const std::vector<Candidate>& candidates,
                                              std::size_t max_count) const;
  std::size_t max_links(int layer) const { return layer == 0 ? 2 * params_.M : params_.M; }

  std::size_t dim_ = 0;
  AnnParams params_;
  std::vector<float> data_;
  std::vector<PointLabel> labels_;
  std::vector<std::vector<std::vector<std::uint32_t>>> links_;  // [node][layer] -> neighbors
  std::uint32_t entry_point_ = kNoNode;
  int max_level_ = -1;
};

// Brute-force top-k with the same ordering contract as AnnIndex::search.
std::vector<SearchHit> exact_search(std::span<const IndexedPoint> points,
                                    const EmbeddingVector& query, std::size_t k);

}  // namespace sore
