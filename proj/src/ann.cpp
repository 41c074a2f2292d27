#include "sore/ann.hpp"

#include "sore/errors.hpp"

#include <zlib.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <queue>

namespace sore {

namespace {

constexpr char kMagic[8] = {'S', 'O', 'R', 'E', 'A', 'N', 'N', '1'};
constexpr int kMaxLevel = 31;

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

void check_dim(std::size_t expected, std::size_t actual) {
  if (expected != actual) {
    throw Error(ErrorKind::DimensionMismatch, "index dim " + std::to_string(expected) +
                                                  " does not match vector dim " +
                                                  std::to_string(actual));
  }
}

class ByteWriter {
 public:
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    out_.insert(out_.end(), b, b + n);
  }
  std::vector<std::uint8_t>& buffer() { return out_; }

 private:
  std::vector<std::uint8_t> out_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> in) : in_(in) {}

  std::uint8_t u8() { return take(1)[0]; }
  std::uint32_t u32() {
    auto b = take(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    auto b = take(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
  }
  float f32() { return std::bit_cast<float>(u32()); }
  std::span<const std::uint8_t> take(std::size_t n) {
    if (n > remaining()) throw Error(ErrorKind::CorruptIndex, "index truncated");
    auto s = in_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  std::size_t remaining() const { return in_.size() - pos_; }

 private:
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

[[noreturn]] void corrupt(const std::string& what) { throw Error(ErrorKind::CorruptIndex, what); }

std::uint32_t crc32_of(std::span<const std::uint8_t> bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed in chunks.
  std::size_t pos = 0;
  while (pos < bytes.size()) {
    const std::size_t n = std::min<std::size_t>(bytes.size() - pos, 1u << 30);
    crc = crc32(crc, bytes.data() + pos, static_cast<uInt>(n));
    pos += n;
  }
  return static_cast<std::uint32_t>(crc);
}

}  // namespace

float AnnIndex::distance(std::span<const float> query, std::uint32_t node) const {
  return ip_distance(query, vector_data(node));
}

float AnnIndex::distance(std::uint32_t a, std::uint32_t b) const {
  return ip_distance(vector_data(a), vector_data(b));
}

int AnnIndex::draw_level(std::uint32_t node) const {
  const std::uint64_t r = mix64(params_.seed ^ mix64(node));
  const double u = static_cast<double>(r >> 11) * 0x1.0p-53;  // [0, 1)
  const double ml = 1.0 / std::log(static_cast<double>(params_.M));
  const double level = std::floor(-std::log(1.0 - u) * ml);
  return static_cast<int>(std::min<double>(level, kMaxLevel));
}

std::vector<AnnIndex::Candidate> AnnIndex::search_layer(std::span<const float> query,
                                                        const std::vector<Candidate>& entry,
                                                        std::size_t ef, int layer) const {
  std::vector<bool> visited(size(), false);
  std::priority_queue<Candidate, std::vector<Candidate>, std::greater<>> frontier;
  std::priority_queue<Candidate> best;  // max-heap: worst result on top

  for (const auto& c : entry) {
    if (visited[c.second]) continue;
    visited[c.second] = true;
    frontier.push(c);
    best.push(c);
    if (best.size() > ef) best.pop();
  }

  while (!frontier.empty()) {
    const Candidate current = frontier.top();
    if (best.size() >= ef && current > best.top()) break;
    frontier.pop();
    for (std::uint32_t n : links_[current.second][static_cast<std::size_t>(layer)]) {
      if (visited[n]) continue;
      visited[n] = true;
      Candidate c{distance(query, n), n};
      if (best.size() < ef || c < best.top()) {
        frontier.push(c);
        best.push(c);
        if (best.size() > ef) best.pop();
      }
    }
  }

  std::vector<Candidate> out;
  out.reserve(best.size());
  while (!best.empty()) {
    out.push_back(best.top());
    best.pop();
  }
  std::reverse(out.begin(), out.end());
  return out;
}

// Diversity heuristic: keep a candidate only if it is closer to the base
// point than to every neighbor already selected.
std::vector<std::uint32_t> AnnIndex::select_neighbors(const std::vector<Candidate>& candidates,
                                                      std::size_t max_count) const {
  std::vector<std::uint32_t> selected;
  selected.reserve(max_count);
  for (const auto& [d, node] : candidates) {
    if (selected.size() >= max_count) break;
    bool keep = true;
    for (std::uint32_t s : selected) {
      if (distance(node, s) < d) {
        keep = false;
        break;
      }
    }
    if (keep) selected.push_back(node);
  }
  return selected;
}

void AnnIndex::insert(const IndexedPoint& point) {
  check_dim(dim_, point.vector.dim());
  const auto node = static_cast<std::uint32_t>(labels_.size());
  const auto values = point.vector.values();
  data_.insert(data_.end(), values.begin(), values.end());
  labels_.push_back(point.label);

  const int level = draw_level(node);
  links_.emplace_back(static_cast<std::size_t>(level) + 1);

  if (entry_point_ == kNoNode) {
    entry_point_ = node;
    max_level_ = level;
    return;
  }

  const std::span<const float> query = vector_data(node);
  std::vector<Candidate> current{{distance(query, entry_point_), entry_point_}};
  for (int l = max_level_; l > level; --l) {
    current = search_layer(query, current, 1, l);
  }
  for (int l = std::min(level, max_level_); l >= 0; --l) {
    auto found = search_layer(query, current, params_.ef_construction, l);
    auto chosen = select_neighbors(found, params_.M);
    const auto layer = static_cast<std::size_t>(l);
    links_[node][layer] = chosen;
    for (std::uint32_t n : chosen) {
      auto& adjacency = links_[n][layer];
      adjacency.push_back(node);
      if (adjacency.size() > max_links(l)) {
        std::vector<Candidate> pool;
        pool.reserve(adjacency.size());
        for (std::uint32_t m : adjacency) pool.emplace_back(distance(n, m), m);
        std::sort(pool.begin(), pool.end());
        adjacency = select_neighbors(pool, max_links(l));
      }
    }
    current = std::move(found);
  }

  if (level > max_level_) {
    entry_point_ = node;
    max_level_ = level;
  }
}

AnnIndex AnnIndex::build(std::span<const IndexedPoint> points, const AnnParams& params) {
  if (points.empty()) throw Error(ErrorKind::InvalidArgument, "cannot build an index from zero points");
  if (params.M < 2) throw Error(ErrorKind::InvalidArgument, "M must be >= 2");
  if (params.ef_construction < 1) throw Error(ErrorKind::InvalidArgument, "ef_construction must be >= 1");
  const std::size_t dim = points.front().vector.dim();
  if (dim == 0) throw Error(ErrorKind::InvalidArgument, "zero-dimensional vectors");
  for (const auto& p : points) check_dim(dim, p.vector.dim());

  AnnIndex index(dim, params);
  index.data_.reserve(points.size() * dim);
  index.labels_.reserve(points.size());
  index.links_.reserve(points.size());
  for (const auto& p : points) index.insert(p);
  return index;
}

AnnIndex AnnIndex::add_points(std::span<const IndexedPoint> points) const {
  for (const auto& p : points) check_dim(dim_, p.vector.dim());
  AnnIndex copy = *this;
  for (const auto& p : points) copy.insert(p);
  return copy;
}

std::vector<SearchHit> AnnIndex::search(const EmbeddingVector& query, std::size_t k,
                                        std::size_t ef_search) const {
  check_dim(dim_, query.dim());
  if (k < 1) throw Error(ErrorKind::InvalidArgument, "k must be >= 1");
  if (ef_search < k) throw Error(ErrorKind::InvalidArgument, "ef_search must be >= k");
  if (entry_point_ == kNoNode) return {};

  const auto q = query.values();
  std::vector<Candidate> current{{distance(q, entry_point_), entry_point_}};
  for (int l = max_level_; l > 0; --l) current = search_layer(q, current, 1, l);
  auto found = search_layer(q, current, ef_search, 0);

  std::vector<SearchHit> hits;
  const std::size_t n = std::min(k, found.size());
  hits.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    hits.push_back({labels_[found[i].second], found[i].first, found[i].second});
  }
  return hits;
}

std::vector<IndexedPoint> AnnIndex::points() const {
  std::vector<IndexedPoint> out;
  out.reserve(size());
  for (std::uint32_t i = 0; i < size(); ++i) {
    auto v = vector_data(i);
    out.push_back({EmbeddingVector(std::vector<float>(v.begin(), v.end())), labels_[i]});
  }
  return out;
}

std::vector<std::uint8_t> AnnIndex::serialize() const {
  ByteWriter w;
  w.bytes(kMagic, sizeof(kMagic));
  w.u32(static_cast<std::uint32_t>(dim_));
  w.u32(static_cast<std::uint32_t>(params_.M));
  w.u32(static_cast<std::uint32_t>(params_.ef_construction));
  w.u64(params_.seed);
  w.u64(size());
  w.u32(entry_point_);
  w.u32(static_cast<std::uint32_t>(max_level_));

  for (std::uint32_t node = 0; node < size(); ++node) {
    const PointLabel& label = labels_[node];
    w.u8(static_cast<std::uint8_t>(label.kind));
    const std::string group = label.group_name.value_or("");
    w.u8(label.group_name.has_value() ? 1 : 0);
    w.u32(static_cast<std::uint32_t>(group.size()));
    w.bytes(group.data(), group.size());
    w.u64(label.ref_id);
    w.u32(static_cast<std::uint32_t>(level(node)));
    for (float v : vector_data(node)) w.f32(v);
    for (const auto& adjacency : links_[node]) {
      w.u32(static_cast<std::uint32_t>(adjacency.size()));
      for (std::uint32_t n : adjacency) w.u32(n);
    }
  }
  auto& out = w.buffer();
  const std::uint32_t crc = crc32_of(out);
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(crc >> (8 * i)));
  return std::move(out);
}

AnnIndex AnnIndex::deserialize(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < sizeof(kMagic) + 4) corrupt("index truncated");
  if (std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) corrupt("bad magic");
  const auto body = bytes.first(bytes.size() - 4);
  const auto tail = bytes.last(4);
  std::uint32_t stored_crc = 0;
  for (int i = 0; i < 4; ++i) stored_crc |= static_cast<std::uint32_t>(tail[i]) << (8 * i);
  if (crc32_of(body) != stored_crc) corrupt("checksum mismatch");

  ByteReader r(body);
  r.take(sizeof(kMagic));
  const std::uint32_t dim = r.u32();
  AnnParams params;
  params.M = r.u32();
  params.ef_construction = r.u32();
  params.seed = r.u64();
  const std::uint64_t count = r.u64();
  const std::uint32_t entry = r.u32();
  const auto max_level = static_cast<std::int32_t>(r.u32());

  if (dim == 0 || params.M < 2 || params.ef_construction < 1) corrupt("invalid header");
  if (count == 0 || count >= AnnIndex::kNoNode || entry >= count) corrupt("invalid node count");
  if (max_level < 0 || max_level > kMaxLevel) corrupt("invalid max level");
  // Each node needs at least its vector plus fixed-size fields.
  if (count > r.remaining() / (static_cast<std::uint64_t>(dim) * 4 + 22)) corrupt("index truncated");

  AnnIndex index(dim, params);
  index.data_.reserve(count * dim);
  index.labels_.reserve(count);
  index.links_.reserve(count);
  for (std::uint64_t node = 0; node < count; ++node) {
    PointLabel label;
    const std::uint8_t kind = r.u8();
    if (kind > 2) corrupt("invalid label kind");
    label.kind = static_cast<PointKind>(kind);
    const bool has_group = r.u8() != 0;
    const std::uint32_t group_len = r.u32();
    auto group = r.take(group_len);
    if (has_group) label.group_name = std::string(group.begin(), group.end());
    if (has_group != (label.kind == PointKind::OutlierPhrase)) corrupt("label invariant violated");
    label.ref_id = r.u64();

    const std::uint32_t level = r.u32();
    if (level > static_cast<std::uint32_t>(max_level)) corrupt("node level above max level");
    for (std::uint32_t i = 0; i < dim; ++i) {
      const float v = r.f32();
      if (!std::isfinite(v)) corrupt("non-finite vector component");
      index.data_.push_back(v);
    }
    std::vector<std::vector<std::uint32_t>> layers(level + 1);
    for (std::uint32_t l = 0; l <= level; ++l) {
      const std::uint32_t n = r.u32();
      if (n > index.max_links(static_cast<int>(l))) corrupt("adjacency list too long");
      layers[l].reserve(n);
      for (std::uint32_t j = 0; j < n; ++j) {
        const std::uint32_t neighbor = r.u32();
        if (neighbor >= count) corrupt("neighbor id out of range");
        layers[l].push_back(neighbor);
      }
    }
    index.labels_.push_back(std::move(label));
    index.links_.push_back(std::move(layers));
  }
  if (r.remaining() != 0) corrupt("trailing bytes after node records");

  for (std::uint32_t node = 0; node < count; ++node) {
    for (std::size_t l = 0; l < index.links_[node].size(); ++l) {
      for (std::uint32_t neighbor : index.links_[node][l]) {
        if (index.links_[neighbor].size() <= l) corrupt("edge to node absent from layer");
      }
    }
  }
  if (index.level(entry) != max_level) corrupt("entry point is not on the top layer");
  index.entry_point_ = entry;
  index.max_level_ = max_level;
  return index;
}

std::vector<SearchHit> exact_search(std::span<const IndexedPoint> points,
                                    const EmbeddingVector& query, std::size_t k) {
  std::vector<SearchHit> all;
  all.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    check_dim(points[i].vector.dim(), query.dim());
    all.push_back({points[i].label, ip_distance(query.values(), points[i].vector.values()),
                   static_cast<std::uint32_t>(i)});
  }
  const std::size_t n = std::min(k, all.size());
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(n), all.end(),
                    [](const SearchHit& a, const SearchHit& b) {
                      return a.distance != b.distance ? a.distance < b.distance : a.node < b.node;
                    });
  all.resize(n);
  return all;
}

}  // namespace sore
