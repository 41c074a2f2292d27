#include "sore/corpus_io.hpp"

#include "sore/errors.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace sore {

namespace fs = std::filesystem;

namespace {

constexpr std::string_view kTruthSuffix = ".truth.txt";

bool ends_with(const std::string& s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

// Ids of files in `dir` named <id><suffix>, sorted.
std::vector<std::string> ids_with_suffix(const fs::path& dir, std::string_view suffix) {
  if (!fs::is_directory(dir)) throw Error(ErrorKind::InvalidArgument, "not a directory: " + dir.string());
  std::vector<std::string> ids;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const auto name = entry.path().filename().string();
    if (ends_with(name, suffix)) ids.push_back(name.substr(0, name.size() - suffix.size()));
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

}  // namespace

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::InvalidArgument, "cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const fs::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::InvalidArgument, "cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error(ErrorKind::InvalidArgument, "write failed: " + path.string());
}

void write_corpus(const fs::path& dir, const std::vector<SyntheticDocument>& docs) {
  fs::create_directories(dir);
  const auto labeled = to_labeled(docs);
  for (const auto& doc : labeled) {
    write_file(dir / (doc.id + ".html"), doc.html);
    write_file(dir / (doc.id + std::string(kTruthSuffix)), doc.truth);
  }
}

std::vector<LabeledDocument> read_corpus(const fs::path& dir) {
  std::vector<LabeledDocument> docs;
  for (const auto& id : ids_with_suffix(dir, ".html")) {
    const auto truth = dir / (id + std::string(kTruthSuffix));
    if (!fs::exists(truth)) continue;
    docs.push_back({id, read_file(dir / (id + ".html")), read_file(truth)});
  }
  return docs;
}

std::vector<TextPair> read_prediction_pairs(const fs::path& predictions, const fs::path& truths) {
  if (!fs::is_directory(predictions)) {
    throw Error(ErrorKind::InvalidArgument, "not a directory: " + predictions.string());
  }
  std::vector<TextPair> pairs;
  for (const auto& id : ids_with_suffix(truths, kTruthSuffix)) {
    const auto pred = predictions / (id + ".txt");
    pairs.emplace_back(fs::exists(pred) ? read_file(pred) : std::string(),
                       read_file(truths / (id + std::string(kTruthSuffix))));
  }
  return pairs;
}

}  // namespace sore
