#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace sore {

// A named category of unwanted content. The name doubles as the removal reason.
struct OutlierGroup {
  std::string name;
  std::vector<std::string> phrases;

  bool operator==(const OutlierGroup&) const = default;
};

// The 13 production categories. Phrases are deduplicated within a category;
// cross-category duplicates ("Contact us", "Subscribe") are kept.
std::vector<OutlierGroup> builtin_outlier_groups();

// Sectioned plain text:
//
//   # comment
//   [Group Name]
//   phrase one
//   phrase two
//
// Throws Error(ConfigParse) with the offending line number for phrases
// outside a section, malformed or duplicate headers, and empty groups.
std::vector<OutlierGroup> parse_outlier_groups(std::string_view content);

// "builtin" selects the defaults; anything else is read as a file path.
std::vector<OutlierGroup> load_outlier_groups(const std::string& source);

std::string format_outlier_groups(const std::vector<OutlierGroup>& groups);

// Category/phrase counts, one line per group.
std::string lint_report(const std::vector<OutlierGroup>& groups);

// Flattened phrase table; PointLabel::ref_id of an outlier point indexes it.
struct PhraseEntry {
  std::string group;
  std::string phrase;
};

std::vector<PhraseEntry> flatten_phrases(const std::vector<OutlierGroup>& groups);

}  // namespace sore
