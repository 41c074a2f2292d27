#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sore/html.hpp"

namespace sore {

struct CharSpan {
  std::size_t start = 0;
  std::size_t end = 0;

  bool operator==(const CharSpan&) const = default;
};

// One block-level run of text. `char_span` is a byte range into the
// document's extracted text: all segment texts joined by '\n'.
struct Segment {
  std::size_t id = 0;
  std::string text;
  std::vector<std::string> tag_path;
  std::size_t depth = 0;
  CharSpan char_span;

  bool operator==(const Segment&) const = default;
};

struct DocumentMetadata {
  std::optional<std::string> title;
  std::optional<std::string> description;
  std::string combined_text;  // non-empty members of {title, description} joined by '\n'

  bool operator==(const DocumentMetadata&) const = default;
};

struct SegmenterOptions {
  std::size_t min_segment_chars = 3;
  bool split_sentences = false;
};

struct ParsedDocument {
  DocumentMetadata metadata;
  std::vector<Segment> segments;
};

// Throws Error(EmptyDocument) when no segment survives filtering.
ParsedDocument parse_document(std::string_view html, const SegmenterOptions& options = {});

DocumentMetadata extract_metadata(std::string_view html);
DocumentMetadata extract_metadata(const html::Document& doc);

// Segments of an already-parsed DOM; may return an empty list.
std::vector<Segment> segment_document(const html::Document& doc, const SegmenterOptions& options);

// The text `char_span`s index into.
std::string extracted_text(const std::vector<Segment>& segments);

}  // namespace sore
