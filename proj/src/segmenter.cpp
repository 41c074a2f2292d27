#include "sore/segmenter.hpp"

#include "sore/errors.hpp"
#include "sore/text.hpp"

#include <algorithm>
#include <initializer_list>

namespace sore {

namespace {

using html::Node;
using html::NodeId;

bool one_of(std::string_view s, std::initializer_list<std::string_view> set) {
  return std::find(set.begin(), set.end(), s) != set.end();
}

bool is_inline(std::string_view tag) {
  return one_of(tag, {"a",     "abbr",  "acronym", "b",    "bdi",    "bdo",      "big",
                      "br",    "button", "cite",   "code", "data",   "del",      "dfn",
                      "em",    "font",  "i",       "img",  "ins",    "kbd",      "label",
                      "mark",  "meter", "nobr",    "output", "progress", "q",    "rp",
                      "rt",    "ruby",  "s",       "samp", "small",  "span",     "strike",
                      "strong", "sub",  "sup",     "time", "tt",     "u",        "var",
                      "wbr"});
}

bool is_excluded(const Node& n) {
  if (n.has_attribute("hidden")) return true;
  return one_of(n.name, {"script", "style", "noscript", "template", "head", "title", "svg",
                         "math", "iframe", "object", "embed", "canvas", "select", "textarea",
                         "datalist", "audio", "video", "input"});
}

class SegmentCollector {
 public:
  SegmentCollector(const html::Document& doc, const SegmenterOptions& options)
      : doc_(doc), options_(options) {}

  std::vector<Segment> run() {
    std::vector<std::string> path;
    walk(0, path);
    flush(path);
    return std::move(segments_);
  }

 private:
  void walk(NodeId id, std::vector<std::string>& path) {
    const Node& n = doc_.node(id);
    if (n.kind == Node::Kind::Text) {
      run_.append(n.text);
      return;
    }
    if (n.kind == Node::Kind::Element) {
      if (is_excluded(n)) return;
      if (is_inline(n.name)) {
        if (n.name == "br") run_.push_back(' ');
        for (NodeId child : n.children) walk(child, path);
        return;
      }
      flush(path);
      path.push_back(n.name);
      for (NodeId child : n.children) walk(child, path);
      flush(path);
      path.pop_back();
      return;
    }
    for (NodeId child : n.children) walk(child, path);
  }

  void flush(const std::vector<std::string>& path) {
    if (run_.empty()) return;
    std::string block = text::normalize_whitespace(run_);
    run_.clear();
    if (block.empty()) return;
    if (options_.split_sentences) {
      for (auto& piece : text::split_sentences(block)) emit(std::move(piece), path);
    } else {
      emit(std::move(block), path);
    }
  }

  void emit(std::string text, const std::vector<std::string>& path) {
    if (text::codepoint_count(text) < std::max<std::size_t>(options_.min_segment_chars, 1)) return;
    Segment s;
    s.id = segments_.size();
    s.text = std::move(text);
    s.tag_path = path;
    s.depth = path.size();
    segments_.push_back(std::move(s));
  }

  const html::Document& doc_;
  const SegmenterOptions& options_;
  std::string run_;
  std::vector<Segment> segments_;
};

// Visible text of a subtree with the same exclusions as segmentation.
std::string visible_text(const html::Document& doc, NodeId id) {
  const Node& n = doc.node(id);
  if (n.kind == Node::Kind::Text) return n.text;
  if (n.kind == Node::Kind::Element && is_excluded(n)) return {};
  std::string out;
  for (NodeId child : n.children) {
    out += visible_text(doc, child);
    const Node& c = doc.node(child);
    if (c.kind == Node::Kind::Element && (!is_inline(c.name) || c.name == "br")) out.push_back(' ');
  }
  return out;
}

void find_elements(const html::Document& doc, NodeId id, std::string_view tag,
                   std::vector<NodeId>& out) {
  const Node& n = doc.node(id);
  if (n.kind == Node::Kind::Element && n.name == tag) out.push_back(id);
  for (NodeId child : n.children) find_elements(doc, child, tag, out);
}

std::optional<std::string> non_empty(std::string s) {
  s = text::normalize_whitespace(s);
  if (s.empty()) return std::nullopt;
  return s;
}

std::optional<std::string> meta_content(const html::Document& doc,
                                        const std::vector<NodeId>& metas, std::string_view key) {
  for (NodeId id : metas) {
    const Node& n = doc.node(id);
    for (std::string_view attr : {"name", "property"}) {
      auto v = n.attribute(attr);
      if (v && text::to_lower(*v) == key) {
        if (auto content = n.attribute("content")) {
          if (auto value = non_empty(std::string(*content))) return value;
        }
      }
    }
  }
  return std::nullopt;
}

}  // namespace

std::vector<Segment> segment_document(const html::Document& doc, const SegmenterOptions& options) {
  std::vector<Segment> segments = SegmentCollector(doc, options).run();
  std::size_t offset = 0;
  for (auto& s : segments) {
    s.char_span = {offset, offset + s.text.size()};
    offset += s.text.size() + 1;
  }
  return segments;
}

std::string extracted_text(const std::vector<Segment>& segments) {
  std::string out;
  for (const auto& s : segments) {
    if (!out.empty()) out.push_back('\n');
    out += s.text;
  }
  return out;
}

DocumentMetadata extract_metadata(const html::Document& doc) {
  DocumentMetadata meta;
  std::vector<NodeId> titles, metas, h1s;
  find_elements(doc, 0, "title", titles);
  find_elements(doc, 0, "meta", metas);
  find_elements(doc, 0, "h1", h1s);

  for (NodeId id : titles) {
    if ((meta.title = non_empty(html::inner_text(doc, id)))) break;
  }
  if (!meta.title) meta.title = meta_content(doc, metas, "og:title");
  if (!meta.title) {
    for (NodeId id : h1s) {
      if ((meta.title = non_empty(visible_text(doc, id)))) break;
    }
  }
  meta.description = meta_content(doc, metas, "description");
  if (!meta.description) meta.description = meta_content(doc, metas, "og:description");

  if (meta.title) meta.combined_text = *meta.title;
  if (meta.description) {
    if (!meta.combined_text.empty()) meta.combined_text.push_back('\n');
    meta.combined_text += *meta.description;
  }
  return meta;
}

DocumentMetadata extract_metadata(std::string_view html) { return extract_metadata(html::parse(html)); }

ParsedDocument parse_document(std::string_view html, const SegmenterOptions& options) {
  html::Document doc = html::parse(html);
  ParsedDocument parsed;
  parsed.metadata = extract_metadata(doc);
  parsed.segments = segment_document(doc, options);
  if (parsed.segments.empty()) {
    throw Error(ErrorKind::EmptyDocument, "no text segment survived filtering");
  }
  return parsed;
}

}  // namespace sore
