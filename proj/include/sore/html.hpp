#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace sore::html {

using NodeId = std::uint32_t;

struct Node {
  enum class Kind { Document, Element, Text };

  Kind kind = Kind::Element;
  std::string name;  // lowercase tag name; empty for text nodes
  std::vector<std::pair<std::string, std::string>> attributes;
  std::string text;  // entity-decoded character data for text nodes
  NodeId parent = 0;
  std::vector<NodeId> children;

  bool is_element(std::string_view tag) const { return kind == Kind::Element && name == tag; }
  std::optional<std::string_view> attribute(std::string_view key) const;
  bool has_attribute(std::string_view key) const { return attribute(key).has_value(); }
};

// Arena-backed DOM. Node 0 is the document root.
class Document {
 public:
  Document();

  const Node& node(NodeId id) const { return nodes_[id]; }
  const Node& root() const { return nodes_[0]; }
  std::size_t size() const { return nodes_.size(); }

  NodeId add_element(NodeId parent, std::string name,
                     std::vector<std::pair<std::string, std::string>> attributes);
  void append_text(NodeId parent, std::string_view text);

 private:
  std::vector<Node> nodes_;
};

// Parses arbitrary bytes as HTML. Never throws on malformed markup: unknown
// end tags are dropped, unclosed elements are closed at end of input, and
// common implied end tags (p, li, dd/dt, td/th, tr, option) are applied.
// A declared charset in <meta> is honoured; otherwise input is read as UTF-8.
Document parse(std::string_view bytes);

std::string decode_entities(std::string_view s);

// Concatenated descendant text (raw, not whitespace-normalized).
std::string inner_text(const Document& doc, NodeId id);

}  // namespace sore::html
