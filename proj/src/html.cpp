#include "sore/html.hpp"

#include "sore/text.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <initializer_list>
#include <unordered_map>

namespace sore::html {

std::optional<std::string_view> Node::attribute(std::string_view key) const {
  for (const auto& [k, v] : attributes) {
    if (k == key) return std::string_view(v);
  }
  return std::nullopt;
}

Document::Document() {
  Node root;
  root.kind = Node::Kind::Document;
  nodes_.push_back(std::move(root));
}

NodeId Document::add_element(NodeId parent, std::string name,
                             std::vector<std::pair<std::string, std::string>> attributes) {
  Node n;
  n.kind = Node::Kind::Element;
  n.name = std::move(name);
  n.attributes = std::move(attributes);
  n.parent = parent;
  auto id = static_cast<NodeId>(nodes_.size());
  nodes_.push_back(std::move(n));
  nodes_[parent].children.push_back(id);
  return id;
}

void Document::append_text(NodeId parent, std::string_view text) {
  if (text.empty()) return;
  auto& siblings = nodes_[parent].children;
  if (!siblings.empty() && nodes_[siblings.back()].kind == Node::Kind::Text) {
    nodes_[siblings.back()].text.append(text);
    return;
  }
  Node n;
  n.kind = Node::Kind::Text;
  n.text = std::string(text);
  n.parent = parent;
  auto id = static_cast<NodeId>(nodes_.size());
  nodes_.push_back(std::move(n));
  nodes_[parent].children.push_back(id);
}

namespace {

bool one_of(std::string_view s, std::initializer_list<std::string_view> set) {
  return std::find(set.begin(), set.end(), s) != set.end();
}

bool is_void(std::string_view tag) {
  return one_of(tag, {"area", "base", "br", "col", "embed", "hr", "img", "input", "keygen",
                      "link", "meta", "param", "source", "track", "wbr"});
}

bool is_raw_text(std::string_view tag) {
  return one_of(tag, {"script", "style", "textarea", "title", "xmp", "iframe", "noembed",
                      "noframes", "noscript", "plaintext"});
}

bool is_heading(std::string_view tag) {
  return tag.size() == 2 && tag[0] == 'h' && tag[1] >= '1' && tag[1] <= '6';
}

bool closes_paragraph(std::string_view tag) {
  return is_heading(tag) ||
         one_of(tag, {"address", "article", "aside", "blockquote", "center", "details", "dialog",
                      "dir", "div", "dl", "dd", "dt", "fieldset", "figcaption", "figure",
                      "footer", "form", "header", "hgroup", "hr", "li", "main", "menu", "nav",
                      "ol", "p", "pre", "section", "summary", "table", "ul"});
}

bool allowed_in_head(std::string_view tag) {
  return one_of(tag, {"title", "meta", "link", "style", "script", "base", "noscript", "template"});
}

const std::unordered_map<std::string_view, char32_t>& entity_table() {
  static const std::unordered_map<std::string_view, char32_t> table = {
      {"amp", U'&'},       {"lt", U'<'},        {"gt", U'>'},        {"quot", U'"'},
      {"apos", U'\''},     {"nbsp", 0xA0},      {"copy", 0xA9},      {"reg", 0xAE},
      {"trade", 0x2122},   {"hellip", 0x2026},  {"mdash", 0x2014},   {"ndash", 0x2013},
      {"lsquo", 0x2018},   {"rsquo", 0x2019},   {"sbquo", 0x201A},   {"ldquo", 0x201C},
      {"rdquo", 0x201D},   {"bdquo", 0x201E},   {"laquo", 0xAB},     {"raquo", 0xBB},
      {"lsaquo", 0x2039},  {"rsaquo", 0x203A},  {"middot", 0xB7},    {"bull", 0x2022},
      {"euro", 0x20AC},    {"pound", 0xA3},     {"yen", 0xA5},       {"cent", 0xA2},
      {"sect", 0xA7},      {"para", 0xB6},      {"deg", 0xB0},       {"times", 0xD7},
      {"divide", 0xF7},    {"plusmn", 0xB1},    {"frac12", 0xBD},    {"frac14", 0xBC},
      {"frac34", 0xBE},    {"sup2", 0xB2},      {"sup3", 0xB3},      {"micro", 0xB5},
      {"iexcl", 0xA1},     {"iquest", 0xBF},    {"shy", 0xAD},       {"ensp", 0x2002},
      {"emsp", 0x2003},    {"thinsp", 0x2009},  {"zwnj", 0x200C},    {"zwj", 0x200D},
      {"larr", 0x2190},    {"rarr", 0x2192},    {"uarr", 0x2191},    {"darr", 0x2193},
      {"harr", 0x2194},    {"dagger", 0x2020},  {"Dagger", 0x2021},  {"permil", 0x2030},
      {"prime", 0x2032},   {"Prime", 0x2033},   {"minus", 0x2212},   {"infin", 0x221E},
      {"ne", 0x2260},      {"le", 0x2264},      {"ge", 0x2265},      {"asymp", 0x2248},
      {"Agrave", 0xC0},    {"Aacute", 0xC1},    {"Acirc", 0xC2},     {"Atilde", 0xC3},
      {"Auml", 0xC4},      {"Aring", 0xC5},     {"AElig", 0xC6},     {"Ccedil", 0xC7},
      {"Egrave", 0xC8},    {"Eacute", 0xC9},    {"Ecirc", 0xCA},     {"Euml", 0xCB},
      {"Igrave", 0xCC},    {"Iacute", 0xCD},    {"Icirc", 0xCE},     {"Iuml", 0xCF},
      {"Ntilde", 0xD1},    {"Ograve", 0xD2},    {"Oacute", 0xD3},    {"Ocirc", 0xD4},
      {"Otilde", 0xD5},    {"Ouml", 0xD6},      {"Oslash", 0xD8},    {"Ugrave", 0xD9},
      {"Uacute", 0xDA},    {"Ucirc", 0xDB},     {"Uuml", 0xDC},      {"Yacute", 0xDD},
      {"szlig", 0xDF},     {"agrave", 0xE0},    {"aacute", 0xE1},    {"acirc", 0xE2},
      {"atilde", 0xE3},    {"auml", 0xE4},      {"aring", 0xE5},     {"aelig", 0xE6},
      {"ccedil", 0xE7},    {"egrave", 0xE8},    {"eacute", 0xE9},    {"ecirc", 0xEA},
      {"euml", 0xEB},      {"igrave", 0xEC},    {"iacute", 0xED},    {"icirc", 0xEE},
      {"iuml", 0xEF},      {"ntilde", 0xF1},    {"ograve", 0xF2},    {"oacute", 0xF3},
      {"ocirc", 0xF4},     {"otilde", 0xF5},    {"ouml", 0xF6},      {"oslash", 0xF8},
      {"ugrave", 0xF9},    {"uacute", 0xFA},    {"ucirc", 0xFB},     {"uuml", 0xFC},
      {"yacute", 0xFD},    {"yuml", 0xFF},      {"OElig", 0x152},    {"oelig", 0x153},
      {"Scaron", 0x160},   {"scaron", 0x161},   {"Yuml", 0x178},     {"fnof", 0x192},
      {"alpha", 0x3B1},    {"beta", 0x3B2},     {"gamma", 0x3B3},    {"delta", 0x3B4},
      {"pi", 0x3C0},       {"sigma", 0x3C3},    {"omega", 0x3C9},    {"mu", 0x3BC},
  };
  return table;
}

// Entities recognised without a trailing semicolon (legacy behaviour).
bool is_legacy_entity(std::string_view name) {
  return one_of(name, {"amp", "lt", "gt", "quot", "nbsp", "copy", "reg"});
}

// C1 controls in numeric references are read as windows-1252.
char32_t remap_c1(char32_t cp) {
  static constexpr std::array<char32_t, 32> kWin1252 = {
      0x20AC, 0x81,   0x201A, 0x192,  0x201E, 0x2026, 0x2020, 0x2021, 0x2C6,  0x2030, 0x160,
      0x2039, 0x152,  0x8D,   0x17D,  0x8F,   0x90,   0x2018, 0x2019, 0x201C, 0x201D, 0x2022,
      0x2013, 0x2014, 0x2DC,  0x2122, 0x161,  0x203A, 0x153,  0x9D,   0x17E,  0x178};
  if (cp >= 0x80 && cp <= 0x9F) return kWin1252[cp - 0x80];
  return cp;
}

std::string lower_ascii(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool is_alpha(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }
bool is_ws(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f'; }

std::string sniff_charset(std::string_view bytes) {
  std::string head = lower_ascii(bytes.substr(0, 4096));
  std::size_t pos = 0;
  while ((pos = head.find("<meta", pos)) != std::string::npos) {
    std::size_t end = head.find('>', pos);
    if (end == std::string::npos) break;
    std::string_view tag(head.data() + pos, end - pos);
    std::size_t cs = tag.find("charset");
    if (cs != std::string_view::npos) {
      std::size_t i = cs + 7;
      while (i < tag.size() && (is_ws(tag[i]) || tag[i] == '=' || tag[i] == '"' || tag[i] == '\''))
        ++i;
      std::size_t j = i;
      while (j < tag.size() && (std::isalnum(static_cast<unsigned char>(tag[j])) ||
                                tag[j] == '-' || tag[j] == '_' || tag[j] == ':' || tag[j] == '.'))
        ++j;
      if (j > i) return std::string(tag.substr(i, j - i));
    }
    pos = end;
  }
  return {};
}

class TreeBuilder {
 public:
  explicit TreeBuilder(Document& doc) : doc_(doc) {}

  void start_tag(std::string name, std::vector<std::pair<std::string, std::string>> attrs,
                 bool self_closing) {
    if (name == "html" || name == "body" || name == "head") {
      if (find_open(name).has_value()) return;
      if (name == "body") close_head();
    } else if (!allowed_in_head(name)) {
      close_head();
    }
    apply_implied_end_tags(name);

    NodeId id = doc_.add_element(current(), name, std::move(attrs));
    if (!is_void(name) && !self_closing && stack_.size() < kMaxDepth) stack_.push_back(id);
  }

  void end_tag(const std::string& name) {
    if (name == "br" || is_void(name)) return;
    if (auto pos = find_open(name)) stack_.resize(*pos);
  }

  void text(std::string_view raw, bool decode = true, bool raw_element = false) {
    if (raw.empty()) return;
    bool blank = std::all_of(raw.begin(), raw.end(), is_ws);
    if (!blank && !raw_element) close_head();
    if (decode) {
      doc_.append_text(current(), decode_entities(raw));
    } else {
      doc_.append_text(current(), raw);
    }
  }

  NodeId current() const { return stack_.back(); }

 private:
  // Position of the innermost open element `name` in the stack, searching no
  // further than the first boundary element.
  std::optional<std::size_t> find_open(std::string_view name,
                                       std::initializer_list<std::string_view> boundaries = {}) const {
    for (std::size_t i = stack_.size(); i-- > 1;) {
      const Node& n = doc_.node(stack_[i]);
      if (n.name == name) return i;
      if (one_of(n.name, boundaries)) return std::nullopt;
    }
    return std::nullopt;
  }

  void close(std::string_view name, std::initializer_list<std::string_view> boundaries) {
    if (auto pos = find_open(name, boundaries)) stack_.resize(*pos);
  }

  void close_head() {
    if (auto pos = find_open("head")) stack_.resize(*pos);
  }

  void apply_implied_end_tags(std::string_view name) {
    const std::initializer_list<std::string_view> kScope = {
        "td", "th", "table", "caption", "html", "template", "button", "object", "marquee", "applet"};

    if (closes_paragraph(name)) {
      close("p", kScope);
    }
    if (name == "li") {
      close("li", {"ul", "ol", "td", "th", "table", "html"});
    } else if (name == "dd" || name == "dt") {
      close("dd", {"dl", "td", "th", "table", "html"});
      close("dt", {"dl", "td", "th", "table", "html"});
    } else if (name == "td" || name == "th") {
      close("td", {"tr", "table"});
      close("th", {"tr", "table"});
    } else if (name == "tr") {
      close("tr", {"table", "tbody", "thead", "tfoot"});
    } else if (name == "tbody" || name == "thead" || name == "tfoot") {
      close("tbody", {"table"});
      close("thead", {"table"});
      close("tfoot", {"table"});
    } else if (name == "option" || name == "optgroup") {
      close("option", {"select", "datalist"});
      if (name == "optgroup") close("optgroup", {"select"});
    } else if (name == "a") {
      close("a", kScope);
    } else if (is_heading(name)) {
      if (is_heading(doc_.node(current()).name)) stack_.pop_back();
    }
  }

  // Deeper elements are attached as leaves so tree walks stay bounded.
  static constexpr std::size_t kMaxDepth = 256;

  Document& doc_;
  std::vector<NodeId> stack_{0};
};

// Finds the closing tag of a raw-text element, case-insensitively.
std::size_t find_raw_end(std::string_view s, std::size_t from, std::string_view name) {
  std::size_t i = from;
  while ((i = s.find("</", i)) != std::string_view::npos) {
    std::size_t j = i + 2;
    if (j + name.size() <= s.size() && lower_ascii(s.substr(j, name.size())) == name) {
      std::size_t k = j + name.size();
      if (k >= s.size() || is_ws(s[k]) || s[k] == '>' || s[k] == '/') return i;
    }
    i += 2;
  }
  return s.size();
}

}  // namespace

std::string decode_entities(std::string_view s) {
  if (s.find('&') == std::string_view::npos) return std::string(s);
  std::string out;
  out.reserve(s.size());
  const auto& table = entity_table();
  std::size_t i = 0;
  while (i < s.size()) {
    char c = s[i];
    if (c != '&') {
      out.push_back(c);
      ++i;
      continue;
    }
    std::size_t j = i + 1;
    if (j < s.size() && s[j] == '#') {
      ++j;
      bool hex = j < s.size() && (s[j] == 'x' || s[j] == 'X');
      if (hex) ++j;
      std::size_t digits_start = j;
      char32_t cp = 0;
      bool overflow = false;
      while (j < s.size() && (hex ? std::isxdigit(static_cast<unsigned char>(s[j]))
                                  : std::isdigit(static_cast<unsigned char>(s[j])))) {
        unsigned d = std::isdigit(static_cast<unsigned char>(s[j]))
                         ? static_cast<unsigned>(s[j] - '0')
                         : static_cast<unsigned>(std::tolower(static_cast<unsigned char>(s[j])) - 'a' + 10);
        if (cp > 0x10FFFF) {
          overflow = true;
        } else {
          cp = cp * (hex ? 16 : 10) + d;
        }
        ++j;
      }
      if (j == digits_start) {
        out.push_back('&');
        ++i;
        continue;
      }
      if (j < s.size() && s[j] == ';') ++j;
      if (overflow || cp == 0 || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) cp = U'\uFFFD';
      text::append_utf8(out, remap_c1(cp));
      i = j;
      continue;
    }
    while (j < s.size() && j - i <= 32 && std::isalnum(static_cast<unsigned char>(s[j]))) ++j;
    std::string_view name = s.substr(i + 1, j - i - 1);
    bool terminated = j < s.size() && s[j] == ';';
    auto it = table.find(name);
    if (it != table.end() && (terminated || is_legacy_entity(name))) {
      text::append_utf8(out, it->second);
      i = terminated ? j + 1 : j;
      continue;
    }
    // "&ampx" still decodes its longest legacy prefix.
    std::size_t len = name.size();
    while (len > 1 && !(is_legacy_entity(name.substr(0, len)) && table.count(name.substr(0, len)))) --len;
    if (len > 1) {
      text::append_utf8(out, table.find(name.substr(0, len))->second);
      i += 1 + len;
    } else {
      out.push_back('&');
      ++i;
    }
  }
  return out;
}

Document parse(std::string_view bytes) {
  const std::string input = text::to_utf8(bytes, sniff_charset(bytes));
  const std::string_view s(input);
  Document doc;
  TreeBuilder builder(doc);

  std::size_t i = 0;
  std::size_t text_start = 0;
  auto flush_text = [&](std::size_t end) {
    if (end > text_start) builder.text(s.substr(text_start, end - text_start));
  };

  while (i < s.size()) {
    if (s[i] != '<' || i + 1 >= s.size()) {
      ++i;
      continue;
    }
    char next = s[i + 1];
    if (s.substr(i, 4) == "<!--") {
      flush_text(i);
      std::size_t end = s.find("-->", i + 4);
      i = end == std::string_view::npos ? s.size() : end + 3;
      text_start = i;
    } else if (next == '!' || next == '?') {
      flush_text(i);
      std::size_t end = s.find('>', i + 2);
      i = end == std::string_view::npos ? s.size() : end + 1;
      text_start = i;
    } else if (next == '/' && i + 2 < s.size() && is_alpha(s[i + 2])) {
      flush_text(i);
      std::size_t j = i + 2;
      while (j < s.size() && !is_ws(s[j]) && s[j] != '>' && s[j] != '/') ++j;
      std::string name = lower_ascii(s.substr(i + 2, j - i - 2));
      std::size_t end = s.find('>', j);
      i = end == std::string_view::npos ? s.size() : end + 1;
      text_start = i;
      builder.end_tag(name);
    } else if (is_alpha(next)) {
      flush_text(i);
      std::size_t j = i + 1;
      while (j < s.size() && !is_ws(s[j]) && s[j] != '>' && s[j] != '/') ++j;
      std::string name = lower_ascii(s.substr(i + 1, j - i - 1));
      std::vector<std::pair<std::string, std::string>> attrs;
      bool self_closing = false;
      while (j < s.size() && s[j] != '>') {
        if (is_ws(s[j])) {
          ++j;
          continue;
        }
        if (s[j] == '/') {
          self_closing = j + 1 < s.size() && s[j + 1] == '>';
          ++j;
          continue;
        }
        std::size_t k = j;
        while (k < s.size() && !is_ws(s[k]) && s[k] != '>' && s[k] != '=' &&
               !(s[k] == '/' && k + 1 < s.size() && s[k + 1] == '>'))
          ++k;
        if (k == j) ++k;  // stray '='
        std::string key = lower_ascii(s.substr(j, k - j));
        std::string value;
        j = k;
        while (j < s.size() && is_ws(s[j])) ++j;
        if (j < s.size() && s[j] == '=') {
          ++j;
          while (j < s.size() && is_ws(s[j])) ++j;
          if (j < s.size() && (s[j] == '"' || s[j] == '\'')) {
            char quote = s[j];
            std::size_t close = s.find(quote, j + 1);
            if (close == std::string_view::npos) close = s.size();
            value = decode_entities(s.substr(j + 1, close - j - 1));
            j = close < s.size() ? close + 1 : close;
          } else {
            std::size_t v = j;
            while (j < s.size() && !is_ws(s[j]) && s[j] != '>') ++j;
            value = decode_entities(s.substr(v, j - v));
          }
        }
        bool duplicate = std::any_of(attrs.begin(), attrs.end(),
                                     [&](const auto& a) { return a.first == key; });
        if (!key.empty() && key != "=" && !duplicate) attrs.emplace_back(std::move(key), std::move(value));
      }
      i = j < s.size() ? j + 1 : s.size();
      text_start = i;
      builder.start_tag(name, std::move(attrs), self_closing);

      if (is_raw_text(name) && !self_closing) {
        std::size_t end = name == "plaintext" ? s.size() : find_raw_end(s, i, name);
        bool rcdata = name == "title" || name == "textarea";
        builder.text(s.substr(i, end - i), rcdata, true);
        if (end < s.size()) {
          std::size_t close = s.find('>', end);
          i = close == std::string_view::npos ? s.size() : close + 1;
        } else {
          i = s.size();
        }
        text_start = i;
        builder.end_tag(name);
      }
    } else {
      ++i;
    }
  }
  flush_text(s.size());
  return doc;
}

std::string inner_text(const Document& doc, NodeId id) {
  std::string out;
  std::vector<NodeId> pending{id};
  while (!pending.empty()) {
    const Node& n = doc.node(pending.back());
    pending.pop_back();
    if (n.kind == Node::Kind::Text) {
      out += n.text;
      continue;
    }
    for (auto it = n.children.rbegin(); it != n.children.rend(); ++it) pending.push_back(*it);
  }
  return out;
}

}  // namespace sore::html
