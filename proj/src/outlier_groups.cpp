#include "sore/outlier_groups.hpp"

#include "sore/errors.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_set>

namespace sore {

namespace {

std::string trim(std::string_view s) {
  const auto* ws = " \t\r\n\f\v";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void parse_error(std::size_t line, const std::string& what) {
  throw Error(ErrorKind::ConfigParse, "line " + std::to_string(line) + ": " + what);
}

void dedupe(std::vector<std::string>& phrases) {
  std::unordered_set<std::string> seen;
  std::vector<std::string> unique;
  for (auto& p : phrases) {
    if (seen.insert(p).second) unique.push_back(std::move(p));
  }
  phrases = std::move(unique);
}

}  // namespace

std::vector<OutlierGroup> builtin_outlier_groups() {
  std::vector<OutlierGroup> groups = {
      {"Date-time Related Content",
       {"Date", "21.02.2023", "21.02.2024", "21.02.2025", "Published at", "Last updated", "Time",
        "Published", "Updated", "dd/mm/yyyy", "mm/dd/yyyy", "yyyy-mm-dd", "dd.mm.yy"}},
      {"Authorship Information",
       {"Author", "Writer", "Contributor", "Editor", "Posts", "Written by"}},
      {"Comment Sections", {"Comment", "Reply", "Feedback", "Discussion", "Leave a comment"}},
      {"Source Attribution", {"Source", "Website", "Publisher", "URL", "Link"}},
      {"Related Content Links",
       {"Related", "Read more", "Look:", "Similar", "See also", "Also read", "Read next",
        "Get more", "Frequently asked questions"}},
      {"Calls to Action",
       {"CTA", "Buy", "Shop", "Order", "Click here", "Check out", "View more", "Visit",
        "Let me know", "Download", "Subscribe", "Sign up", "Contact us", "Receive notifications"}},
      {"Navigation Elements",
       {"Breadcrumbs", "Home >", "Home > About", "Navigation", "Home", "About"}},
      {"Contact Information", {"Contact", "Email", "Phone", "Address", "Contact us"}},
      {"Social Media Elements",
       {"Social", "Facebook", "Twitter", "Instagram", "LinkedIn", "TikTok", "Share", "Like",
        "Follow", "3425 views"}},
      {"Legal Content",
       {"Legal", "Terms", "Privacy", "Policy", "Disclaimer", "Cookie", "Accept", "Policy",
        "Settings"}},
      {"Page Infrastructure",
       {"Footer", "Copyright", "All rights reserved", "Search", "Find", "Look for", "Explore",
        "Error", "404", "Not found", "Page not found", "Error", "Try again later"}},
      {"Commercial Content",
       {"Advertisement", "Sponsored", "Promotion", "Sponsor", "Subscription", "Subscribe",
        "Newsletter", "Membership", "Join", "Affiliate", "Affiliate links", "Disclosure",
        "Affiliate Disclosure"}},
      {"Miscellaneous Boilerplate",
       {"Refresh this page", "Login required", "License", "Enter your email",
        "Thank you for reading", "Subscribe for free"}},
  };
  for (auto& g : groups) dedupe(g.phrases);
  return groups;
}

std::vector<OutlierGroup> parse_outlier_groups(std::string_view content) {
  std::vector<OutlierGroup> groups;
  std::vector<std::size_t> header_lines;
  std::unordered_set<std::string> names;

  auto close_group = [&] {
    if (!groups.empty() && groups.back().phrases.empty()) {
      parse_error(header_lines.back(), "group [" + groups.back().name + "] has no phrases");
    }
  };

  std::istringstream in{std::string(content)};
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    if (line.front() == '[') {
      if (line.back() != ']') parse_error(line_no, "unterminated group header");
      std::string name = trim(std::string_view(line).substr(1, line.size() - 2));
      if (name.empty()) parse_error(line_no, "empty group name");
      if (!names.insert(name).second) parse_error(line_no, "duplicate group [" + name + "]");
      close_group();
      groups.push_back({std::move(name), {}});
      header_lines.push_back(line_no);
      continue;
    }
    if (groups.empty()) parse_error(line_no, "phrase outside of a [Group] section");
    groups.back().phrases.push_back(line);
  }
  close_group();
  if (groups.empty()) parse_error(line_no, "no outlier groups defined");
  for (auto& g : groups) dedupe(g.phrases);
  return groups;
}

std::vector<OutlierGroup> load_outlier_groups(const std::string& source) {
  if (source.empty() || source == "builtin") return builtin_outlier_groups();
  std::ifstream in(source, std::ios::binary);
  if (!in) throw Error(ErrorKind::ConfigParse, "cannot open groups file: " + source);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_outlier_groups(buffer.str());
}

std::string format_outlier_groups(const std::vector<OutlierGroup>& groups) {
  std::string out;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    if (i > 0) out += "\n";
    out += "[" + groups[i].name + "]\n";
    for (const auto& p : groups[i].phrases) out += p + "\n";
  }
  return out;
}

std::string lint_report(const std::vector<OutlierGroup>& groups) {
  std::size_t total = 0;
  for (const auto& g : groups) total += g.phrases.size();
  std::string out = "groups: " + std::to_string(groups.size()) + "\n";
  out += "phrases: " + std::to_string(total) + "\n";
  for (const auto& g : groups) {
    out += g.name + ": " + std::to_string(g.phrases.size()) + "\n";
  }
  return out;
}

std::vector<PhraseEntry> flatten_phrases(const std::vector<OutlierGroup>& groups) {
  std::vector<PhraseEntry> out;
  for (const auto& g : groups) {
    for (const auto& p : g.phrases) out.push_back({g.name, p});
  }
  return out;
}

}  // namespace sore
