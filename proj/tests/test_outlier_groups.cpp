#include "sore/corpus_io.hpp"
#include "sore/errors.hpp"
#include "sore/outlier_groups.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>

using namespace sore;

namespace {

const OutlierGroup& group(const std::vector<OutlierGroup>& groups, const std::string& name) {
  for (const auto& g : groups) {
    if (g.name == name) return g;
  }
  throw std::runtime_error("missing group " + name);
}

bool has(const OutlierGroup& g, const std::string& phrase) {
  return std::find(g.phrases.begin(), g.phrases.end(), phrase) != g.phrases.end();
}

std::string parse_error_message(const std::string& content) {
  try {
    parse_outlier_groups(content);
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ConfigParse);
    return e.what();
  }
  ADD_FAILURE() << "expected ConfigParse for:\n" << content;
  return {};
}

}  // namespace

TEST(OutlierGroups, BuiltinHasThirteenCategories) {
  const auto groups = builtin_outlier_groups();
  ASSERT_EQ(groups.size(), 13u);
  EXPECT_EQ(groups.front().name, "Date-time Related Content");
  EXPECT_EQ(groups.back().name, "Miscellaneous Boilerplate");
}

TEST(OutlierGroups, AuthorshipPhrasesVerbatim) {
  EXPECT_EQ(group(builtin_outlier_groups(), "Authorship Information").phrases,
            (std::vector<std::string>{"Author", "Writer", "Contributor", "Editor", "Posts", "Written by"}));
}

TEST(OutlierGroups, DateTimeContainsDatePattern) {
  EXPECT_TRUE(has(group(builtin_outlier_groups(), "Date-time Related Content"), "dd/mm/yyyy"));
}

TEST(OutlierGroups, DuplicatesWithinCategoryDroppedAcrossKept) {
  const auto groups = builtin_outlier_groups();
  const auto& infra = group(groups, "Page Infrastructure");
  EXPECT_EQ(std::count(infra.phrases.begin(), infra.phrases.end(), "Error"), 1);
  EXPECT_TRUE(has(group(groups, "Calls to Action"), "Contact us"));
  EXPECT_TRUE(has(group(groups, "Contact Information"), "Contact us"));
  EXPECT_TRUE(has(group(groups, "Navigation Elements"), "Home >"));
  const auto& legal = group(groups, "Legal Content");
  EXPECT_EQ(std::count(legal.phrases.begin(), legal.phrases.end(), "Policy"), 1);
}

TEST(OutlierGroups, LintReportMatchesGolden) {
  EXPECT_EQ(lint_report(builtin_outlier_groups()),
            read_file(std::string(SORE_FIXTURE_DIR) + "/groups_lint.golden.txt"));
}

TEST(OutlierGroups, ParseSectionedText) {
  const auto groups = parse_outlier_groups(
      "# my groups\n"
      "[Ads]\n"
      "Sponsored\n"
      "  Advertisement  \n"
      "Sponsored\n"
      "\n"
      "[Nav Stuff]\n"
      "Home\n");
  ASSERT_EQ(groups.size(), 2u);
  EXPECT_EQ(groups[0].name, "Ads");
  EXPECT_EQ(groups[0].phrases, (std::vector<std::string>{"Sponsored", "Advertisement"}));
  EXPECT_EQ(groups[1].name, "Nav Stuff");
}

TEST(OutlierGroups, FormatRoundTrips) {
  const auto groups = builtin_outlier_groups();
  EXPECT_EQ(parse_outlier_groups(format_outlier_groups(groups)), groups);
}

TEST(OutlierGroups, ParseErrorsCarryLineNumbers) {
  EXPECT_NE(parse_error_message("[Empty]\n[Next]\nphrase\n").find("line 1"), std::string::npos);
  EXPECT_NE(parse_error_message("[A]\nx\n[B]\n").find("line 3"), std::string::npos);
  EXPECT_NE(parse_error_message("orphan phrase\n").find("line 1"), std::string::npos);
  EXPECT_NE(parse_error_message("[A]\nx\n[A]\ny\n").find("line 3"), std::string::npos);
  EXPECT_NE(parse_error_message("[Broken\nx\n").find("line 1"), std::string::npos);
  EXPECT_NE(parse_error_message("[ ]\nx\n").find("line 1"), std::string::npos);
  parse_error_message("# only comments\n\n");
}

TEST(OutlierGroups, LoadFromFileAndBuiltin) {
  EXPECT_EQ(load_outlier_groups("builtin"), builtin_outlier_groups());
  const auto path = std::filesystem::temp_directory_path() / "sore_groups_test.txt";
  write_file(path, "[Only]\nalpha beta\n");
  const auto groups = load_outlier_groups(path.string());
  ASSERT_EQ(groups.size(), 1u);
  EXPECT_EQ(groups[0].phrases[0], "alpha beta");
  std::filesystem::remove(path);
  EXPECT_THROW(load_outlier_groups("/nonexistent/groups.txt"), Error);
}

TEST(OutlierGroups, FlattenKeepsOrder) {
  const auto flat = flatten_phrases(builtin_outlier_groups());
  ASSERT_EQ(flat.size(), 112u);
  EXPECT_EQ(flat.front().phrase, "Date");
  EXPECT_EQ(flat.front().group, "Date-time Related Content");
  EXPECT_EQ(flat.back().phrase, "Subscribe for free");
}
