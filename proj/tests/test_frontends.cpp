#include "sore/cli.hpp"
#include "sore/corpus_io.hpp"
#include "sore/errors.hpp"
#include "sore/response.hpp"
#include "sore/service.hpp"
#include "sore/synthetic_corpus.hpp"

#include <gtest/gtest.h>
#include <httplib.h>
#include <json.hpp>

#include <filesystem>
#include <sstream>
#include <thread>

using namespace sore;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string fixture_path(const std::string& name) { return std::string(SORE_FIXTURE_DIR) + "/" + name; }
std::string fixture(const std::string& name) { return read_file(fixture_path(name)); }

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun run_cli(std::vector<std::string> args, const std::string& stdin_text = "") {
  args.insert(args.begin(), "sore");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::istringstream in(stdin_text);
  std::ostringstream out, err;
  const int code = cli_main(static_cast<int>(argv.size()), argv.data(), in, out, err);
  return {code, out.str(), err.str()};
}

std::shared_ptr<const Pipeline> default_pipeline() {
  static const auto p = std::make_shared<const Pipeline>(CleanConfig{}, builtin_outlier_groups(),
                                                         std::make_shared<HashingEmbedder>(256, 0));
  return p;
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("sore_frontends_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string clean_body(const std::string& html, const std::string& doc_id) {
  return json{{"html", html}, {"doc_id", doc_id}}.dump();
}

}  // namespace

TEST(Response, NewsPageGolden) {
  const CleanRequest req{fixture("news_page.html"), "news", {}};
  const auto outcome = run_clean(*default_pipeline(), req);
  EXPECT_EQ(outcome.response.dump(2) + "\n", fixture("news_page.response.json"));
}

TEST(Response, ShapeAndKeyOrder) {
  const CleanRequest req{fixture("news_page.html"), std::nullopt, {}};
  const auto j = run_clean(*default_pipeline(), req, {true, true}).response;
  std::vector<std::string> keys;
  for (const auto& [k, v] : j.items()) keys.push_back(k);
  EXPECT_EQ(keys, (std::vector<std::string>{"doc_id", "cleaned_text", "removed", "fallback_applied", "stats", "decisions"}));
  EXPECT_TRUE(j["doc_id"].is_null());
  EXPECT_TRUE(j["stats"].contains("elapsed_ms"));
  for (const auto& r : j["removed"]) {
    EXPECT_TRUE(r.contains("segment_id"));
    EXPECT_TRUE(r["reason"].is_string());
  }
  const auto no_timing = run_clean(*default_pipeline(), req).response;
  EXPECT_FALSE(no_timing["stats"].contains("elapsed_ms"));
  EXPECT_FALSE(run_clean(*default_pipeline(), req, {false, false}).response.contains("decisions"));
}

TEST(Response, RequestParsing) {
  const auto r = parse_clean_request(json::parse(
      R"({"html":"<p>x</p>","doc_id":"a","config_overrides":{"core_fraction_k":0.5,"include_metadata_in_core_anchors":false}})"));
  EXPECT_EQ(r.doc_id, "a");
  const auto c = r.config_overrides.apply(CleanConfig{});
  EXPECT_DOUBLE_EQ(c.core_fraction_k, 0.5);
  EXPECT_FALSE(c.include_metadata_in_core_anchors);
  EXPECT_DOUBLE_EQ(c.distance_cutoff_d, 0.8);
  EXPECT_THROW(parse_clean_request(json::parse(R"({"doc_id":"a"})")), Error);
  EXPECT_THROW(parse_clean_request(json::parse(R"({"html":3})")), Error);
  EXPECT_THROW(parse_clean_request(json::parse(R"({"html":"x","config_overrides":{"bogus":1}})")), Error);
  EXPECT_THROW(parse_clean_request(json::parse(R"({"html":"x","config_overrides":{"core_fraction_k":"hi"}})")), Error);
  EXPECT_THROW(parse_clean_request(json::parse("[1]")), Error);
}

TEST(Response, OverridesChangeTheOutcome) {
  CleanRequest req{fixture("news_page.html"), "news", {}};
  req.config_overrides.distance_cutoff_d = 0.05;
  req.config_overrides.max_removal_fraction = 1.0;
  const auto strict = run_clean(*default_pipeline(), req);
  const auto normal = run_clean(*default_pipeline(), CleanRequest{fixture("news_page.html"), "news", {}});
  EXPECT_GT(strict.result.stats.n_removed, normal.result.stats.n_removed);
  req.config_overrides.core_fraction_k = 2.0;
  EXPECT_THROW(run_clean(*default_pipeline(), req), Error);
}

TEST(Response, DecisionLogLines) {
  const auto outcome = run_clean(*default_pipeline(), {fixture("news_page.html"), "news", {}});
  const auto lines = decision_log_lines(outcome.result, "news");
  ASSERT_EQ(lines.size(), outcome.result.segments.size());
  for (std::size_t i = 0; i < lines.size(); ++i) {
    EXPECT_EQ(lines[i].find('\n'), std::string::npos);
    const auto j = json::parse(lines[i]);
    EXPECT_EQ(j["doc_id"], "news");
    EXPECT_EQ(j["segment_id"], i);
    EXPECT_EQ(j["text"], outcome.result.segments[i].text);
    EXPECT_TRUE(j.contains("verdict"));
    EXPECT_TRUE(j.contains("fallback_applied"));
  }
}

TEST(Cli, CleanJsonMatchesGolden) {
  const auto r = run_cli({"clean", fixture_path("news_page.html"), "--format", "json", "--doc-id", "news"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, fixture("news_page.response.json"));
}

TEST(Cli, CleanTextFromStdin) {
  const auto r = run_cli({"clean", "-", "--format", "text", "--timing"}, fixture("news_page.html"));
  ASSERT_EQ(r.code, 0) << r.err;
  const auto outcome = run_clean(*default_pipeline(), {fixture("news_page.html"), std::nullopt, {}});
  EXPECT_EQ(r.out, cleaned_text(outcome.result) + "\n");
  EXPECT_NE(r.err.find("elapsed_ms: "), std::string::npos);
}

TEST(Cli, ExitCodes) {
  const auto missing = run_cli({"clean", "/nonexistent/page.html"});
  EXPECT_EQ(missing.code, 2);
  EXPECT_FALSE(missing.err.empty());
  EXPECT_EQ(run_cli({"bogus-subcommand"}).code, 1);
  EXPECT_EQ(run_cli({}).code, 1);
  EXPECT_EQ(run_cli({"clean", "-", "--format", "xml"}).code, 1);
  EXPECT_EQ(run_cli({"clean", "-"}, "<script>x</script>").code, 2);
  EXPECT_EQ(run_cli({"clean", "-", "--k", "0"}, "<p>hello there</p>").code, 2);
  EXPECT_EQ(run_cli({"--help"}).code, 0);
}

TEST(Cli, GroupsLint) {
  const auto r = run_cli({"groups-lint"});
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out, fixture("groups_lint.golden.txt"));
  const auto dir = scratch("lint");
  write_file(dir / "bad.txt", "[Empty]\n[Other]\nphrase\n");
  const auto bad = run_cli({"groups-lint", (dir / "bad.txt").string()});
  EXPECT_EQ(bad.code, 2);
  EXPECT_NE(bad.err.find("line 1"), std::string::npos);
  fs::remove_all(dir);
}

TEST(Cli, IndexBuildThenCleanWithIndex) {
  const auto dir = scratch("index");
  const auto idx = (dir / "builtin.soreann").string();
  ASSERT_EQ(run_cli({"index", "build", "--out", idx}).code, 0);
  EXPECT_EQ(read_file(idx), fixture("builtin_hashing256_seed0.soreann"));
  const auto r = run_cli({"clean", fixture_path("news_page.html"), "--doc-id", "news", "--index", idx});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, fixture("news_page.response.json"));
  // An index built for another dimension is refused.
  const auto other = (dir / "dim64.soreann").string();
  ASSERT_EQ(run_cli({"index", "build", "--out", other, "--dim", "64"}).code, 0);
  const auto mismatch = run_cli({"clean", fixture_path("news_page.html"), "--index", other});
  EXPECT_EQ(mismatch.code, 2);
  EXPECT_NE(mismatch.err.find("DimensionMismatch"), std::string::npos);
  write_file(dir / "garbage.soreann", "not an index");
  EXPECT_EQ(run_cli({"clean", fixture_path("news_page.html"), "--index", (dir / "garbage.soreann").string()}).code, 2);
  fs::remove_all(dir);
}

TEST(Cli, GenSweepEvalKeywords) {
  const auto dir = scratch("corpus");
  ASSERT_EQ(run_cli({"gen-corpus", "--out", dir.string(), "--n", "6", "--seed", "3"}).code, 0);
  EXPECT_TRUE(fs::exists(dir / "0005.html"));
  EXPECT_TRUE(fs::exists(dir / "0005.truth.txt"));

  const auto sw = run_cli({"sweep", "--corpus", dir.string(), "--k-grid", "0.2", "--d-grid", "0.6,0.8", "--threads", "2"});
  ASSERT_EQ(sw.code, 0) << sw.err;
  std::istringstream csv(sw.out);
  std::string line;
  std::vector<std::string> rows;
  while (std::getline(csv, line)) rows.push_back(line);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0], "k,d,precision,recall,f,mean_removed_fraction,skipped");
  EXPECT_EQ(run_cli({"sweep", "--corpus", dir.string(), "--k-grid", "0.2,abc"}).code, 2);

  // Predictions equal to the truth score perfectly.
  const auto pred = dir / "pred";
  fs::create_directories(pred);
  for (const auto& doc : read_corpus(dir)) write_file(pred / (doc.id + ".txt"), doc.truth);
  const auto ev = run_cli({"eval", "--pred", pred.string(), "--truth", dir.string(), "--format", "json"});
  ASSERT_EQ(ev.code, 0) << ev.err;
  const auto j = json::parse(ev.out);
  EXPECT_EQ(j["n_docs"], 6);
  EXPECT_DOUBLE_EQ(j["macro"]["f"].get<double>(), 1.0);
  EXPECT_DOUBLE_EQ(j["micro"]["precision"].get<double>(), 1.0);

  const auto kw = run_cli({"keywords", "--corpus", dir.string()});
  ASSERT_EQ(kw.code, 0) << kw.err;
  EXPECT_EQ(kw.out.rfind("phrase\toccurrence\taccuracy\n", 0), 0u);
  fs::remove_all(dir);
}

TEST(Service, CleanMatchesCliOutput) {
  Service svc;
  svc.set_pipeline(default_pipeline());
  const auto reply = svc.handle("POST", "/v1/clean", clean_body(fixture("news_page.html"), "news"));
  ASSERT_EQ(reply.status, 200) << reply.body;
  EXPECT_EQ(json::parse(reply.body), json::parse(fixture("news_page.response.json")));
  const auto cli = run_cli({"clean", fixture_path("news_page.html"), "--doc-id", "news"});
  EXPECT_EQ(json::parse(reply.body), json::parse(cli.out));
}

TEST(Service, ErrorStatuses) {
  ServiceOptions o;
  o.max_body_bytes = 4096;
  Service svc(o);
  EXPECT_EQ(svc.handle("GET", "/healthz", "").status, 503);
  EXPECT_EQ(json::parse(svc.handle("GET", "/healthz", "").body)["status"], "loading");
  EXPECT_EQ(svc.handle("POST", "/v1/clean", clean_body("<p>hello</p>", "x")).status, 503);

  svc.set_pipeline(default_pipeline());
  const auto health = svc.handle("GET", "/healthz", "");
  EXPECT_EQ(health.status, 200);
  EXPECT_EQ(json::parse(health.body)["index_points"], 112);
  EXPECT_EQ(svc.handle("POST", "/v1/clean", "{not json").status, 400);
  EXPECT_EQ(svc.handle("POST", "/v1/clean", R"({"html": 5})").status, 400);
  const auto empty = svc.handle("POST", "/v1/clean", clean_body("<script>x</script>", "e"));
  EXPECT_EQ(empty.status, 422);
  EXPECT_EQ(json::parse(empty.body)["error"], "EmptyDocument");
  EXPECT_EQ(svc.handle("POST", "/v1/clean", std::string(5000, ' ')).status, 413);
  EXPECT_EQ(svc.handle("GET", "/v2/nothing", "").status, 404);
  EXPECT_EQ(svc.handle("GET", "/v1/clean", "").status, 404);
}

TEST(Service, BatchIsolatesFailures) {
  Service svc;
  svc.set_pipeline(default_pipeline());
  const json batch = json::array({
      {{"html", fixture("news_page.html")}, {"doc_id", "news"}},
      {{"html", "<script>only()</script>"}, {"doc_id", "bad"}},
      {{"doc_id", "no-html"}},
      {{"html", "<title>Tiny</title><p>one small paragraph</p>"}},
  });
  const auto reply = svc.handle("POST", "/v1/clean/batch", batch.dump());
  ASSERT_EQ(reply.status, 200);
  const auto out = json::parse(reply.body);
  ASSERT_EQ(out.size(), 4u);
  EXPECT_EQ(out[0], json::parse(fixture("news_page.response.json")));
  EXPECT_EQ(out[1]["error"], "EmptyDocument");
  EXPECT_EQ(out[2]["error"], "InvalidArgument");
  EXPECT_TRUE(out[3].contains("cleaned_text"));

  const auto wrapped = svc.handle("POST", "/v1/clean/batch", json{{"items", batch}}.dump());
  EXPECT_EQ(json::parse(wrapped.body), out);
  EXPECT_EQ(svc.handle("POST", "/v1/clean/batch", R"({"html":"x"})").status, 400);

  const auto stats = svc.stats_json();
  EXPECT_EQ(stats["docs_processed"], 4);
  EXPECT_EQ(stats["docs_failed"], 4);
  std::size_t hist_total = 0;
  for (const auto& b : stats["removal_rate_histogram"]) hist_total += b["count"].get<std::size_t>();
  EXPECT_EQ(hist_total, 4u);
  EXPECT_EQ(stats["latency_ms"]["samples"], 4);
  EXPECT_LE(stats["latency_ms"]["p50"].get<double>(), stats["latency_ms"]["p99"].get<double>());
}

TEST(Service, DecisionLogIsJsonl) {
  const auto dir = scratch("log");
  const auto log = (dir / "decisions.jsonl").string();
  {
    ServiceOptions o;
    o.log_path = log;
    Service svc(o);
    svc.set_pipeline(default_pipeline());
    ASSERT_EQ(svc.handle("POST", "/v1/clean", clean_body(fixture("news_page.html"), "a")).status, 200);
    ASSERT_EQ(svc.handle("POST", "/v1/clean", clean_body(fixture("news_page.html"), "b")).status, 200);
  }
  std::istringstream in(read_file(log));
  std::string line;
  std::size_t n = 0, removed = 0;
  while (std::getline(in, line)) {
    const auto j = json::parse(line);
    EXPECT_EQ(j["doc_id"], n < 36 ? "a" : "b");
    removed += j["verdict"].get<std::string>().rfind("removed", 0) == 0;
    ++n;
  }
  EXPECT_EQ(n, 72u);
  EXPECT_GT(removed, 0u);
  fs::remove_all(dir);
}

TEST(Service, BindAddressParsing) {
  EXPECT_EQ(parse_bind_address("0.0.0.0:9000"), std::make_pair(std::string("0.0.0.0"), 9000));
  EXPECT_EQ(parse_bind_address("8081"), std::make_pair(std::string("127.0.0.1"), 8081));
  EXPECT_THROW(parse_bind_address("host:notaport"), Error);
  EXPECT_THROW(parse_bind_address("host:70000"), Error);
}

TEST(Service, LiveHttpRoundTrip) {
  Service svc;
  const int port = svc.bind_to_any_port("127.0.0.1");
  ASSERT_GT(port, 0);
  std::thread server([&] { svc.listen_after_bind(); });
  svc.wait_until_ready();

  httplib::Client client("127.0.0.1", port);
  auto health = client.Get("/healthz");
  ASSERT_TRUE(health);
  EXPECT_EQ(health->status, 503);

  svc.set_pipeline(default_pipeline());
  health = client.Get("/healthz");
  ASSERT_TRUE(health);
  EXPECT_EQ(health->status, 200);
  const auto res = client.Post("/v1/clean", clean_body(fixture("news_page.html"), "news"), "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  EXPECT_EQ(json::parse(res->body), json::parse(fixture("news_page.response.json")));
  const auto big = client.Post("/v1/clean", std::string(3 * 1024 * 1024, 'x'), "application/json");
  ASSERT_TRUE(big);
  EXPECT_EQ(big->status, 413);
  const auto stats = client.Get("/stats");
  ASSERT_TRUE(stats);
  EXPECT_EQ(json::parse(stats->body)["docs_processed"], 1);

  svc.stop();
  server.join();
}
