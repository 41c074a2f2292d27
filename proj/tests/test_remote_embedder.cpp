#include "sore/errors.hpp"
#include "sore/remote_embedder.hpp"

#include <gtest/gtest.h>
#include <httplib.h>
#include <json.hpp>

#include <atomic>
#include <thread>

using namespace sore;
using nlohmann::json;

namespace {

// In-process embedding server. `fail_first` requests answer with
// `fail_status`; `dim_override` forces a wrong vector length.
class FakeEmbeddingServer {
 public:
  FakeEmbeddingServer(int fail_first, int fail_status, std::size_t dim_override = 0)
      : fail_first_(fail_first), fail_status_(fail_status), dim_override_(dim_override) {
    server_.Post("/v1/embed", [this](const httplib::Request& req, httplib::Response& res) {
      ++requests;
      last_auth = req.get_header_value("Authorization");
      if (requests <= fail_first_) {
        res.status = fail_status_;
        return;
      }
      const auto body = json::parse(req.body);
      const std::size_t dim = dim_override_ ? dim_override_ : body["dim"].get<std::size_t>();
      json vectors = json::array();
      for (std::size_t i = 0; i < body["texts"].size(); ++i) {
        std::vector<double> v(dim, 0.0);
        v[i % dim] = 3.0;  // not unit length; the client normalizes
        vectors.push_back(v);
      }
      res.set_content(json{{"vectors", vectors}}.dump(), "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeEmbeddingServer() {
    server_.stop();
    thread_.join();
  }

  std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1/embed"; }

  std::atomic<int> requests{0};
  std::string last_auth;

 private:
  int fail_first_;
  int fail_status_;
  std::size_t dim_override_;
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

EmbedderConfig remote_config(const std::string& endpoint) {
  EmbedderConfig c;
  c.provider = ProviderKind::Remote;
  c.remote_endpoint = endpoint;
  c.remote_auth = "token-123";
  c.dim = 8;
  c.max_retries = 3;
  c.retry_backoff_ms = 1;
  c.timeout_ms = 2000;
  return c;
}

const std::vector<std::string> kTexts = {"first text", "second text"};

}  // namespace

TEST(RemoteEmbedder, ReturnsNormalizedVectorsAndSendsAuth) {
  FakeEmbeddingServer server(0, 500);
  RemoteEmbedder e(remote_config(server.endpoint()));
  const auto out = e.embed_batch(kTexts);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_NEAR(out[0].norm(), 1.0, 1e-6);
  EXPECT_FLOAT_EQ(out[1][1], 1.0f);
  EXPECT_EQ(server.last_auth, "Bearer token-123");
  EXPECT_TRUE(e.healthy());
}

TEST(RemoteEmbedder, RetriesServerErrorsThenSucceeds) {
  FakeEmbeddingServer server(2, 503);
  RemoteEmbedder e(remote_config(server.endpoint()));
  EXPECT_EQ(e.embed_batch(kTexts).size(), 2u);
  EXPECT_EQ(server.requests.load(), 3);
}

TEST(RemoteEmbedder, RetriesRateLimits) {
  FakeEmbeddingServer server(1, 429);
  RemoteEmbedder e(remote_config(server.endpoint()));
  EXPECT_EQ(e.embed_batch(kTexts).size(), 2u);
  EXPECT_EQ(server.requests.load(), 2);
}

TEST(RemoteEmbedder, GivesUpAfterMaxRetries) {
  FakeEmbeddingServer server(100, 500);
  RemoteEmbedder e(remote_config(server.endpoint()));
  try {
    e.embed_batch(kTexts);
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.kind(), ErrorKind::ProviderUnavailable);
  }
  EXPECT_EQ(server.requests.load(), 4);
}

TEST(RemoteEmbedder, ClientErrorsAreNotRetried) {
  FakeEmbeddingServer server(100, 401);
  RemoteEmbedder e(remote_config(server.endpoint()));
  EXPECT_THROW(e.embed_batch(kTexts), Error);
  EXPECT_EQ(server.requests.load(), 1);
}

TEST(RemoteEmbedder, WrongDimensionIsReported) {
  FakeEmbeddingServer server(0, 500, 5);
  RemoteEmbedder e(remote_config(server.endpoint()));
  try {
    e.embed_batch(kTexts);
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.kind(), ErrorKind::DimensionMismatch);
  }
}

TEST(RemoteEmbedder, UnreachableEndpointIsUnavailable) {
  auto c = remote_config("http://127.0.0.1:1/v1/embed");
  c.max_retries = 1;
  RemoteEmbedder e(c);
  try {
    e.embed_batch(kTexts);
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.kind(), ErrorKind::ProviderUnavailable);
  }
  EXPECT_FALSE(e.healthy());
}

TEST(RemoteEmbedder, RejectsUnsupportedScheme) {
  EXPECT_THROW(RemoteEmbedder(remote_config("https://example.invalid/embed")), Error);
  EXPECT_THROW(RemoteEmbedder(remote_config("not a url")), Error);
}
