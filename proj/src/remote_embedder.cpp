#include "sore/remote_embedder.hpp"

#include "sore/errors.hpp"

#include <httplib.h>
#include <json.hpp>

#include <chrono>
#include <thread>

namespace sore {

namespace {

using nlohmann::json;

struct ParsedUrl {
  std::string base;
  std::string path;
};

ParsedUrl split_url(const std::string& url) {
  auto scheme = url.find("://");
  if (scheme == std::string::npos) {
    throw Error(ErrorKind::InvalidArgument, "embedding endpoint must be an absolute URL: " + url);
  }
  if (url.compare(0, scheme, "http") != 0) {
    throw Error(ErrorKind::InvalidArgument, "only http:// embedding endpoints are supported");
  }
  auto slash = url.find('/', scheme + 3);
  if (slash == std::string::npos) return {url, "/"};
  return {url.substr(0, slash), url.substr(slash)};
}

bool retryable(int status) { return status == 429 || status >= 500; }

}  // namespace

RemoteEmbedder::RemoteEmbedder(EmbedderConfig config) : config_(std::move(config)) {
  auto url = split_url(config_.remote_endpoint);
  base_url_ = std::move(url.base);
  path_ = std::move(url.path);
}

std::vector<EmbeddingVector> RemoteEmbedder::embed_batch(std::span<const std::string> texts) const {
  return call(texts, config_.max_retries);
}

bool RemoteEmbedder::healthy() const {
  try {
    const std::string probe[] = {"health check"};
    call(probe, 0);
    return true;
  } catch (const Error&) {
    return false;
  }
}

std::vector<EmbeddingVector> RemoteEmbedder::call(std::span<const std::string> texts,
                                                  int max_retries) const {
  json request = {{"texts", json::array()}, {"dim", config_.dim}};
  for (const auto& t : texts) request["texts"].push_back(t);
  const std::string body = request.dump();

  httplib::Headers headers;
  if (!config_.remote_auth.empty()) {
    headers.emplace("Authorization", "Bearer " + config_.remote_auth);
  }

  std::string last_error;
  for (int attempt = 0; attempt <= max_retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(
          std::chrono::milliseconds(static_cast<long>(config_.retry_backoff_ms) << (attempt - 1)));
    }
    httplib::Client client(base_url_);
    const auto timeout = std::chrono::milliseconds(config_.timeout_ms);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);

    auto res = client.Post(path_, headers, body, "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status != 200) {
      last_error = "HTTP " + std::to_string(res->status);
      if (retryable(res->status)) continue;
      break;
    }

    json payload = json::parse(res->body, nullptr, false);
    if (payload.is_discarded() || !payload.contains("vectors") || !payload["vectors"].is_array()) {
      last_error = "malformed response body";
      continue;
    }
    const auto& vectors = payload["vectors"];
    if (vectors.size() != texts.size()) {
      throw Error(ErrorKind::ProviderUnavailable,
                  "provider returned " + std::to_string(vectors.size()) + " vectors for " +
                      std::to_string(texts.size()) + " texts");
    }
    std::vector<EmbeddingVector> out;
    out.reserve(vectors.size());
    for (const auto& v : vectors) {
      if (!v.is_array() || v.size() != config_.dim) {
        throw Error(ErrorKind::DimensionMismatch,
                    "remote vector has dim " + std::to_string(v.is_array() ? v.size() : 0) +
                        ", expected " + std::to_string(config_.dim));
      }
      std::vector<double> values;
      values.reserve(v.size());
      for (const auto& x : v) {
        if (!x.is_number()) throw Error(ErrorKind::ProviderUnavailable, "non-numeric vector component");
        values.push_back(x.get<double>());
      }
      try {
        out.push_back(EmbeddingVector::normalized(values));
      } catch (const Error& e) {
        throw Error(ErrorKind::ProviderUnavailable, std::string("invalid remote vector: ") + e.what());
      }
    }
    return out;
  }
  throw Error(ErrorKind::ProviderUnavailable,
              "embedding provider unavailable after " + std::to_string(max_retries + 1) +
                  " attempt(s): " + last_error);
}

}  // namespace sore
