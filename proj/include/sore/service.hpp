#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <mutex>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "sore/core.hpp"

namespace sore {

// Append-only JSONL sink. One writer at a time; every document's lines are
// flushed together, so a crash loses at most the document being written.
class DecisionLogSink {
 public:
  explicit DecisionLogSink(const std::string& path);

  void write_document(const std::vector<std::string>& lines);

 private:
  std::mutex mutex_;
  std::ofstream out_;
};

struct ServiceOptions {
  std::string log_path;                         // empty disables decision logging
  std::size_t max_body_bytes = 2 * 1024 * 1024;
  std::size_t worker_threads = 8;
  std::size_t batch_threads = 4;
};

struct HttpReply {
  int status = 200;
  std::string body;  // JSON
};

// Splits "host:port"; a bare port binds 127.0.0.1. Throws InvalidArgument.
std::pair<std::string, int> parse_bind_address(std::string_view bind);

// HTTP front end over a shared Pipeline.
//
//   POST /v1/clean        CleanRequest -> CleanResponse
//   POST /v1/clean/batch  [CleanRequest, ...] -> [CleanResponse | error, ...]
//   GET  /healthz         200 once a pipeline is installed and its embedder answers
//   GET  /stats           counters, removal-rate histogram, latency percentiles
//
// `handle` is the transport-free core and is what the socket server calls.
class Service {
 public:
  explicit Service(ServiceOptions options = {});
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  // Until this is called /healthz reports 503 and cleaning requests fail with 503.
  void set_pipeline(std::shared_ptr<const Pipeline> pipeline);

  HttpReply handle(std::string_view method, std::string_view path, std::string_view body);

  nlohmann::ordered_json stats_json() const;

  // Blocking; returns false when the socket cannot be bound.
  bool listen(const std::string& host, int port);
  // Binds an ephemeral port and returns it (or -1); pair with listen_after_bind.
  int bind_to_any_port(const std::string& host);
  bool listen_after_bind();
  void wait_until_ready() const;
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace sore
