#include "sore/service.hpp"

#include "sore/errors.hpp"
#include "sore/response.hpp"
#include "parallel.hpp"

#include <httplib.h>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <deque>

namespace sore {

using nlohmann::json;
using nlohmann::ordered_json;

DecisionLogSink::DecisionLogSink(const std::string& path) : out_(path, std::ios::app | std::ios::binary) {
  if (!out_) throw Error(ErrorKind::InvalidArgument, "cannot open decision log " + path);
}

void DecisionLogSink::write_document(const std::vector<std::string>& lines) {
  std::lock_guard lock(mutex_);
  for (const auto& l : lines) out_ << l << '\n';
  out_.flush();
}

std::pair<std::string, int> parse_bind_address(std::string_view bind) {
  std::string host = "127.0.0.1";
  std::string_view port_text = bind;
  if (const auto colon = bind.rfind(':'); colon != std::string_view::npos) {
    host = std::string(bind.substr(0, colon));
    port_text = bind.substr(colon + 1);
    if (host.empty()) host = "0.0.0.0";
  }
  int port = 0;
  for (char c : port_text) {
    if (c < '0' || c > '9' || port > 65535) port = -1;
    if (port < 0) break;
    port = port * 10 + (c - '0');
  }
  if (port_text.empty() || port <= 0 || port > 65535) {
    throw Error(ErrorKind::InvalidArgument, "invalid bind address: " + std::string(bind));
  }
  return {host, port};
}

namespace {

constexpr std::size_t kLatencyWindow = 4096;
constexpr std::size_t kHistogramBins = 10;

int status_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument:
    case ErrorKind::ConfigParse: return 400;
    case ErrorKind::EmptyDocument:
    case ErrorKind::TextTooShort: return 422;
    case ErrorKind::ProviderUnavailable:
    case ErrorKind::DimensionMismatch: return 503;
    case ErrorKind::CorruptIndex: return 500;
  }
  return 500;
}

HttpReply reply(int status, const ordered_json& body) {
  return {status, body.dump(-1, ' ', false, json::error_handler_t::replace)};
}

HttpReply error_reply(ErrorKind kind, const std::string& message) {
  return reply(status_for(kind), error_json(kind, message));
}

double percentile(std::vector<double> xs, double q) {
  if (xs.empty()) return 0.0;
  // Nearest-rank.
  const auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(xs.size())));
  const std::size_t idx = rank == 0 ? 0 : rank - 1;
  std::nth_element(xs.begin(), xs.begin() + static_cast<std::ptrdiff_t>(idx), xs.end());
  return xs[idx];
}

}  // namespace

struct Service::Impl {
  explicit Impl(ServiceOptions o) : options(std::move(o)) {
    if (!options.log_path.empty()) sink = std::make_unique<DecisionLogSink>(options.log_path);
    server.set_payload_max_length(options.max_body_bytes);
    const std::size_t workers = std::max<std::size_t>(1, options.worker_threads);
    server.new_task_queue = [workers] { return new httplib::ThreadPool(workers); };
  }

  std::shared_ptr<const Pipeline> current() const {
    std::lock_guard lock(pipeline_mutex);
    return pipeline;
  }

  void record(const CleanResult& r, double latency_ms) {
    std::lock_guard lock(stats_mutex);
    ++docs_processed;
    if (r.fallback_applied) ++fallback_count;
    const auto bin = std::min<std::size_t>(
        kHistogramBins - 1, static_cast<std::size_t>(r.stats.removed_char_fraction * kHistogramBins));
    ++histogram[bin];
    latencies.push_back(latency_ms);
    if (latencies.size() > kLatencyWindow) latencies.pop_front();
  }

  void record_failure() {
    std::lock_guard lock(stats_mutex);
    ++docs_failed;
  }

  // Cleans one request; the result or the error is returned as JSON plus status.
  HttpReply clean_one(const Pipeline& p, const json& item) {
    try {
      const auto request = parse_clean_request(item);
      const auto start = std::chrono::steady_clock::now();
      auto outcome = run_clean(p, request);
      const double ms =
          std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
      if (sink) sink->write_document(decision_log_lines(outcome.result, request.doc_id));
      record(outcome.result, ms);
      return reply(200, outcome.response);
    } catch (const Error& e) {
      record_failure();
      return error_reply(e.kind(), e.what());
    }
  }

  HttpReply clean(std::string_view body) {
    const auto p = current();
    if (!p) return error_reply(ErrorKind::ProviderUnavailable, "pipeline is still loading");
    const json parsed = json::parse(body, nullptr, false);
    if (parsed.is_discarded()) return error_reply(ErrorKind::InvalidArgument, "malformed JSON body");
    return clean_one(*p, parsed);
  }

  HttpReply clean_batch(std::string_view body) {
    const auto p = current();
    if (!p) return error_reply(ErrorKind::ProviderUnavailable, "pipeline is still loading");
    const json parsed = json::parse(body, nullptr, false);
    if (parsed.is_discarded()) return error_reply(ErrorKind::InvalidArgument, "malformed JSON body");
    const json* items = &parsed;
    if (parsed.is_object() && parsed.contains("items")) items = &parsed["items"];
    if (!items->is_array()) return error_reply(ErrorKind::InvalidArgument, "batch body must be a JSON array");

    std::vector<std::string> outputs(items->size());
    detail::parallel_for(items->size(), options.batch_threads,
                         [&](std::size_t i) { outputs[i] = clean_one(*p, (*items)[i]).body; });
    std::string out = "[";
    for (std::size_t i = 0; i < outputs.size(); ++i) {
      if (i > 0) out += ',';
      out += outputs[i];
    }
    out += ']';
    return {200, out};
  }

  HttpReply healthz() const {
    const auto p = current();
    ordered_json j;
    if (!p) {
      j["status"] = "loading";
      return reply(503, j);
    }
    if (!p->provider().healthy()) {
      j["status"] = "embedder_unavailable";
      return reply(503, j);
    }
    j["status"] = "ok";
    j["embedder"] = p->provider().name();
    j["index_points"] = p->outlier_index().size();
    return reply(200, j);
  }

  ordered_json stats() const {
    std::lock_guard lock(stats_mutex);
    ordered_json j;
    j["docs_processed"] = docs_processed;
    j["docs_failed"] = docs_failed;
    j["fallback_count"] = fallback_count;
    ordered_json hist = ordered_json::array();
    for (std::size_t b = 0; b < kHistogramBins; ++b) {
      ordered_json bin;
      bin["lower"] = static_cast<double>(b) / kHistogramBins;
      bin["upper"] = static_cast<double>(b + 1) / kHistogramBins;
      bin["count"] = histogram[b];
      hist.push_back(std::move(bin));
    }
    j["removal_rate_histogram"] = std::move(hist);
    const std::vector<double> window(latencies.begin(), latencies.end());
    j["latency_ms"] = {{"p50", percentile(window, 0.50)}, {"p99", percentile(window, 0.99)},
                       {"samples", window.size()}};
    return j;
  }

  ServiceOptions options;
  std::unique_ptr<DecisionLogSink> sink;
  httplib::Server server;

  mutable std::mutex pipeline_mutex;
  std::shared_ptr<const Pipeline> pipeline;

  mutable std::mutex stats_mutex;
  std::size_t docs_processed = 0;
  std::size_t docs_failed = 0;
  std::size_t fallback_count = 0;
  std::array<std::size_t, kHistogramBins> histogram{};
  std::deque<double> latencies;
};

Service::Service(ServiceOptions options) : impl_(std::make_unique<Impl>(std::move(options))) {
  auto route = [this](const char* method) {
    return [this, method](const httplib::Request& req, httplib::Response& res) {
      const auto r = handle(method, req.path, req.body);
      res.status = r.status;
      res.set_content(r.body, "application/json");
    };
  };
  auto& s = impl_->server;
  s.Post("/v1/clean", route("POST"));
  s.Post("/v1/clean/batch", route("POST"));
  s.Get("/healthz", route("GET"));
  s.Get("/stats", route("GET"));
}

Service::~Service() { stop(); }

void Service::set_pipeline(std::shared_ptr<const Pipeline> pipeline) {
  std::lock_guard lock(impl_->pipeline_mutex);
  impl_->pipeline = std::move(pipeline);
}

HttpReply Service::handle(std::string_view method, std::string_view path, std::string_view body) {
  if (body.size() > impl_->options.max_body_bytes) {
    return reply(413, error_json(ErrorKind::InvalidArgument, "request body exceeds size limit"));
  }
  if (method == "POST" && path == "/v1/clean") return impl_->clean(body);
  if (method == "POST" && path == "/v1/clean/batch") return impl_->clean_batch(body);
  if (method == "GET" && path == "/healthz") return impl_->healthz();
  if (method == "GET" && path == "/stats") return reply(200, impl_->stats());
  return reply(404, error_json(ErrorKind::InvalidArgument, "no route for " + std::string(method) + " " +
                                                               std::string(path)));
}

ordered_json Service::stats_json() const { return impl_->stats(); }

bool Service::listen(const std::string& host, int port) { return impl_->server.listen(host, port); }

int Service::bind_to_any_port(const std::string& host) { return impl_->server.bind_to_any_port(host); }

bool Service::listen_after_bind() { return impl_->server.listen_after_bind(); }

void Service::wait_until_ready() const { impl_->server.wait_until_ready(); }

void Service::stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

}  // namespace sore
