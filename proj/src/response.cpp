#include "sore/response.hpp"

namespace sore {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

[[noreturn]] void bad_request(const std::string& what) { throw Error(ErrorKind::InvalidArgument, what); }

std::optional<double> number_field(const json& obj, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_number()) bad_request(std::string("config_overrides.") + key + " must be a number");
  return it->get<double>();
}

ordered_json optional_string(const std::optional<std::string>& s) {
  return s ? ordered_json(*s) : ordered_json(nullptr);
}

}  // namespace

CleanConfig ConfigOverrides::apply(CleanConfig base) const {
  if (core_fraction_k) base.core_fraction_k = *core_fraction_k;
  if (distance_cutoff_d) base.distance_cutoff_d = *distance_cutoff_d;
  if (outlier_match_cutoff) base.outlier_match_cutoff = *outlier_match_cutoff;
  if (max_removal_fraction) base.max_removal_fraction = *max_removal_fraction;
  if (include_metadata_in_core_anchors) {
    base.include_metadata_in_core_anchors = *include_metadata_in_core_anchors;
  }
  return base;
}

CleanRequest parse_clean_request(const json& body) {
  if (!body.is_object()) bad_request("request body must be a JSON object");
  CleanRequest req;

  const auto html = body.find("html");
  if (html == body.end() || !html->is_string()) bad_request("field \"html\" must be a string");
  req.html = html->get<std::string>();

  if (const auto id = body.find("doc_id"); id != body.end() && !id->is_null()) {
    if (!id->is_string()) bad_request("field \"doc_id\" must be a string");
    req.doc_id = id->get<std::string>();
  }

  if (const auto ov = body.find("config_overrides"); ov != body.end() && !ov->is_null()) {
    if (!ov->is_object()) bad_request("field \"config_overrides\" must be an object");
    for (const auto& [key, value] : ov->items()) {
      (void)value;
      if (key != "core_fraction_k" && key != "distance_cutoff_d" && key != "outlier_match_cutoff" &&
          key != "max_removal_fraction" && key != "include_metadata_in_core_anchors") {
        bad_request("unsupported config override \"" + key + "\"");
      }
    }
    auto& o = req.config_overrides;
    o.core_fraction_k = number_field(*ov, "core_fraction_k");
    o.distance_cutoff_d = number_field(*ov, "distance_cutoff_d");
    o.outlier_match_cutoff = number_field(*ov, "outlier_match_cutoff");
    o.max_removal_fraction = number_field(*ov, "max_removal_fraction");
    if (const auto it = ov->find("include_metadata_in_core_anchors"); it != ov->end() && !it->is_null()) {
      if (!it->is_boolean()) bad_request("config_overrides.include_metadata_in_core_anchors must be a boolean");
      o.include_metadata_in_core_anchors = it->get<bool>();
    }
  }
  return req;
}

std::string cleaned_text(const CleanResult& result) {
  std::string out;
  for (const auto& s : result.kept_segments) {
    if (!out.empty()) out += "\n\n";
    out += s.text;
  }
  return out;
}

ordered_json decision_json(const RemovalDecision& d) {
  ordered_json j;
  j["segment_id"] = d.segment_id;
  j["verdict"] = verdict_name(d.verdict);
  j["reason"] = optional_string(d.reason);
  j["d_core"] = d.d_core;
  j["d_outlier"] = d.d_outlier;
  j["nearest_phrase"] = optional_string(d.nearest_phrase);
  return j;
}

ordered_json clean_response_json(const CleanResult& result, const std::optional<std::string>& doc_id,
                                 const ResponseOptions& options) {
  ordered_json j;
  j["doc_id"] = optional_string(doc_id);
  j["cleaned_text"] = cleaned_text(result);

  ordered_json removed = ordered_json::array();
  for (const auto& d : result.decisions) {
    if (!is_removed(d.verdict)) continue;
    ordered_json r;
    r["segment_id"] = d.segment_id;
    r["text"] = result.segments[d.segment_id].text;
    r["reason"] = optional_string(d.reason);
    r["d_core"] = d.d_core;
    r["d_outlier"] = d.d_outlier;
    removed.push_back(std::move(r));
  }
  j["removed"] = std::move(removed);
  j["fallback_applied"] = result.fallback_applied;

  ordered_json stats;
  stats["n_segments"] = result.stats.n_segments;
  stats["n_removed"] = result.stats.n_removed;
  stats["removed_char_fraction"] = result.stats.removed_char_fraction;
  stats["attempted_removal_fraction"] = result.stats.attempted_removal_fraction;
  stats["n_truncated"] = result.stats.n_truncated;
  if (options.include_timing) stats["elapsed_ms"] = result.stats.elapsed_ms;
  j["stats"] = std::move(stats);

  if (options.include_decisions) {
    ordered_json decisions = ordered_json::array();
    for (const auto& d : result.decisions) decisions.push_back(decision_json(d));
    j["decisions"] = std::move(decisions);
  }
  return j;
}

std::vector<std::string> decision_log_lines(const CleanResult& result,
                                            const std::optional<std::string>& doc_id) {
  std::vector<std::string> lines;
  lines.reserve(result.decisions.size());
  for (const auto& d : result.decisions) {
    ordered_json j;
    j["doc_id"] = optional_string(doc_id);
    j["fallback_applied"] = result.fallback_applied;
    const ordered_json fields = decision_json(d);
    for (const auto& [key, value] : fields.items()) j[key] = value;
    j["text"] = result.segments[d.segment_id].text;
    // Replace invalid UTF-8 rather than throwing; segment text is already sanitized.
    lines.push_back(j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace));
  }
  return lines;
}

ordered_json error_json(ErrorKind kind, const std::string& message) {
  ordered_json j;
  j["error"] = error_kind_name(kind);
  j["message"] = message;
  return j;
}

CleanOutcome run_clean(const Pipeline& pipeline, const CleanRequest& request,
                       const ResponseOptions& options) {
  const CleanConfig knobs = request.config_overrides.apply(pipeline.config());
  CleanOutcome out{pipeline.clean(request.html, knobs), {}};
  out.response = clean_response_json(out.result, request.doc_id, options);
  return out;
}

}  // namespace sore
