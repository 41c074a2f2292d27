#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sore/core.hpp"
#include "sore/errors.hpp"

namespace sore {

// Per-request knobs. Embedding and index settings are fixed per pipeline.
struct ConfigOverrides {
  std::optional<double> core_fraction_k;
  std::optional<double> distance_cutoff_d;
  std::optional<double> outlier_match_cutoff;
  std::optional<double> max_removal_fraction;
  std::optional<bool> include_metadata_in_core_anchors;

  CleanConfig apply(CleanConfig base) const;
};

struct CleanRequest {
  std::string html;
  std::optional<std::string> doc_id;
  ConfigOverrides config_overrides;
};

// Throws InvalidArgument on a wrong shape, unknown override keys or
// mistyped fields.
CleanRequest parse_clean_request(const nlohmann::json& body);

// Kept segment texts joined by a blank line.
std::string cleaned_text(const CleanResult& result);

struct ResponseOptions {
  // Wall-clock timing breaks byte-for-byte reproducibility, so it is opt-in.
  bool include_timing = false;
  bool include_decisions = true;
};

nlohmann::ordered_json clean_response_json(const CleanResult& result,
                                           const std::optional<std::string>& doc_id,
                                           const ResponseOptions& options = {});

nlohmann::ordered_json decision_json(const RemovalDecision& decision);

// One JSON object per decision, each serialized on a single line.
std::vector<std::string> decision_log_lines(const CleanResult& result,
                                            const std::optional<std::string>& doc_id);

nlohmann::ordered_json error_json(ErrorKind kind, const std::string& message);

// The single cleaning entry point shared by the CLI and the service.
struct CleanOutcome {
  CleanResult result;
  nlohmann::ordered_json response;
};

CleanOutcome run_clean(const Pipeline& pipeline, const CleanRequest& request,
                       const ResponseOptions& options = {});

}  // namespace sore
