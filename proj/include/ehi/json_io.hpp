#pragma once

#include "ehi/entities.hpp"
#include "ehi/metric.hpp"

#include <json.hpp>

#include <string>

namespace ehi {

using Json = nlohmann::ordered_json;

/// Flat object: ehi, ph, ef, nh, of, lf, entity_precision, entity_recall,
/// entity_f1, grounded_keys, hallucinated_keys, omitted_important_keys,
/// reference_used.
Json report_to_json(const EhiReport& report);

/// Inverse of report_to_json. Throws nlohmann::json::exception on schema mismatch.
EhiReport report_from_json(const Json& j);

Json mentions_to_json(const EntitySet& set);

/// Applies the recognised keys of a flat config object to `config`:
/// of_repeat_cap, lf_importance_threshold, reference_mode
/// ("with_reference" | "reference_free"), heuristics_enabled, formula
/// ("shifted" | "literal"). Returns false and fills `error` on a bad value.
bool apply_metric_config(const Json& j, MetricConfig& config, std::string& error);

/// Serializes with invalid UTF-8 replaced, so output is always valid JSON.
std::string dump_line(const Json& j);

} // namespace ehi
