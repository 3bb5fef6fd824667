#include "ehi/json_io.hpp"

namespace ehi {

Json report_to_json(const EhiReport& r) {
    Json j;
    j["ehi"] = r.ehi;
    j["ph"] = r.components.ph;
    j["ef"] = r.components.ef;
    j["nh"] = r.components.nh;
    j["of"] = r.components.of;
    j["lf"] = r.components.lf;
    j["entity_precision"] = r.entity_precision;
    j["entity_recall"] = r.entity_recall;
    j["entity_f1"] = r.entity_f1;
    j["grounded_keys"] = r.grounded_keys;
    j["hallucinated_keys"] = r.hallucinated_keys;
    j["omitted_important_keys"] = r.omitted_important_keys;
    j["reference_used"] = r.reference_used;
    return j;
}

EhiReport report_from_json(const Json& j) {
    EhiReport r;
    r.ehi = j.at("ehi").get<double>();
    r.components.ph = j.at("ph").get<double>();
    r.components.ef = j.at("ef").get<double>();
    r.components.nh = j.at("nh").get<double>();
    r.components.of = j.at("of").get<double>();
    r.components.lf = j.at("lf").get<double>();
    r.entity_precision = j.at("entity_precision").get<double>();
    r.entity_recall = j.at("entity_recall").get<double>();
    r.entity_f1 = j.at("entity_f1").get<double>();
    r.grounded_keys = j.at("grounded_keys").get<std::vector<std::string>>();
    r.hallucinated_keys = j.at("hallucinated_keys").get<std::vector<std::string>>();
    r.omitted_important_keys = j.at("omitted_important_keys").get<std::vector<std::string>>();
    r.reference_used = j.at("reference_used").get<bool>();
    return r;
}

Json mentions_to_json(const EntitySet& set) {
    Json out = Json::array();
    for (const auto& m : set.mentions()) {
        Json e;
        e["surface"] = m.surface;
        e["key"] = m.key;
        e["type"] = std::string(to_string(m.type));
        if (m.span) e["span"] = Json::array({m.span->first, m.span->last});
        out.push_back(std::move(e));
    }
    return out;
}

namespace {

bool read_count(const Json& j, const char* name, std::size_t& out, std::string& error) {
    if (!j.contains(name)) return true;
    const auto& v = j.at(name);
    if (!v.is_number_integer() || v.get<long long>() < 1) {
        error = std::string(name) + " must be a positive integer";
        return false;
    }
    out = v.get<std::size_t>();
    return true;
}

} // namespace

bool apply_metric_config(const Json& j, MetricConfig& config, std::string& error) {
    if (!j.is_object()) {
        error = "metric config must be a JSON object";
        return false;
    }
    if (!read_count(j, "of_repeat_cap", config.of_repeat_cap, error)) return false;
    if (!read_count(j, "lf_importance_threshold", config.lf_importance_threshold, error)) return false;
    if (j.contains("reference_mode")) {
        const auto& v = j.at("reference_mode");
        if (v == "with_reference") {
            config.reference_mode = ReferenceMode::WithReference;
        } else if (v == "reference_free") {
            config.reference_mode = ReferenceMode::ReferenceFree;
        } else {
            error = "reference_mode must be \"with_reference\" or \"reference_free\"";
            return false;
        }
    }
    if (j.contains("heuristics_enabled")) {
        if (!j.at("heuristics_enabled").is_boolean()) {
            error = "heuristics_enabled must be a boolean";
            return false;
        }
        config.heuristics_enabled = j.at("heuristics_enabled").get<bool>();
    }
    if (j.contains("formula")) {
        const auto& v = j.at("formula");
        if (v == "shifted") {
            config.formula = EhiFormula::Shifted;
        } else if (v == "literal") {
            config.formula = EhiFormula::Literal;
        } else {
            error = "formula must be \"shifted\" or \"literal\"";
            return false;
        }
    }
    return true;
}

std::string dump_line(const Json& j) {
    return j.dump(-1, ' ', false, Json::error_handler_t::replace);
}

} // namespace ehi
