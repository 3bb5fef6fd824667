#include "ehi/metric.hpp"

#include "ehi/error.hpp"

#include <algorithm>
#include <cmath>

namespace ehi {

bool EhiComponents::valid() const noexcept {
    for (double x : {ph, ef, nh, of, lf}) {
        if (!std::isfinite(x) || x < 0.0) return false;
    }
    return true;
}

void MetricConfig::validate() const {
    if (of_repeat_cap < 1) throw Error(ErrorCode::InvalidConfig, "of_repeat_cap must be >= 1");
    if (lf_importance_threshold < 1) {
        throw Error(ErrorCode::InvalidConfig, "lf_importance_threshold must be >= 1");
    }
}

EhiComponents compute_components(const EntitySet& source, const EntitySet& summary,
                                  const EntitySet* reference, const MetricConfig& config) {
    const bool use_ref = reference != nullptr && config.reference_mode == ReferenceMode::WithReference;
    EhiComponents c;

    for (const auto& [key, n] : summary.counts()) {
        if (source.contains(key)) {
            c.ef += 1.0;
        } else if (use_ref && reference->contains(key)) {
            c.ph += 1.0;
        } else {
            c.nh += 1.0;
        }
        if (n > config.of_repeat_cap) c.of += static_cast<double>(n - config.of_repeat_cap);
    }
    for (const auto& [key, n] : source.counts()) {
        if (n >= config.lf_importance_threshold && !summary.contains(key)) c.lf += 1.0;
    }
    return c;
}

double ehi_from_components(const EhiComponents& c, EhiFormula formula) {
    const double m = std::max({c.ph, c.ef, c.nh, c.of, c.lf});

    if (formula == EhiFormula::Literal) {
        auto t = [m](double x) { return std::exp(x - m); };
        const double good = t(c.ph) + t(c.ef);
        return good / (good + t(c.nh) + t(c.of) + t(c.lf));
    }

    double good = 0.0;
    double bad = 0.0;
    if (m < 700.0) {
        good = std::expm1(c.ph) + std::expm1(c.ef);
        bad = std::expm1(c.nh) + std::expm1(c.of) + std::expm1(c.lf);
    } else {
        // exp(x) - 1 scaled by exp(-m) to stay finite.
        const double shift = std::exp(-m);
        auto t = [m, shift](double x) { return std::exp(x - m) - shift; };
        good = t(c.ph) + t(c.ef);
        bad = t(c.nh) + t(c.of) + t(c.lf);
    }
    if (good + bad == 0.0) return 1.0;
    return good / (good + bad);
}

EntityPrf entity_f1(const EntitySet& reference, const EntitySet& generated) {
    const std::size_t n_ref = reference.distinct_size();
    const std::size_t n_gen = generated.distinct_size();
    if (n_ref == 0 && n_gen == 0) return {1.0, 1.0, 1.0};
    if (n_ref == 0 || n_gen == 0) return {0.0, 0.0, 0.0};

    std::size_t overlap = 0;
    for (const auto& [key, n] : generated.counts()) {
        if (reference.contains(key)) ++overlap;
    }
    EntityPrf prf;
    prf.precision = static_cast<double>(overlap) / static_cast<double>(n_gen);
    prf.recall = static_cast<double>(overlap) / static_cast<double>(n_ref);
    const double denom = prf.precision + prf.recall;
    prf.f1 = denom > 0.0 ? 2.0 * prf.precision * prf.recall / denom : 0.0;
    return prf;
}

EhiReport score_entities(const EntitySet& source, const EntitySet& summary,
                         const EntitySet* reference, const MetricConfig& config) {
    config.validate();
    const bool use_ref = reference != nullptr && config.reference_mode == ReferenceMode::WithReference;
    const EntitySet* ref = use_ref ? reference : nullptr;

    EhiReport report;
    report.components = compute_components(source, summary, ref, config);
    report.ehi = ehi_from_components(report.components, config.formula);
    report.reference_used = use_ref;

    const auto prf = entity_f1(use_ref ? *reference : source, summary);
    report.entity_precision = prf.precision;
    report.entity_recall = prf.recall;
    report.entity_f1 = prf.f1;

    for (const auto& [key, n] : summary.counts()) {
        if (source.contains(key)) {
            report.grounded_keys.push_back(key);
        } else if (ref == nullptr || !ref->contains(key)) {
            report.hallucinated_keys.push_back(key);
        }
    }
    for (const auto& [key, n] : source.counts()) {
        if (n >= config.lf_importance_threshold && !summary.contains(key)) {
            report.omitted_important_keys.push_back(key);
        }
    }
    return report;
}

EhiReport score_pair(std::string_view source, std::string_view summary,
                     std::optional<std::string_view> reference, const EntityExtractor& extractor,
                     const MetricConfig& config) {
    auto sets = entity_sets_for_pair(source, summary, reference, extractor);
    return score_entities(sets.source, sets.summary,
                          sets.reference ? &*sets.reference : nullptr, config);
}

EhiReport score_pair(std::string_view source, std::string_view summary,
                     std::optional<std::string_view> reference, const Gazetteer& gazetteer,
                     const MetricConfig& config) {
    return score_pair(source, summary, reference,
                      GazetteerExtractor(gazetteer, config.heuristics_enabled), config);
}

} // namespace ehi
