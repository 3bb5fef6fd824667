#pragma once

#include "ehi/entities.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ehi {

/// The five per-summary entity scores. Positive terms: ph, ef. Error terms:
/// nh, of, lf. All are non-negative and finite.
struct EhiComponents {
    double ph = 0.0; // summary-only entities confirmed by the reference
    double ef = 0.0; // summary entities grounded in the source
    double nh = 0.0; // summary entities grounded in neither source nor reference
    double of = 0.0; // summary mentions beyond the per-entity repeat cap
    double lf = 0.0; // important source entities missing from the summary

    bool valid() const noexcept;
    bool operator==(const EhiComponents&) const = default;
};

enum class ReferenceMode { WithReference, ReferenceFree };

/// How the exponential terms are shaped.
///  Shifted: each term is exp(x) - 1, so an absent component contributes 0
///           and a summary with no error terms scores exactly 1.
///  Literal: each term is exp(x); kept for comparison only.
enum class EhiFormula { Shifted, Literal };

struct MetricConfig {
    std::size_t of_repeat_cap = 2;          // K
    std::size_t lf_importance_threshold = 2; // tau
    ReferenceMode reference_mode = ReferenceMode::WithReference;
    bool heuristics_enabled = true;
    EhiFormula formula = EhiFormula::Shifted;

    /// Throws Error(InvalidConfig) when K or tau is zero.
    void validate() const;
};

struct EntityPrf {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    bool operator==(const EntityPrf&) const = default;
};

struct EhiReport {
    double ehi = 1.0;
    EhiComponents components;
    double entity_precision = 0.0;
    double entity_recall = 0.0;
    double entity_f1 = 0.0;
    std::vector<std::string> grounded_keys;          // summary keys found in the source
    std::vector<std::string> hallucinated_keys;      // summary keys outside source and reference
    std::vector<std::string> omitted_important_keys; // keys counted by lf
    bool reference_used = false;

    bool operator==(const EhiReport&) const = default;
};

EhiComponents compute_components(const EntitySet& source, const EntitySet& summary,
                                 const EntitySet* reference, const MetricConfig& config);

/// EHI from components. Under the shifted formula the all-zero tuple (0/0)
/// is defined as 1.
double ehi_from_components(const EhiComponents& c, EhiFormula formula = EhiFormula::Shifted);

/// Precision/recall/F1 of `generated` against `reference` on distinct keys.
/// Both empty -> (1,1,1); exactly one empty -> (0,0,0).
EntityPrf entity_f1(const EntitySet& reference, const EntitySet& generated);

/// Scores already-extracted entity sets. The reference, if given, feeds PH
/// and the F1 comparison; without it F1 is measured against the source.
EhiReport score_entities(const EntitySet& source, const EntitySet& summary,
                         const EntitySet* reference, const MetricConfig& config);

EhiReport score_pair(std::string_view source, std::string_view summary,
                     std::optional<std::string_view> reference, const Gazetteer& gazetteer,
                     const MetricConfig& config);

EhiReport score_pair(std::string_view source, std::string_view summary,
                     std::optional<std::string_view> reference, const EntityExtractor& extractor,
                     const MetricConfig& config);

} // namespace ehi
