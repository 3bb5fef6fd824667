#pragma once

#include "ehi/text.hpp"

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace ehi {

enum class EntityType { Person, Org, Loc, Event, Misc };

std::string_view to_string(EntityType type) noexcept;
std::optional<EntityType> parse_entity_type(std::string_view name) noexcept;

struct TokenSpan {
    std::size_t first = 0;
    std::size_t last = 0; // inclusive
    bool operator==(const TokenSpan&) const = default;
};

struct EntityMention {
    std::string surface;
    std::string key;
    EntityType type = EntityType::Misc;
    // Absent for mentions supplied pre-extracted rather than found in text.
    std::optional<TokenSpan> span;

    bool operator==(const EntityMention&) const = default;
};

/// Mentions found in one text plus per-key mention counts. Keys are kept in
/// a sorted map so iteration order (and everything serialized from it) is
/// deterministic.
class EntitySet {
public:
    EntitySet() = default;

    /// Builds a set from already-normalized or raw keys (e.g. produced by an
    /// external NER). Each entry is normalized; entries that normalize to
    /// nothing are dropped. Repeats count as repeated mentions.
    static EntitySet from_surfaces(std::span<const std::string> surfaces,
                                   const NormalizeOptions& opts = {});

    void add(EntityMention mention);

    const std::vector<EntityMention>& mentions() const noexcept { return mentions_; }
    const std::map<std::string, std::size_t>& counts() const noexcept { return counts_; }

    /// Sorted distinct keys.
    std::vector<std::string> distinct() const;

    bool contains(const std::string& key) const { return counts_.contains(key); }
    std::size_t count(const std::string& key) const;
    std::size_t distinct_size() const noexcept { return counts_.size(); }
    bool empty() const noexcept { return mentions_.empty(); }

    bool operator==(const EntitySet&) const = default;

private:
    std::vector<EntityMention> mentions_;
    std::map<std::string, std::size_t> counts_;
};

class Gazetteer {
public:
    explicit Gazetteer(NormalizeOptions opts = {}) : opts_(opts) {}

    /// Later additions of the same key overwrite earlier ones.
    /// Throws Error(NormalizesToEmpty) for an empty surface.
    void add(std::string_view surface, EntityType type);

    std::optional<EntityType> find(const std::string& key) const;

    std::size_t size() const noexcept { return entries_.size(); }
    bool empty() const noexcept { return entries_.empty(); }
    std::size_t max_entry_tokens() const noexcept { return max_entry_tokens_; }
    const std::unordered_map<std::string, EntityType>& entries() const noexcept { return entries_; }
    const NormalizeOptions& normalize_options() const noexcept { return opts_; }

    /// Sorted keys.
    std::vector<std::string> keys() const;

private:
    std::unordered_map<std::string, EntityType> entries_;
    std::size_t max_entry_tokens_ = 0;
    NormalizeOptions opts_;
};

/// Parses "surface<TAB>TYPE" lines. Blank lines and '#' comments are skipped.
/// Throws Error(GazetteerParse) carrying the 1-based line number.
Gazetteer load_gazetteer(std::istream& in, const NormalizeOptions& opts = {});
Gazetteer load_gazetteer_file(const std::filesystem::path& path, const NormalizeOptions& opts = {});

/// The gazetteer shipped with the library (also installed as data/gazetteer.tsv).
const Gazetteer& default_gazetteer();
std::string_view default_gazetteer_text() noexcept;

/// Sentence-initial capitalized words never reported by the capitalization
/// heuristic. Lowercase.
std::span<const std::string_view> heuristic_stopwords() noexcept;

class EntityExtractor {
public:
    virtual ~EntityExtractor() = default;
    virtual EntitySet extract(std::string_view text) const = 0;
};

/// Greedy longest-match gazetteer scan, optionally followed by a
/// capitalization heuristic that reports unmatched capitalized runs as MISC.
class GazetteerExtractor final : public EntityExtractor {
public:
    GazetteerExtractor(const Gazetteer& gazetteer, bool heuristics_enabled)
        : gazetteer_(&gazetteer), heuristics_(heuristics_enabled) {}

    EntitySet extract(std::string_view text) const override;

private:
    const Gazetteer* gazetteer_;
    bool heuristics_;
};

EntitySet extract_entities(std::string_view text, const Gazetteer& gazetteer,
                           bool heuristics_enabled);

struct PairEntities {
    EntitySet source;
    EntitySet summary;
    std::optional<EntitySet> reference;
};

PairEntities entity_sets_for_pair(std::string_view source, std::string_view summary,
                                  std::optional<std::string_view> reference,
                                  const EntityExtractor& extractor);

PairEntities entity_sets_for_pair(std::string_view source, std::string_view summary,
                                  std::optional<std::string_view> reference,
                                  const Gazetteer& gazetteer, bool heuristics_enabled);

} // namespace ehi
