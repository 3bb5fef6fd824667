#include "ehi/entities.hpp"

#include "ehi/error.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <istream>
#include <sstream>

namespace ehi {

std::string_view to_string(EntityType type) noexcept {
    switch (type) {
    case EntityType::Person: return "PERSON";
    case EntityType::Org: return "ORG";
    case EntityType::Loc: return "LOC";
    case EntityType::Event: return "EVENT";
    case EntityType::Misc: return "MISC";
    }
    return "MISC";
}

std::optional<EntityType> parse_entity_type(std::string_view name) noexcept {
    if (name == "PERSON") return EntityType::Person;
    if (name == "ORG") return EntityType::Org;
    if (name == "LOC") return EntityType::Loc;
    if (name == "EVENT") return EntityType::Event;
    if (name == "MISC") return EntityType::Misc;
    return std::nullopt;
}

// --- EntitySet ---------------------------------------------------------------

EntitySet EntitySet::from_surfaces(std::span<const std::string> surfaces,
                                   const NormalizeOptions& opts) {
    EntitySet set;
    for (const auto& surface : surfaces) {
        auto key = try_normalize_entity(surface, opts);
        if (!key) continue;
        set.add(EntityMention{surface, std::move(*key), EntityType::Misc, std::nullopt});
    }
    return set;
}

void EntitySet::add(EntityMention mention) {
    ++counts_[mention.key];
    mentions_.push_back(std::move(mention));
}

std::vector<std::string> EntitySet::distinct() const {
    std::vector<std::string> keys;
    keys.reserve(counts_.size());
    for (const auto& [key, n] : counts_) keys.push_back(key);
    return keys;
}

std::size_t EntitySet::count(const std::string& key) const {
    auto it = counts_.find(key);
    return it == counts_.end() ? 0 : it->second;
}

// --- Gazetteer -----------------------------------------------------------------

void Gazetteer::add(std::string_view surface, EntityType type) {
    std::string key = normalize_entity(surface, opts_);
    max_entry_tokens_ = std::max(max_entry_tokens_, tokenize(key).size());
    entries_[std::move(key)] = type;
}

std::optional<EntityType> Gazetteer::find(const std::string& key) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

std::vector<std::string> Gazetteer::keys() const {
    std::vector<std::string> out;
    out.reserve(entries_.size());
    for (const auto& [key, type] : entries_) out.push_back(key);
    std::sort(out.begin(), out.end());
    return out;
}

Gazetteer load_gazetteer(std::istream& in, const NormalizeOptions& opts) {
    Gazetteer gazetteer(opts);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        if (line.front() == '#') continue;

        const auto tab = line.find('\t');
        if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos) {
            throw Error(ErrorCode::GazetteerParse,
                        "gazetteer line " + std::to_string(line_no) +
                            ": expected 'surface<TAB>TYPE'",
                        line_no);
        }
        const std::string_view surface(line.data(), tab);
        const std::string_view type_name(line.data() + tab + 1, line.size() - tab - 1);
        auto type = parse_entity_type(type_name);
        if (!type) {
            throw Error(ErrorCode::GazetteerParse,
                        "gazetteer line " + std::to_string(line_no) + ": unknown entity type '" +
                            std::string(type_name) + "'",
                        line_no);
        }
        if (!try_normalize_entity(surface, opts)) {
            throw Error(ErrorCode::GazetteerParse,
                        "gazetteer line " + std::to_string(line_no) + ": empty surface", line_no);
        }
        gazetteer.add(surface, *type);
    }
    return gazetteer;
}

Gazetteer load_gazetteer_file(const std::filesystem::path& path, const NormalizeOptions& opts) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, "cannot open gazetteer " + path.string());
    return load_gazetteer(in, opts);
}

const Gazetteer& default_gazetteer() {
    static const Gazetteer gazetteer = [] {
        std::istringstream in{std::string(default_gazetteer_text())};
        return load_gazetteer(in);
    }();
    return gazetteer;
}

// --- extraction ----------------------------------------------------------------

namespace {

constexpr std::array<std::string_view, 50> kStopwords = {
    "a",     "after", "also",  "an",    "and",   "as",    "at",    "before", "but",   "by",
    "for",   "from",  "he",    "her",   "here",  "his",   "how",   "i",      "if",    "in",
    "it",    "its",   "my",    "no",    "of",    "on",    "or",    "our",    "she",   "so",
    "that",  "the",   "their", "then",  "there", "these", "they",  "this",   "those", "to",
    "we",    "what",  "when",  "which", "while", "who",   "why",   "with",   "yes",   "you",
};

bool is_capitalized(std::string_view token) noexcept {
    return !token.empty() && token.front() >= 'A' && token.front() <= 'Z';
}

bool is_stopword(std::string_view token) {
    std::string lower(token);
    for (auto& c : lower) {
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    }
    return std::binary_search(kStopwords.begin(), kStopwords.end(), std::string_view(lower));
}

bool is_opening_punct(std::string_view t) noexcept {
    return t == "\"" || t == "'" || t == "(" || t == "[" || t == "{";
}

bool is_sentence_initial(const std::vector<Token>& tokens, std::size_t i) {
    while (i > 0) {
        const auto& prev = tokens[i - 1].text;
        if (is_opening_punct(prev)) {
            --i;
            continue;
        }
        return prev == "." || prev == "!" || prev == "?";
    }
    return true;
}

std::string_view slice(std::string_view text, const std::vector<Token>& tokens, std::size_t first,
                       std::size_t last) {
    return text.substr(tokens[first].start, tokens[last].end - tokens[first].start);
}

} // namespace

std::span<const std::string_view> heuristic_stopwords() noexcept { return kStopwords; }

EntitySet GazetteerExtractor::extract(std::string_view text) const {
    EntitySet set;
    const auto tokens = tokenize(text);
    if (tokens.empty()) return set;

    const auto& opts = gazetteer_->normalize_options();
    const std::size_t n = tokens.size();
    std::vector<bool> covered(n, false);
    std::vector<EntityMention> found;

    // Greedy longest match, left to right. A match never begins or ends on a
    // bare punctuation token.
    const std::size_t max_len = gazetteer_->max_entry_tokens();
    for (std::size_t i = 0; i < n;) {
        std::size_t matched_len = 0;
        if (!gazetteer_->empty() && !is_punct_token(tokens[i].text)) {
            for (std::size_t len = std::min(max_len, n - i); len >= 1; --len) {
                const std::size_t last = i + len - 1;
                if (is_punct_token(tokens[last].text)) continue;
                const auto surface = slice(text, tokens, i, last);
                auto key = try_normalize_entity(surface, opts);
                if (!key) continue;
                if (auto type = gazetteer_->find(*key)) {
                    found.push_back(EntityMention{std::string(surface), std::move(*key), *type,
                                                  TokenSpan{i, last}});
                    matched_len = len;
                    break;
                }
            }
        }
        if (matched_len > 0) {
            std::fill(covered.begin() + static_cast<std::ptrdiff_t>(i),
                      covered.begin() + static_cast<std::ptrdiff_t>(i + matched_len), true);
            i += matched_len;
        } else {
            ++i;
        }
    }

    if (heuristics_) {
        for (std::size_t i = 0; i < n;) {
            if (covered[i] || !is_capitalized(tokens[i].text)) {
                ++i;
                continue;
            }
            std::size_t end = i;
            while (end < n && !covered[end] && is_capitalized(tokens[end].text)) ++end;

            std::size_t first = i;
            if (first < end && is_sentence_initial(tokens, first) && is_stopword(tokens[first].text)) {
                ++first;
            }
            if (first < end) {
                const auto surface = slice(text, tokens, first, end - 1);
                if (auto key = try_normalize_entity(surface, opts)) {
                    found.push_back(EntityMention{std::string(surface), std::move(*key),
                                                  EntityType::Misc, TokenSpan{first, end - 1}});
                }
            }
            i = end;
        }
        std::sort(found.begin(), found.end(),
                  [](const EntityMention& a, const EntityMention& b) {
                      return a.span->first < b.span->first;
                  });
    }

    for (auto& mention : found) set.add(std::move(mention));
    return set;
}

EntitySet extract_entities(std::string_view text, const Gazetteer& gazetteer,
                           bool heuristics_enabled) {
    return GazetteerExtractor(gazetteer, heuristics_enabled).extract(text);
}

PairEntities entity_sets_for_pair(std::string_view source, std::string_view summary,
                                  std::optional<std::string_view> reference,
                                  const EntityExtractor& extractor) {
    PairEntities out;
    out.source = extractor.extract(source);
    out.summary = extractor.extract(summary);
    if (reference) out.reference = extractor.extract(*reference);
    return out;
}

PairEntities entity_sets_for_pair(std::string_view source, std::string_view summary,
                                  std::optional<std::string_view> reference,
                                  const Gazetteer& gazetteer, bool heuristics_enabled) {
    return entity_sets_for_pair(source, summary, reference,
                                GazetteerExtractor(gazetteer, heuristics_enabled));
}

} // namespace ehi
