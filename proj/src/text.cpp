#include "ehi/text.hpp"

#include "ehi/error.hpp"

#include <string>

namespace ehi {

namespace {

bool is_space(char c) noexcept {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

char ascii_lower(char c) noexcept {
    return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

bool ends_with(std::string_view s, std::string_view suffix) noexcept {
    return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

void trim_trailing_space(std::string& s) {
    while (!s.empty() && s.back() == ' ') s.pop_back();
}

} // namespace

bool is_edge_punct(char c) noexcept {
    switch (c) {
    case '.': case ',': case ';': case ':': case '!': case '?':
    case '"': case '\'': case '(': case ')': case '[': case ']':
    case '{': case '}':
        return true;
    default:
        return false;
    }
}

bool is_punct_token(std::string_view text) noexcept {
    if (text.empty()) return false;
    for (char c : text) {
        if (!is_edge_punct(c)) return false;
    }
    return true;
}

std::vector<Token> tokenize(std::string_view text) {
    std::vector<Token> tokens;
    auto emit = [&](std::size_t b, std::size_t e) {
        tokens.push_back(Token{std::string(text.substr(b, e - b)), b, e});
    };

    std::size_t i = 0;
    const std::size_t n = text.size();
    while (i < n) {
        while (i < n && is_space(text[i])) ++i;
        if (i == n) break;
        std::size_t word_end = i;
        while (word_end < n && !is_space(text[word_end])) ++word_end;

        std::size_t b = i;
        std::size_t e = word_end;
        while (b < e && is_edge_punct(text[b])) {
            emit(b, b + 1);
            ++b;
        }
        std::size_t core_end = e;
        while (core_end > b && is_edge_punct(text[core_end - 1])) --core_end;
        if (core_end > b) emit(b, core_end);
        for (std::size_t p = core_end; p < e; ++p) emit(p, p + 1);

        i = word_end;
    }
    return tokens;
}

std::optional<std::string> try_normalize_entity(std::string_view surface,
                                                const NormalizeOptions& opts) {
    std::string out;
    out.reserve(surface.size());
    bool pending_space = false;
    for (char c : surface) {
        if (is_space(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) {
            out.push_back(' ');
            pending_space = false;
        }
        out.push_back(ascii_lower(c));
    }

    bool changed = true;
    while (changed && !out.empty()) {
        changed = false;
        if (opts.strip_possessive) {
            if (ends_with(out, "'s")) {
                out.resize(out.size() - 2);
                changed = true;
            } else if (ends_with(out, "\xE2\x80\x99s")) { // U+2019 right single quote
                out.resize(out.size() - 4);
                changed = true;
            }
        }
        if (opts.strip_trailing_periods) {
            while (!out.empty() && out.back() == '.') {
                out.pop_back();
                changed = true;
            }
        }
        const auto before = out.size();
        trim_trailing_space(out);
        changed = changed || out.size() != before;
    }

    if (out.empty()) return std::nullopt;
    return out;
}

std::string normalize_entity(std::string_view surface, const NormalizeOptions& opts) {
    auto key = try_normalize_entity(surface, opts);
    if (!key) {
        throw Error(ErrorCode::NormalizesToEmpty,
                    "entity surface '" + std::string(surface) + "' normalizes to an empty key");
    }
    return std::move(*key);
}

std::vector<Chunk> chunk_document(std::span<const Token> tokens, std::size_t max_chunk_tokens,
                                  std::size_t overlap_tokens) {
    if (max_chunk_tokens <= overlap_tokens) {
        throw Error(ErrorCode::InvalidChunkConfig,
                    "max_chunk_tokens (" + std::to_string(max_chunk_tokens) +
                        ") must exceed overlap_tokens (" + std::to_string(overlap_tokens) + ")");
    }
    std::vector<Chunk> chunks;
    const std::size_t n = tokens.size();
    const std::size_t step = max_chunk_tokens - overlap_tokens;

    for (std::size_t begin = 0; begin < n; begin += step) {
        const std::size_t end = std::min(begin + max_chunk_tokens, n);
        Chunk chunk;
        chunk.index = chunks.size();
        chunk.first = begin;
        chunk.last = end - 1;
        for (std::size_t t = begin; t < end; ++t) {
            if (t != begin) chunk.text.push_back(' ');
            chunk.text += tokens[t].text;
        }
        chunks.push_back(std::move(chunk));
        if (end == n) break;
    }
    return chunks;
}

} // namespace ehi
