#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ehi {

struct Token {
    std::string text;
    std::size_t start = 0; // byte offset into the source
    std::size_t end = 0;   // exclusive

    bool operator==(const Token&) const = default;
};

struct Chunk {
    std::size_t index = 0;
    std::size_t first = 0; // first token index (inclusive)
    std::size_t last = 0;  // last token index (inclusive)
    std::string text;

    std::size_t size() const noexcept { return last - first + 1; }
    bool operator==(const Chunk&) const = default;
};

inline constexpr std::size_t kDefaultMaxChunkTokens = 950;
inline constexpr std::size_t kDefaultOverlapTokens = 200;

/// Characters that are peeled off the edges of a whitespace-delimited word.
bool is_edge_punct(char c) noexcept;

/// True when every byte of `text` is edge punctuation.
bool is_punct_token(std::string_view text) noexcept;

/// Whitespace tokenizer. Leading and trailing punctuation of each word
/// (. , ; : ! ? " ' ( ) [ ] { }) become single-character tokens; interior
/// punctuation stays attached. Offsets are byte offsets into `text`.
std::vector<Token> tokenize(std::string_view text);

struct NormalizeOptions {
    bool strip_possessive = true;
    bool strip_trailing_periods = true;
};

/// Matching key for an entity surface form: ASCII-lowercased, whitespace
/// collapsed and trimmed, trailing "'s" and periods removed (both optional).
/// Throws Error(NormalizesToEmpty) when nothing is left.
std::string normalize_entity(std::string_view surface, const NormalizeOptions& opts = {});

/// Non-throwing variant; returns nullopt where normalize_entity would throw.
std::optional<std::string> try_normalize_entity(std::string_view surface,
                                                const NormalizeOptions& opts = {});

/// Sliding-window chunker. Window k covers token indices
/// [k*step, min(k*step + max_chunk_tokens, N)) with step = max - overlap, and
/// windows stop as soon as one reaches the end of the document. Chunk text is
/// the token texts joined by single spaces.
/// Throws Error(InvalidChunkConfig) when max_chunk_tokens <= overlap_tokens.
std::vector<Chunk> chunk_document(std::span<const Token> tokens,
                                  std::size_t max_chunk_tokens = kDefaultMaxChunkTokens,
                                  std::size_t overlap_tokens = kDefaultOverlapTokens);

} // namespace ehi
