#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ehi {

enum class ErrorCode {
    NormalizesToEmpty,
    InvalidChunkConfig,
    GazetteerParse,
    CorpusParse,
    DuplicateId,
    CorpusTooSmall,
    InvalidSplit,
    InvalidConfig,
    NumericalDivergence,
    BatchTooLarge,
    Io,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library. `line()` is set for errors that point
/// at a 1-based line of some input stream (gazetteer, corpus).
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message,
          std::optional<std::size_t> line = std::nullopt)
        : std::runtime_error(message), code_(code), line_(line) {}

    ErrorCode code() const noexcept { return code_; }
    std::optional<std::size_t> line() const noexcept { return line_; }

private:
    ErrorCode code_;
    std::optional<std::size_t> line_;
};

} // namespace ehi
