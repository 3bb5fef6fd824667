#include "ehi/error.hpp"

namespace ehi {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::NormalizesToEmpty: return "NormalizesToEmpty";
    case ErrorCode::InvalidChunkConfig: return "InvalidChunkConfig";
    case ErrorCode::GazetteerParse: return "GazetteerParse";
    case ErrorCode::CorpusParse: return "CorpusParse";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::CorpusTooSmall: return "CorpusTooSmall";
    case ErrorCode::InvalidSplit: return "InvalidSplit";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::NumericalDivergence: return "NumericalDivergence";
    case ErrorCode::BatchTooLarge: return "BatchTooLarge";
    case ErrorCode::Io: return "Io";
    }
    return "Unknown";
}

} // namespace ehi
