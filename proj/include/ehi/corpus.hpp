#pragma once

#include "ehi/json_io.hpp"
#include "ehi/metric.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

namespace ehi {

/// One corpus line. Fields the schema does not know are kept in `extra`
/// (a JSON object, in input order) and written back unchanged.
struct ScoreRecord {
    std::string id;
    std::string source;
    std::optional<std::string> summary;
    std::optional<std::string> reference;
    std::optional<EhiReport> scores;
    Json extra = Json::object();

    bool operator==(const ScoreRecord&) const = default;
};

Json record_to_json(const ScoreRecord& record);

/// Throws Error(CorpusParse, line) when required fields are missing or mistyped.
ScoreRecord record_from_json(const Json& j, std::size_t line);

/// Incremental JSONL reader: one record per call, constant memory apart from
/// the id set used for duplicate detection. Blank lines are skipped.
class JsonlReader {
public:
    explicit JsonlReader(std::istream& in) : in_(&in) {}

    /// Next record, or nullopt at end of stream. Throws Error(CorpusParse)
    /// or Error(DuplicateId).
    std::optional<ScoreRecord> next();

    std::size_t line() const noexcept { return line_; }

private:
    std::istream* in_;
    std::size_t line_ = 0;
    std::unordered_set<std::string> seen_;
};

std::vector<ScoreRecord> read_jsonl(std::istream& in);

/// Input stream for a corpus path; transparently gunzips "*.gz".
/// Throws Error(Io) when the file cannot be opened.
std::unique_ptr<std::istream> open_corpus(const std::filesystem::path& path);

std::vector<ScoreRecord> read_jsonl_file(const std::filesystem::path& path);

void write_record(const ScoreRecord& record, std::ostream& out);
void write_jsonl(std::span<const ScoreRecord> records, std::ostream& out);

/// Throws Error(Io) naming the path on failure.
void write_jsonl_file(std::span<const ScoreRecord> records, const std::filesystem::path& path);

struct SplitSpec {
    double train_frac = 0.8;
    double val_frac = 0.1;
    double test_frac = 0.1;
    std::uint64_t seed = 0;

    /// Throws Error(InvalidSplit) unless all fractions are positive and sum to 1 within 1e-9.
    void validate() const;
};

struct CorpusSplit {
    std::vector<ScoreRecord> train;
    std::vector<ScoreRecord> val;
    std::vector<ScoreRecord> test;
};

/// Fisher-Yates permutation of 0..n-1 driven by SplitMix64(seed): for i from
/// n-1 down to 1, swap i with a uniform j in [0, i].
std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed);

/// Shuffles with seeded_permutation, then cuts at floor(n*train) and
/// floor(n*(train+val)); the remainder is test.
/// Throws Error(CorpusTooSmall) for fewer than 3 records.
CorpusSplit split_corpus(std::span<const ScoreRecord> records, const SplitSpec& spec);

} // namespace ehi
