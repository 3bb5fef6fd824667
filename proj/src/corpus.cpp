#include "ehi/corpus.hpp"

#include "ehi/error.hpp"
#include "ehi/random.hpp"

#include <zlib.h>

#include <array>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <streambuf>

namespace ehi {

namespace {

const char* const kKnownFields[] = {"id", "source", "summary", "reference", "scores"};

bool is_known_field(const std::string& name) {
    for (const char* f : kKnownFields) {
        if (name == f) return true;
    }
    return false;
}

[[noreturn]] void parse_fail(std::size_t line, const std::string& what) {
    throw Error(ErrorCode::CorpusParse, "corpus line " + std::to_string(line) + ": " + what, line);
}

std::optional<std::string> optional_string(const Json& j, const char* name, std::size_t line) {
    if (!j.contains(name) || j.at(name).is_null()) return std::nullopt;
    if (!j.at(name).is_string()) parse_fail(line, std::string("field '") + name + "' must be a string");
    return j.at(name).get<std::string>();
}

class GzStreamBuf final : public std::streambuf {
public:
    explicit GzStreamBuf(gzFile file) : file_(file) {}
    ~GzStreamBuf() override { gzclose(file_); }
    GzStreamBuf(const GzStreamBuf&) = delete;
    GzStreamBuf& operator=(const GzStreamBuf&) = delete;

protected:
    int_type underflow() override {
        if (gptr() < egptr()) return traits_type::to_int_type(*gptr());
        const int n = gzread(file_, buffer_.data(), static_cast<unsigned>(buffer_.size()));
        if (n <= 0) return traits_type::eof();
        setg(buffer_.data(), buffer_.data(), buffer_.data() + n);
        return traits_type::to_int_type(*gptr());
    }

private:
    gzFile file_;
    std::array<char, 1 << 16> buffer_{};
};

class GzIStream final : public std::istream {
public:
    explicit GzIStream(gzFile file) : std::istream(nullptr), buf_(file) { rdbuf(&buf_); }

private:
    GzStreamBuf buf_;
};

} // namespace

Json record_to_json(const ScoreRecord& r) {
    Json j;
    j["id"] = r.id;
    j["source"] = r.source;
    if (r.summary) j["summary"] = *r.summary;
    if (r.reference) j["reference"] = *r.reference;
    for (const auto& [key, value] : r.extra.items()) j[key] = value;
    if (r.scores) j["scores"] = report_to_json(*r.scores);
    return j;
}

ScoreRecord record_from_json(const Json& j, std::size_t line) {
    if (!j.is_object()) parse_fail(line, "expected a JSON object");
    ScoreRecord r;
    if (!j.contains("id") || !j.at("id").is_string() || j.at("id").get<std::string>().empty()) {
        parse_fail(line, "missing or empty string field 'id'");
    }
    if (!j.contains("source") || !j.at("source").is_string() ||
        j.at("source").get<std::string>().empty()) {
        parse_fail(line, "missing or empty string field 'source'");
    }
    r.id = j.at("id").get<std::string>();
    r.source = j.at("source").get<std::string>();
    r.summary = optional_string(j, "summary", line);
    r.reference = optional_string(j, "reference", line);
    if (j.contains("scores") && !j.at("scores").is_null()) {
        try {
            r.scores = report_from_json(j.at("scores"));
        } catch (const nlohmann::json::exception& e) {
            parse_fail(line, std::string("malformed 'scores': ") + e.what());
        }
    }
    for (const auto& [key, value] : j.items()) {
        if (!is_known_field(key)) r.extra[key] = value;
    }
    return r;
}

std::optional<ScoreRecord> JsonlReader::next() {
    std::string text;
    while (std::getline(*in_, text)) {
        ++line_;
        if (!text.empty() && text.back() == '\r') text.pop_back();
        if (text.find_first_not_of(" \t") == std::string::npos) continue;

        Json j;
        try {
            j = Json::parse(text);
        } catch (const nlohmann::json::parse_error&) {
            parse_fail(line_, "malformed JSON");
        }
        auto record = record_from_json(j, line_);
        if (!seen_.insert(record.id).second) {
            throw Error(ErrorCode::DuplicateId, "duplicate record id '" + record.id + "' on line " +
                                                    std::to_string(line_),
                        line_);
        }
        return record;
    }
    return std::nullopt;
}

std::vector<ScoreRecord> read_jsonl(std::istream& in) {
    JsonlReader reader(in);
    std::vector<ScoreRecord> records;
    while (auto record = reader.next()) records.push_back(std::move(*record));
    return records;
}

std::unique_ptr<std::istream> open_corpus(const std::filesystem::path& path) {
    if (path.extension() == ".gz") {
        gzFile file = gzopen(path.c_str(), "rb");
        if (file == nullptr) throw Error(ErrorCode::Io, "cannot open corpus " + path.string());
        return std::make_unique<GzIStream>(file);
    }
    auto in = std::make_unique<std::ifstream>(path);
    if (!*in) throw Error(ErrorCode::Io, "cannot open corpus " + path.string());
    return in;
}

std::vector<ScoreRecord> read_jsonl_file(const std::filesystem::path& path) {
    auto in = open_corpus(path);
    return read_jsonl(*in);
}

void write_record(const ScoreRecord& record, std::ostream& out) {
    out << dump_line(record_to_json(record)) << '\n';
}

void write_jsonl(std::span<const ScoreRecord> records, std::ostream& out) {
    for (const auto& r : records) write_record(r, out);
}

void write_jsonl_file(std::span<const ScoreRecord> records, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot open " + path.string() + " for writing");
    write_jsonl(records, out);
    out.flush();
    if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

void SplitSpec::validate() const {
    for (double f : {train_frac, val_frac, test_frac}) {
        if (!(f > 0.0) || !std::isfinite(f)) {
            throw Error(ErrorCode::InvalidSplit, "split fractions must be positive");
        }
    }
    if (std::abs(train_frac + val_frac + test_frac - 1.0) > 1e-9) {
        throw Error(ErrorCode::InvalidSplit, "split fractions must sum to 1");
    }
}

std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed) {
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    SplitMix64 rng(seed);
    for (std::size_t i = n; i > 1; --i) {
        const auto j = static_cast<std::size_t>(rng.bounded(i));
        std::swap(order[i - 1], order[j]);
    }
    return order;
}

CorpusSplit split_corpus(std::span<const ScoreRecord> records, const SplitSpec& spec) {
    spec.validate();
    const std::size_t n = records.size();
    if (n < 3) {
        throw Error(ErrorCode::CorpusTooSmall,
                    "need at least 3 records to split, got " + std::to_string(n));
    }
    // The 1e-9 slack absorbs representation error such as 10 * 0.8 landing
    // just below 8.
    const auto cut = [n](double frac) {
        return std::min(n, static_cast<std::size_t>(std::floor(static_cast<double>(n) * frac + 1e-9)));
    };
    const std::size_t train_end = cut(spec.train_frac);
    const std::size_t val_end = std::max(train_end, cut(spec.train_frac + spec.val_frac));

    const auto order = seeded_permutation(n, spec.seed);
    CorpusSplit out;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& r = records[order[i]];
        if (i < train_end) {
            out.train.push_back(r);
        } else if (i < val_end) {
            out.val.push_back(r);
        } else {
            out.test.push_back(r);
        }
    }
    return out;
}

} // namespace ehi
