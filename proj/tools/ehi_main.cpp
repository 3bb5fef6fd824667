// ehi: entity hallucination index toolkit.
//
//   ehi score         score one (source, summary[, reference]) triple
//   ehi score-corpus  score every record of a JSONL corpus
//   ehi split         seeded train/val/test split of a JSONL corpus
//   ehi train-toy     REINFORCE on the synthetic entity task
//   ehi serve         reward service over stdio or TCP
//
// Exit codes: 0 ok, 2 usage or missing file, 3 parse error, 4 numerical divergence.

#include "ehi/corpus.hpp"
#include "ehi/entities.hpp"
#include "ehi/error.hpp"
#include "ehi/json_io.hpp"
#include "ehi/metric.hpp"
#include "ehi/service.hpp"
#include "ehi/trainer.hpp"

#include <CLI11.hpp>

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitParse = 3;
constexpr int kExitDiverged = 4;

/// Carries an exit code out of a subcommand.
struct Exit {
    int code;
};

[[noreturn]] void fail(int code, const std::string& message) {
    std::cerr << "ehi: " << message << '\n';
    throw Exit{code};
}

int exit_code_for(ehi::ErrorCode code) {
    switch (code) {
    case ehi::ErrorCode::Io:
    case ehi::ErrorCode::InvalidConfig:
    case ehi::ErrorCode::InvalidSplit:
    case ehi::ErrorCode::InvalidChunkConfig:
        return kExitUsage;
    case ehi::ErrorCode::NumericalDivergence:
        return kExitDiverged;
    default:
        return kExitParse;
    }
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(kExitUsage, "cannot read '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void require_file(const std::string& path) {
    std::error_code ec;
    if (!fs::is_regular_file(path, ec)) fail(kExitUsage, "no such file: '" + path + "'");
}

ehi::Json read_json_file(const std::string& path) {
    const auto text = read_text_file(path);
    try {
        return ehi::Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        fail(kExitParse, "malformed JSON in '" + path + "': " + e.what());
    }
}

ehi::Gazetteer load_gazetteer_or_default(const std::string& path) {
    if (path.empty()) return ehi::default_gazetteer();
    require_file(path);
    return ehi::load_gazetteer_file(path);
}

/// Metric flags shared by score, score-corpus and serve.
struct MetricFlags {
    std::string config_path;
    std::optional<std::size_t> of_cap;
    std::optional<std::size_t> lf_threshold;
    bool reference_free = false;
    bool no_heuristics = false;

    void add_to(CLI::App& cmd) {
        cmd.add_option("--config", config_path, "Flat JSON metric config");
        cmd.add_option("--of-cap", of_cap, "Per-entity mention cap K before OF counts")
            ->check(CLI::PositiveNumber);
        cmd.add_option("--lf-threshold", lf_threshold,
                       "Source mention count that makes an entity important (tau)")
            ->check(CLI::PositiveNumber);
        cmd.add_flag("--reference-free", reference_free, "Ignore references when scoring");
        cmd.add_flag("--no-heuristics", no_heuristics, "Disable the capitalization heuristic");
    }

    ehi::MetricConfig resolve() const {
        ehi::MetricConfig config;
        if (!config_path.empty()) {
            require_file(config_path);
            std::string error;
            if (!ehi::apply_metric_config(read_json_file(config_path), config, error)) {
                fail(kExitParse, config_path + ": " + error);
            }
        }
        if (of_cap) config.of_repeat_cap = *of_cap;
        if (lf_threshold) config.lf_importance_threshold = *lf_threshold;
        if (reference_free) config.reference_mode = ehi::ReferenceMode::ReferenceFree;
        if (no_heuristics) config.heuristics_enabled = false;
        return config;
    }
};

// --- score ---------------------------------------------------------------------

struct ScoreArgs {
    std::string source, summary, reference, gazetteer;
    MetricFlags metric;
};

int cmd_score(const ScoreArgs& a) {
    require_file(a.gazetteer);
    require_file(a.source);
    require_file(a.summary);
    if (!a.reference.empty()) require_file(a.reference);

    const auto config = a.metric.resolve();
    const auto gazetteer = ehi::load_gazetteer_file(a.gazetteer);
    const auto source = read_text_file(a.source);
    const auto summary = read_text_file(a.summary);
    std::optional<std::string> reference;
    if (!a.reference.empty()) reference = read_text_file(a.reference);

    const auto report = ehi::score_pair(source, summary,
                                        reference ? std::optional<std::string_view>(*reference)
                                                  : std::nullopt,
                                        gazetteer, config);
    std::cout << ehi::dump_line(ehi::report_to_json(report)) << '\n';
    return 0;
}

// --- score-corpus ------------------------------------------------------------------

struct ScoreCorpusArgs {
    std::string in, out, gazetteer;
    MetricFlags metric;
};

int cmd_score_corpus(const ScoreCorpusArgs& a) {
    require_file(a.gazetteer);
    require_file(a.in);
    const auto config = a.metric.resolve();
    const auto gazetteer = ehi::load_gazetteer_file(a.gazetteer);
    const ehi::GazetteerExtractor extractor(gazetteer, config.heuristics_enabled);

    auto in = ehi::open_corpus(a.in);
    std::ofstream out(a.out, std::ios::binary | std::ios::trunc);
    if (!out) fail(kExitUsage, "cannot write '" + a.out + "'");

    ehi::JsonlReader reader(*in);
    std::size_t scored = 0, skipped = 0, failed = 0, in_band = 0;
    double ehi_sum = 0.0, f1_sum = 0.0;
    while (auto record = reader.next()) {
        if (!record->summary) {
            ++skipped;
            std::cerr << "ehi: record '" << record->id << "' has no summary; skipped\n";
        } else {
            try {
                std::optional<std::string_view> reference;
                if (record->reference) reference = *record->reference;
                record->scores =
                    ehi::score_pair(record->source, *record->summary, reference, extractor, config);
                ++scored;
                ehi_sum += record->scores->ehi;
                f1_sum += record->scores->entity_f1;
                if (record->scores->ehi >= 0.3 && record->scores->ehi <= 0.6) ++in_band;
            } catch (const std::exception& e) {
                ++failed;
                std::cerr << "ehi: record '" << record->id << "' not scored: " << e.what() << '\n';
            }
        }
        ehi::write_record(*record, out);
    }
    out.flush();
    if (!out) fail(kExitUsage, "write failed for '" + a.out + "'");

    const auto n = static_cast<double>(scored);
    ehi::Json stats;
    stats["n"] = scored;
    stats["skipped"] = skipped;
    stats["failed"] = failed;
    stats["mean_ehi"] = scored ? ehi_sum / n : 0.0;
    stats["mean_f1"] = scored ? f1_sum / n : 0.0;
    stats["frac_ehi_ge_0.3_le_0.6"] = scored ? static_cast<double>(in_band) / n : 0.0;
    std::cerr << ehi::dump_line(stats) << '\n';
    return 0;
}

// --- split ---------------------------------------------------------------------

struct SplitArgs {
    std::string in, out_dir, fractions = "0.8,0.1,0.1";
    std::uint64_t seed = 0;
};

int cmd_split(const SplitArgs& a) {
    require_file(a.in);
    ehi::SplitSpec spec;
    spec.seed = a.seed;
    {
        std::vector<double> parts;
        std::stringstream ss(a.fractions);
        std::string item;
        while (std::getline(ss, item, ',')) {
            try {
                std::size_t used = 0;
                parts.push_back(std::stod(item, &used));
                if (used != item.size()) throw std::invalid_argument(item);
            } catch (const std::exception&) {
                fail(kExitUsage, "bad --fractions value '" + a.fractions + "'");
            }
        }
        if (parts.size() != 3) fail(kExitUsage, "--fractions needs exactly three values");
        spec.train_frac = parts[0];
        spec.val_frac = parts[1];
        spec.test_frac = parts[2];
    }
    spec.validate();

    const auto records = ehi::read_jsonl_file(a.in);
    const auto split = ehi::split_corpus(records, spec);
    std::error_code ec;
    fs::create_directories(a.out_dir, ec);
    if (ec) fail(kExitUsage, "cannot create '" + a.out_dir + "': " + ec.message());
    ehi::write_jsonl_file(split.train, fs::path(a.out_dir) / "train.jsonl");
    ehi::write_jsonl_file(split.val, fs::path(a.out_dir) / "val.jsonl");
    ehi::write_jsonl_file(split.test, fs::path(a.out_dir) / "test.jsonl");
    std::cerr << "ehi: split " << records.size() << " records into " << split.train.size() << '/'
              << split.val.size() << '/' << split.test.size() << '\n';
    return 0;
}

// --- train-toy -----------------------------------------------------------------

struct TrainArgs {
    std::string config, out_dir, gazetteer;
    std::uint64_t seed = 0;
    std::optional<std::size_t> max_updates;
};

int cmd_train_toy(const TrainArgs& a) {
    ehi::ToyRunConfig run;
    if (!a.config.empty()) {
        require_file(a.config);
        std::string error;
        if (!ehi::apply_run_config(read_json_file(a.config), run, error)) {
            fail(kExitParse, a.config + ": " + error);
        }
    }
    run.train.seed = a.seed;
    if (a.max_updates) run.train.max_updates = *a.max_updates;

    std::error_code ec;
    fs::create_directories(a.out_dir, ec);
    if (ec) fail(kExitUsage, "cannot create '" + a.out_dir + "': " + ec.message());
    run.train.divergence_dump = fs::path(a.out_dir) / "diverged_checkpoint.json";

    const auto gazetteer = load_gazetteer_or_default(a.gazetteer);
    const auto task = run.make_task(gazetteer);
    const auto result = ehi::train(task, run.train, gazetteer);

    {
        std::ofstream metrics(fs::path(a.out_dir) / "metrics.jsonl", std::ios::trunc);
        if (!metrics) fail(kExitUsage, "cannot write metrics.jsonl in '" + a.out_dir + "'");
        ehi::write_metrics_jsonl(result.log, metrics);
    }
    ehi::save_checkpoint(result.best_policy, task.layout(),
                         fs::path(a.out_dir) / "best_checkpoint.json");

    ehi::Json summary;
    summary["best_update"] = result.best_update;
    summary["best_val_ehi"] = result.best_val_ehi;
    summary["initial_val_ehi"] = result.log.front().mean_val_ehi;
    summary["updates"] = run.train.max_updates;
    std::cout << ehi::dump_line(summary) << '\n';
    return 0;
}

// --- serve -----------------------------------------------------------------------

std::atomic<bool> g_stop{false};

extern "C" void on_signal(int) { g_stop = true; }

struct ServeArgs {
    bool stdio = false;
    std::string listen;
    std::string gazetteer;
    std::size_t max_batch = 1024;
    MetricFlags metric;
};

int cmd_serve(const ServeArgs& a) {
    if (a.stdio == !a.listen.empty()) fail(kExitUsage, "give exactly one of --stdio or --listen");
    const auto gazetteer = load_gazetteer_or_default(a.gazetteer);
    ehi::ServiceConfig config;
    config.metric = a.metric.resolve();
    config.max_batch = a.max_batch;
    const ehi::RewardService service(gazetteer, config);

    if (a.stdio) {
        service.serve_stream(std::cin, std::cout);
        return 0;
    }

    const auto [host, port] = ehi::parse_listen_address(a.listen);
    struct sigaction sa{};
    sa.sa_handler = on_signal;
    sigemptyset(&sa.sa_mask);
    sigaction(SIGINT, &sa, nullptr);
    sigaction(SIGTERM, &sa, nullptr);

    ehi::TcpServer server(service, host, port);
    server.start();
    std::cerr << "ehi: serving on " << host << ':' << server.port() << '\n';
    server.run(&g_stop);
    std::cerr << "ehi: shut down\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Entity hallucination index toolkit"};
    app.require_subcommand(1);

    ScoreArgs score;
    auto* score_cmd = app.add_subcommand("score", "Score one summary against its source");
    score_cmd->add_option("--source", score.source, "Source document")->required();
    score_cmd->add_option("--summary", score.summary, "Generated summary")->required();
    score_cmd->add_option("--reference", score.reference, "Reference summary");
    score_cmd->add_option("--gazetteer", score.gazetteer, "Gazetteer TSV")->required();
    score.metric.add_to(*score_cmd);

    ScoreCorpusArgs corpus;
    auto* corpus_cmd = app.add_subcommand("score-corpus", "Score every record of a JSONL corpus");
    corpus_cmd->add_option("--in", corpus.in, "Input corpus (.jsonl or .jsonl.gz)")->required();
    corpus_cmd->add_option("--out", corpus.out, "Scored output corpus")->required();
    corpus_cmd->add_option("--gazetteer", corpus.gazetteer, "Gazetteer TSV")->required();
    corpus.metric.add_to(*corpus_cmd);

    SplitArgs split;
    auto* split_cmd = app.add_subcommand("split", "Seeded train/val/test split");
    split_cmd->add_option("--in", split.in, "Input corpus")->required();
    split_cmd->add_option("--out-dir", split.out_dir, "Output directory")->required();
    split_cmd->add_option("--fractions", split.fractions, "train,val,test fractions")
        ->capture_default_str();
    split_cmd->add_option("--seed", split.seed, "Shuffle seed")->required();

    TrainArgs train;
    auto* train_cmd = app.add_subcommand("train-toy", "REINFORCE on the synthetic entity task");
    train_cmd->add_option("--config", train.config, "Flat JSON training config");
    train_cmd->add_option("--out-dir", train.out_dir, "Output directory")->required();
    train_cmd->add_option("--seed", train.seed, "Training seed")->required();
    train_cmd->add_option("--max-updates", train.max_updates, "Override max_updates");
    train_cmd->add_option("--gazetteer", train.gazetteer, "Gazetteer TSV (default: built-in)");

    ServeArgs serve;
    auto* serve_cmd = app.add_subcommand("serve", "Reward service (newline-delimited JSON)");
    serve_cmd->add_flag("--stdio", serve.stdio, "Serve on stdin/stdout");
    serve_cmd->add_option("--listen", serve.listen,
                          "TCP address host:port (default port " +
                              std::to_string(ehi::kDefaultServicePort) + ")");
    serve_cmd->add_option("--gazetteer", serve.gazetteer, "Gazetteer TSV (default: built-in)");
    serve_cmd->add_option("--max-batch", serve.max_batch, "Largest accepted score_batch")
        ->capture_default_str();
    serve.metric.add_to(*serve_cmd);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (*score_cmd) return cmd_score(score);
        if (*corpus_cmd) return cmd_score_corpus(corpus);
        if (*split_cmd) return cmd_split(split);
        if (*train_cmd) return cmd_train_toy(train);
        if (*serve_cmd) return cmd_serve(serve);
    } catch (const Exit& e) {
        return e.code;
    } catch (const ehi::Error& e) {
        std::cerr << "ehi: " << e.what() << '\n';
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        std::cerr << "ehi: " << e.what() << '\n';
        return 1;
    }
    return kExitUsage;
}
