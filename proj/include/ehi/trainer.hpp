#pragma once

#include "ehi/entities.hpp"
#include "ehi/json_io.hpp"
#include "ehi/metric.hpp"
#include "ehi/policy.hpp"
#include "ehi/random.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ehi {

/// Synthetic entity-summarization task. Sources mix a few distinct entities
/// (each mentioned 1-3 times) with filler words; a good summary names every
/// source entity, repeats none beyond the cap and invents nothing.
struct SyntheticTask {
    std::vector<std::string> entity_keys; // gazetteer keys, one token each
    std::vector<std::string> fillers;     // lowercase, not in the gazetteer
    std::size_t source_length = 20;
    std::size_t summary_length = 6;
    std::size_t entities_per_source = 3;

    std::size_t vocab_size() const noexcept { return entity_keys.size() + fillers.size(); }
    FeatureLayout layout() const noexcept { return {entity_keys.size(), summary_length}; }

    /// Throws Error(InvalidConfig) on an inconsistent task.
    void validate() const;

    /// Space-joined surface text for vocabulary ids. Entities are rendered
    /// with a leading capital.
    std::string render(std::span<const std::size_t> tokens) const;
};

/// Default desk-scale task: the first `num_entities` single-token keys of the
/// gazetteer (sorted) and `num_fillers` built-in filler words.
SyntheticTask default_synthetic_task(const Gazetteer& gazetteer, std::size_t num_entities = 20,
                                     std::size_t num_fillers = 30);

struct TaskInstance {
    std::vector<std::size_t> source_tokens;
    std::string source_text;
    SourceEntities reference_entities; // distinct entity ids placed in the source
};

TaskInstance generate_task_instance(const SyntheticTask& task, SplitMix64& rng);

struct TrainConfig {
    /// Value used for 780M-parameter language models; the toy policy needs
    /// a much larger step.
    static constexpr double kLmScaleLearningRate = 5e-6;

    double learning_rate = 1e-2;
    std::size_t batch_size = 32;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_epsilon = 1e-8;
    bool normalize_rewards = true;
    std::size_t regen_interval = 500;
    std::size_t max_updates = 5000;
    std::uint64_t seed = 0;
    std::size_t val_instances = 200;
    /// Score rewards with the placed entities as reference.
    bool use_reference = false;
    /// Train from a pool of (source, summary) rollouts that is resampled only
    /// every regen_interval updates instead of fresh rollouts per update.
    bool regenerate_pool = false;
    std::size_t pool_size = 512;
    MetricConfig metric;
    /// Where to write the policy when training diverges.
    std::optional<std::filesystem::path> divergence_dump;

    void validate() const;
    AdamConfig adam() const noexcept {
        return {learning_rate, adam_beta1, adam_beta2, adam_epsilon};
    }
};

/// Everything the toy-training CLI reads from its flat JSON config file.
struct ToyRunConfig {
    TrainConfig train;
    std::size_t num_entities = 20;
    std::size_t num_fillers = 30;
    std::size_t source_length = 20;
    std::size_t summary_length = 6;
    std::size_t entities_per_source = 3;

    SyntheticTask make_task(const Gazetteer& gazetteer) const;
};

/// Applies a flat JSON object using the field names of TrainConfig,
/// MetricConfig and ToyRunConfig. Unknown keys and bad values are rejected
/// with a message in `error`.
bool apply_run_config(const Json& j, ToyRunConfig& config, std::string& error);

struct EvalEntry {
    std::size_t update = 0;
    double mean_val_ehi = 0.0;
    double mean_val_f1 = 0.0;
    std::optional<double> mean_reward_raw; // mean training reward since the previous entry
};

struct TrainResult {
    PolicyState final_policy;
    PolicyState best_policy;
    std::size_t best_update = 0;
    double best_val_ehi = 0.0;
    std::vector<EvalEntry> log;
};

/// Scores a token summary against one instance. Used for both rewards and
/// validation.
class SyntheticScorer {
public:
    SyntheticScorer(const SyntheticTask& task, const Gazetteer& gazetteer, MetricConfig metric,
                    bool use_reference);

    struct Prepared {
        EntitySet source;
        EntitySet reference;
    };
    Prepared prepare(const TaskInstance& instance) const;
    EntitySet summary_entities(std::span<const std::size_t> summary) const;
    EhiReport score(const Prepared& prepared, std::span<const std::size_t> summary) const;

private:
    const SyntheticTask* task_;
    GazetteerExtractor extractor_;
    MetricConfig metric_;
    bool use_reference_;
};

/// Mean greedy-decoding EHI and entity F1 over instances.
std::pair<double, double> evaluate_policy(const PolicyState& policy, const SyntheticTask& task,
                                          const SyntheticScorer& scorer,
                                          std::span<const TaskInstance> instances);

/// REINFORCE on the synthetic task. Evaluates on held-out instances at update
/// 0, every regen_interval updates, and after the last update; the best of
/// those snapshots is returned as best_policy.
/// Throws Error(NumericalDivergence).
TrainResult train(const SyntheticTask& task, const TrainConfig& config, const Gazetteer& gazetteer);

Json eval_entry_to_json(const EvalEntry& entry);
void write_metrics_jsonl(std::span<const EvalEntry> log, std::ostream& out);

/// {"format": "ehi-policy", "version": 1, "feature_dim", "vocab_size",
///  "num_entities", "summary_length", "step_count", "theta": [...]}
Json checkpoint_to_json(const PolicyState& policy, const FeatureLayout& layout);
PolicyState checkpoint_from_json(const Json& j);
void save_checkpoint(const PolicyState& policy, const FeatureLayout& layout,
                     const std::filesystem::path& path);

} // namespace ehi
