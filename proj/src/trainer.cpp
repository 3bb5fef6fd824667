#include "ehi/trainer.hpp"

#include "ehi/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <ostream>

namespace ehi {

namespace {

constexpr std::array<std::string_view, 30> kFillers = {
    "meeting", "project",  "team",     "update",   "budget",  "plan",     "report",  "status",
    "schedule", "agenda",  "deadline", "issue",    "task",    "client",   "proposal", "design",
    "release", "feedback", "minutes",  "decision", "summary", "topic",    "question", "answer",
    "goal",    "risk",     "timeline", "resource", "action",  "estimate",
};

[[noreturn]] void invalid(const std::string& what) { throw Error(ErrorCode::InvalidConfig, what); }

} // namespace

// --- task --------------------------------------------------------------------

void SyntheticTask::validate() const {
    if (entity_keys.empty()) invalid("synthetic task needs at least one entity");
    if (fillers.empty()) invalid("synthetic task needs at least one filler word");
    if (entities_per_source > entity_keys.size()) {
        invalid("entities_per_source exceeds the entity vocabulary");
    }
    if (summary_length < 1) invalid("summary_length must be >= 1");
    if (summary_length < entities_per_source) invalid("summary_length must be >= entities_per_source");
    if (source_length < 3 * entities_per_source) {
        invalid("source_length must leave room for 3 mentions per entity");
    }
    for (const auto& f : fillers) {
        if (std::find(entity_keys.begin(), entity_keys.end(), f) != entity_keys.end()) {
            invalid("filler '" + f + "' is also an entity");
        }
        if (f.empty() || std::any_of(f.begin(), f.end(), [](char c) { return c >= 'A' && c <= 'Z'; })) {
            invalid("filler words must be non-empty and lowercase");
        }
    }
}

std::string SyntheticTask::render(std::span<const std::size_t> tokens) const {
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i > 0) out.push_back(' ');
        const std::size_t id = tokens[i];
        if (id < entity_keys.size()) {
            std::string word = entity_keys[id];
            if (!word.empty() && word[0] >= 'a' && word[0] <= 'z') {
                word[0] = static_cast<char>(word[0] - 'a' + 'A');
            }
            out += word;
        } else {
            out += fillers.at(id - entity_keys.size());
        }
    }
    return out;
}

SyntheticTask default_synthetic_task(const Gazetteer& gazetteer, std::size_t num_entities,
                                     std::size_t num_fillers) {
    if (num_fillers > kFillers.size()) {
        invalid("at most " + std::to_string(kFillers.size()) + " filler words are available");
    }
    SyntheticTask task;
    for (const auto& key : gazetteer.keys()) {
        if (task.entity_keys.size() == num_entities) break;
        if (tokenize(key).size() == 1) task.entity_keys.push_back(key);
    }
    if (task.entity_keys.size() < num_entities) {
        invalid("gazetteer has only " + std::to_string(task.entity_keys.size()) +
                " single-token entries");
    }
    for (std::size_t i = 0; i < num_fillers; ++i) {
        std::string f(kFillers[i]);
        if (gazetteer.find(f)) invalid("filler '" + f + "' collides with a gazetteer entry");
        task.fillers.push_back(std::move(f));
    }
    return task;
}

TaskInstance generate_task_instance(const SyntheticTask& task, SplitMix64& rng) {
    const std::size_t n_ent = task.entity_keys.size();
    const std::size_t n_fill = task.fillers.size();

    // Partial Fisher-Yates for the distinct entities.
    std::vector<std::size_t> ids(n_ent);
    for (std::size_t i = 0; i < n_ent; ++i) ids[i] = i;
    for (std::size_t i = 0; i < task.entities_per_source; ++i) {
        const auto j = i + static_cast<std::size_t>(rng.bounded(n_ent - i));
        std::swap(ids[i], ids[j]);
    }
    std::vector<std::size_t> mentions;
    for (std::size_t i = 0; i < task.entities_per_source; ++i) {
        const auto times = 1 + static_cast<std::size_t>(rng.bounded(3));
        mentions.insert(mentions.end(), times, ids[i]);
    }

    std::vector<std::size_t> slots(task.source_length);
    for (std::size_t i = 0; i < slots.size(); ++i) slots[i] = i;
    for (std::size_t i = 0; i < mentions.size(); ++i) {
        const auto j = i + static_cast<std::size_t>(rng.bounded(slots.size() - i));
        std::swap(slots[i], slots[j]);
    }

    TaskInstance inst;
    inst.source_tokens.resize(task.source_length);
    for (auto& tok : inst.source_tokens) tok = n_ent + static_cast<std::size_t>(rng.bounded(n_fill));
    for (std::size_t i = 0; i < mentions.size(); ++i) inst.source_tokens[slots[i]] = mentions[i];

    inst.source_text = task.render(inst.source_tokens) + ".";
    inst.reference_entities.assign(ids.begin(),
                                   ids.begin() + static_cast<std::ptrdiff_t>(task.entities_per_source));
    std::sort(inst.reference_entities.begin(), inst.reference_entities.end());
    return inst;
}

// --- config ------------------------------------------------------------------

void TrainConfig::validate() const {
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) invalid("learning_rate must be > 0");
    if (batch_size < 1) invalid("batch_size must be >= 1");
    if (regen_interval < 1) invalid("regen_interval must be >= 1");
    if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0)) invalid("adam_beta1 must be in [0, 1)");
    if (!(adam_beta2 >= 0.0 && adam_beta2 < 1.0)) invalid("adam_beta2 must be in [0, 1)");
    if (!(adam_epsilon > 0.0)) invalid("adam_epsilon must be > 0");
    if (val_instances < 1) invalid("val_instances must be >= 1");
    if (regenerate_pool && pool_size < 1) invalid("pool_size must be >= 1");
    metric.validate();
}

SyntheticTask ToyRunConfig::make_task(const Gazetteer& gazetteer) const {
    auto task = default_synthetic_task(gazetteer, num_entities, num_fillers);
    task.source_length = source_length;
    task.summary_length = summary_length;
    task.entities_per_source = entities_per_source;
    task.validate();
    return task;
}

namespace {

bool read_size(const Json& v, const std::string& key, std::size_t& out, std::string& error,
               bool allow_zero) {
    if (!v.is_number_integer() || v.get<long long>() < (allow_zero ? 0 : 1)) {
        error = key + (allow_zero ? " must be a non-negative integer" : " must be a positive integer");
        return false;
    }
    out = v.get<std::size_t>();
    return true;
}

bool read_real(const Json& v, const std::string& key, double& out, std::string& error) {
    if (!v.is_number()) {
        error = key + " must be a number";
        return false;
    }
    out = v.get<double>();
    return true;
}

bool read_flag(const Json& v, const std::string& key, bool& out, std::string& error) {
    if (!v.is_boolean()) {
        error = key + " must be a boolean";
        return false;
    }
    out = v.get<bool>();
    return true;
}

} // namespace

bool apply_run_config(const Json& j, ToyRunConfig& config, std::string& error) {
    if (!j.is_object()) {
        error = "config must be a flat JSON object";
        return false;
    }
    if (!apply_metric_config(j, config.train.metric, error)) return false;

    auto& t = config.train;
    for (const auto& [key, v] : j.items()) {
        bool ok = true;
        if (key == "of_repeat_cap" || key == "lf_importance_threshold" || key == "reference_mode" ||
            key == "heuristics_enabled" || key == "formula") {
            continue; // handled by apply_metric_config
        } else if (key == "learning_rate") {
            ok = read_real(v, key, t.learning_rate, error);
        } else if (key == "batch_size") {
            ok = read_size(v, key, t.batch_size, error, false);
        } else if (key == "adam_beta1") {
            ok = read_real(v, key, t.adam_beta1, error);
        } else if (key == "adam_beta2") {
            ok = read_real(v, key, t.adam_beta2, error);
        } else if (key == "adam_epsilon") {
            ok = read_real(v, key, t.adam_epsilon, error);
        } else if (key == "normalize_rewards") {
            ok = read_flag(v, key, t.normalize_rewards, error);
        } else if (key == "regen_interval") {
            ok = read_size(v, key, t.regen_interval, error, false);
        } else if (key == "max_updates") {
            ok = read_size(v, key, t.max_updates, error, true);
        } else if (key == "seed") {
            if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
                error = "seed must be a non-negative integer";
                ok = false;
            } else {
                t.seed = v.get<std::uint64_t>();
            }
        } else if (key == "val_instances") {
            ok = read_size(v, key, t.val_instances, error, false);
        } else if (key == "use_reference") {
            ok = read_flag(v, key, t.use_reference, error);
        } else if (key == "regenerate_pool") {
            ok = read_flag(v, key, t.regenerate_pool, error);
        } else if (key == "pool_size") {
            ok = read_size(v, key, t.pool_size, error, false);
        } else if (key == "num_entities") {
            ok = read_size(v, key, config.num_entities, error, false);
        } else if (key == "num_fillers") {
            ok = read_size(v, key, config.num_fillers, error, false);
        } else if (key == "source_length") {
            ok = read_size(v, key, config.source_length, error, false);
        } else if (key == "summary_length") {
            ok = read_size(v, key, config.summary_length, error, false);
        } else if (key == "entities_per_source") {
            ok = read_size(v, key, config.entities_per_source, error, true);
        } else {
            error = "unknown config key '" + key + "'";
            ok = false;
        }
        if (!ok) return false;
    }
    return true;
}

// --- scoring -----------------------------------------------------------------

SyntheticScorer::SyntheticScorer(const SyntheticTask& task, const Gazetteer& gazetteer,
                                 MetricConfig metric, bool use_reference)
    : task_(&task),
      extractor_(gazetteer, metric.heuristics_enabled),
      metric_(metric),
      use_reference_(use_reference) {}

SyntheticScorer::Prepared SyntheticScorer::prepare(const TaskInstance& instance) const {
    Prepared p;
    p.source = extractor_.extract(instance.source_text);
    std::vector<std::string> keys;
    for (std::size_t id : instance.reference_entities) keys.push_back(task_->entity_keys[id]);
    p.reference = EntitySet::from_surfaces(keys);
    return p;
}

EntitySet SyntheticScorer::summary_entities(std::span<const std::size_t> summary) const {
    return extractor_.extract(task_->render(summary));
}

EhiReport SyntheticScorer::score(const Prepared& prepared,
                                 std::span<const std::size_t> summary) const {
    return score_entities(prepared.source, summary_entities(summary),
                          use_reference_ ? &prepared.reference : nullptr, metric_);
}

std::pair<double, double> evaluate_policy(const PolicyState& policy, const SyntheticTask& task,
                                          const SyntheticScorer& scorer,
                                          std::span<const TaskInstance> instances) {
    if (instances.empty()) return {0.0, 0.0};
    const auto layout = task.layout();
    double ehi_sum = 0.0;
    double f1_sum = 0.0;
    for (const auto& inst : instances) {
        const auto prepared = scorer.prepare(inst);
        const auto summary = greedy_summary(policy, layout, inst.reference_entities);
        ehi_sum += scorer.score(prepared, summary.tokens).ehi;
        f1_sum += entity_f1(prepared.reference, scorer.summary_entities(summary.tokens)).f1;
    }
    const auto n = static_cast<double>(instances.size());
    return {ehi_sum / n, f1_sum / n};
}

// --- training ----------------------------------------------------------------

namespace {

struct PoolItem {
    TaskInstance instance;
    std::vector<std::size_t> tokens;
    double reward = 0.0;
};

} // namespace

TrainResult train(const SyntheticTask& task, const TrainConfig& config, const Gazetteer& gazetteer) {
    task.validate();
    config.validate();

    const auto layout = task.layout();
    const auto adam = config.adam();
    const SyntheticScorer scorer(task, gazetteer, config.metric, config.use_reference);

    SplitMix64 root(config.seed);
    SplitMix64 val_rng = root.fork(1);
    SplitMix64 data_rng = root.fork(2);
    SplitMix64 sample_rng = root.fork(3);
    SplitMix64 pool_rng = root.fork(4);

    std::vector<TaskInstance> val;
    val.reserve(config.val_instances);
    for (std::size_t i = 0; i < config.val_instances; ++i) {
        val.push_back(generate_task_instance(task, val_rng));
    }

    TrainResult result;
    PolicyState policy = PolicyState::zeros(layout.dim(), task.vocab_size());

    double reward_sum = 0.0;
    std::size_t reward_count = 0;
    auto evaluate = [&](std::size_t update) {
        const auto [ehi, f1] = evaluate_policy(policy, task, scorer, val);
        EvalEntry entry{update, ehi, f1, std::nullopt};
        if (reward_count > 0) entry.mean_reward_raw = reward_sum / static_cast<double>(reward_count);
        reward_sum = 0.0;
        reward_count = 0;
        result.log.push_back(entry);
        if (result.log.size() == 1 || ehi > result.best_val_ehi) {
            result.best_val_ehi = ehi;
            result.best_update = update;
            result.best_policy = policy;
        }
    };

    evaluate(0);

    std::vector<PoolItem> pool;
    std::vector<TaskInstance> batch_instances(config.batch_size);
    std::vector<Rollout> rollouts(config.batch_size);
    std::vector<double> raw(config.batch_size);

    for (std::size_t update = 1; update <= config.max_updates; ++update) {
        if (config.regenerate_pool && (update - 1) % config.regen_interval == 0) {
            pool.clear();
            for (std::size_t i = 0; i < config.pool_size; ++i) {
                PoolItem item;
                item.instance = generate_task_instance(task, data_rng);
                item.tokens =
                    sample_summary(policy, layout, item.instance.reference_entities, sample_rng).tokens;
                item.reward = scorer.score(scorer.prepare(item.instance), item.tokens).ehi;
                pool.push_back(std::move(item));
            }
        }

        for (std::size_t b = 0; b < config.batch_size; ++b) {
            if (config.regenerate_pool) {
                const auto& item = pool[static_cast<std::size_t>(pool_rng.bounded(pool.size()))];
                rollouts[b].source = &item.instance.reference_entities;
                rollouts[b].tokens = item.tokens;
                raw[b] = item.reward;
            } else {
                batch_instances[b] = generate_task_instance(task, data_rng);
                const auto& inst = batch_instances[b];
                rollouts[b].source = &inst.reference_entities;
                rollouts[b].tokens =
                    sample_summary(policy, layout, inst.reference_entities, sample_rng).tokens;
                raw[b] = scorer.score(scorer.prepare(inst), rollouts[b].tokens).ehi;
            }
        }

        const auto weights = config.normalize_rewards ? normalize_rewards(raw) : raw;
        for (std::size_t b = 0; b < config.batch_size; ++b) {
            rollouts[b].reward = weights[b];
            reward_sum += raw[b];
        }
        reward_count += config.batch_size;

        try {
            reinforce_update(policy, layout, rollouts, adam);
        } catch (const Error& e) {
            if (e.code() == ErrorCode::NumericalDivergence && config.divergence_dump) {
                save_checkpoint(policy, layout, *config.divergence_dump);
            }
            throw;
        }

        if (update % config.regen_interval == 0 || update == config.max_updates) evaluate(update);
    }

    result.final_policy = std::move(policy);
    return result;
}

// --- serialization -------------------------------------------------------------

Json eval_entry_to_json(const EvalEntry& entry) {
    Json j;
    j["update"] = entry.update;
    j["mean_val_ehi"] = entry.mean_val_ehi;
    j["mean_val_f1"] = entry.mean_val_f1;
    j["mean_reward_raw"] = entry.mean_reward_raw ? Json(*entry.mean_reward_raw) : Json(nullptr);
    return j;
}

void write_metrics_jsonl(std::span<const EvalEntry> log, std::ostream& out) {
    for (const auto& entry : log) out << dump_line(eval_entry_to_json(entry)) << '\n';
}

Json checkpoint_to_json(const PolicyState& policy, const FeatureLayout& layout) {
    Json j;
    j["format"] = "ehi-policy";
    j["version"] = 1;
    j["feature_dim"] = policy.feature_dim;
    j["vocab_size"] = policy.vocab_size;
    j["num_entities"] = layout.num_entities;
    j["summary_length"] = layout.summary_length;
    j["step_count"] = policy.step_count;
    j["theta"] = policy.theta;
    return j;
}

PolicyState checkpoint_from_json(const Json& j) {
    if (j.value("format", "") != "ehi-policy" || j.value("version", 0) != 1) {
        throw Error(ErrorCode::InvalidConfig, "not a version-1 ehi-policy checkpoint");
    }
    auto policy = PolicyState::zeros(j.at("feature_dim").get<std::size_t>(),
                                     j.at("vocab_size").get<std::size_t>());
    policy.step_count = j.at("step_count").get<std::uint64_t>();
    auto theta = j.at("theta").get<std::vector<double>>();
    if (theta.size() != policy.theta.size()) {
        throw Error(ErrorCode::InvalidConfig, "checkpoint theta has the wrong size");
    }
    policy.theta = std::move(theta);
    return policy;
}

void save_checkpoint(const PolicyState& policy, const FeatureLayout& layout,
                     const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write checkpoint " + path.string());
    out << dump_line(checkpoint_to_json(policy, layout)) << '\n';
    if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

} // namespace ehi
