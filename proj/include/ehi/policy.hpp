#pragma once

#include "ehi/random.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace ehi {

/// Sorted distinct entity ids (indices into the generation vocabulary) that
/// occur in a source document.
using SourceEntities = std::vector<std::size_t>;

/// Binary feature layout of the toy policy. The generation vocabulary places
/// the E entity tokens first (ids 0..E-1), followed by filler tokens.
///
///   [0, E)          entity e occurs in the source
///   [E, 2E)         entity e already emitted at least once
///   [2E, 3E)        entity e already emitted at least twice
///   [3E, 3E + L)    position one-hot
///   3E + L          bias
///
/// The emitted-entity features make generation autoregressive: the logits at
/// step t depend on the tokens drawn before t.
struct FeatureLayout {
    std::size_t num_entities = 0;
    std::size_t summary_length = 0;

    std::size_t dim() const noexcept { return 3 * num_entities + summary_length + 1; }

    /// Active feature indices at `position` given the summary prefix.
    void active_features(const SourceEntities& source, std::span<const std::size_t> prefix,
                         std::size_t position, std::vector<std::size_t>& out) const;
};

/// Linear-softmax policy parameters (row-major [feature][token]) plus Adam
/// moment accumulators.
struct PolicyState {
    std::size_t feature_dim = 0;
    std::size_t vocab_size = 0;
    std::vector<double> theta;
    std::vector<double> adam_m;
    std::vector<double> adam_v;
    std::uint64_t step_count = 0;

    static PolicyState zeros(std::size_t feature_dim, std::size_t vocab_size);

    double& at(std::size_t feature, std::size_t token) { return theta[feature * vocab_size + token]; }
    double at(std::size_t feature, std::size_t token) const {
        return theta[feature * vocab_size + token];
    }

    bool finite() const noexcept;
    bool operator==(const PolicyState&) const = default;
};

struct SampledSummary {
    std::vector<std::size_t> tokens;
    double log_prob = 0.0;
};

/// Next-token log-probabilities at `position`.
std::vector<double> next_token_log_probs(const PolicyState& policy, const FeatureLayout& layout,
                                         const SourceEntities& source,
                                         std::span<const std::size_t> prefix, std::size_t position);

/// Draws `layout.summary_length` tokens autoregressively by inverse-CDF
/// sampling; log_prob is the sum of per-step log-probabilities.
SampledSummary sample_summary(const PolicyState& policy, const FeatureLayout& layout,
                              const SourceEntities& source, SplitMix64& rng);

/// Argmax decoding; ties go to the lowest token id.
SampledSummary greedy_summary(const PolicyState& policy, const FeatureLayout& layout,
                              const SourceEntities& source);

/// log p(tokens | source) under the policy.
double sequence_log_prob(const PolicyState& policy, const FeatureLayout& layout,
                         const SourceEntities& source, std::span<const std::size_t> tokens);

/// grad += weight * d/dtheta log p(tokens | source).
void accumulate_log_prob_gradient(const PolicyState& policy, const FeatureLayout& layout,
                                  const SourceEntities& source, std::span<const std::size_t> tokens,
                                  double weight, std::span<double> grad);

struct AdamConfig {
    double learning_rate = 1e-2;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// One bias-corrected Adam descent step on `grad`. step_count always
/// advances; an all-zero gradient leaves theta and the moments untouched.
/// Throws Error(NumericalDivergence) on a non-finite gradient or result.
void adam_step(PolicyState& policy, std::span<const double> grad, const AdamConfig& config);

/// Per-batch standardization: (r - mean) / population std. A single element
/// or a batch of identical values maps to all zeros.
std::vector<double> normalize_rewards(std::span<const double> raw);

struct RewardBatch {
    std::vector<double> raw;
    std::vector<double> normalized;
};

struct Rollout {
    const SourceEntities* source = nullptr;
    std::vector<std::size_t> tokens;
    double reward = 0.0; // already normalized when normalization is on
};

/// Surrogate-loss gradient -(1/B) sum_i reward_i * grad log p(y_i | x_i).
std::vector<double> reinforce_gradient(const PolicyState& policy, const FeatureLayout& layout,
                                       std::span<const Rollout> batch);

/// reinforce_gradient followed by adam_step.
void reinforce_update(PolicyState& policy, const FeatureLayout& layout,
                      std::span<const Rollout> batch, const AdamConfig& config);

} // namespace ehi
