#include "ehi/policy.hpp"

#include "ehi/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace ehi {

void FeatureLayout::active_features(const SourceEntities& source,
                                    std::span<const std::size_t> prefix, std::size_t position,
                                    std::vector<std::size_t>& out) const {
    out.clear();
    for (std::size_t e : source) out.push_back(e);

    // Emission counts for entity tokens in the prefix; prefixes are short.
    for (std::size_t i = 0; i < prefix.size(); ++i) {
        const std::size_t tok = prefix[i];
        if (tok >= num_entities) continue;
        std::size_t seen_before = 0;
        for (std::size_t k = 0; k < i; ++k) seen_before += prefix[k] == tok ? 1 : 0;
        if (seen_before == 0) out.push_back(num_entities + tok);
        if (seen_before == 1) out.push_back(2 * num_entities + tok);
    }
    out.push_back(3 * num_entities + position);
    out.push_back(3 * num_entities + summary_length);
}

PolicyState PolicyState::zeros(std::size_t feature_dim, std::size_t vocab_size) {
    PolicyState p;
    p.feature_dim = feature_dim;
    p.vocab_size = vocab_size;
    p.theta.assign(feature_dim * vocab_size, 0.0);
    p.adam_m.assign(feature_dim * vocab_size, 0.0);
    p.adam_v.assign(feature_dim * vocab_size, 0.0);
    return p;
}

bool PolicyState::finite() const noexcept {
    auto all_finite = [](const std::vector<double>& xs) {
        return std::all_of(xs.begin(), xs.end(), [](double x) { return std::isfinite(x); });
    };
    return all_finite(theta) && all_finite(adam_m) && all_finite(adam_v) &&
           std::all_of(adam_v.begin(), adam_v.end(), [](double x) { return x >= 0.0; });
}

namespace {

void log_softmax_at(const PolicyState& policy, std::span<const std::size_t> features,
                    std::vector<double>& out) {
    const std::size_t vocab = policy.vocab_size;
    out.assign(vocab, 0.0);
    for (std::size_t f : features) {
        const double* row = policy.theta.data() + f * vocab;
        for (std::size_t v = 0; v < vocab; ++v) out[v] += row[v];
    }
    const double mx = *std::max_element(out.begin(), out.end());
    double sum = 0.0;
    for (double x : out) sum += std::exp(x - mx);
    const double lse = mx + std::log(sum);
    for (double& x : out) x -= lse;
}

} // namespace

std::vector<double> next_token_log_probs(const PolicyState& policy, const FeatureLayout& layout,
                                         const SourceEntities& source,
                                         std::span<const std::size_t> prefix, std::size_t position) {
    std::vector<std::size_t> features;
    layout.active_features(source, prefix, position, features);
    std::vector<double> lp;
    log_softmax_at(policy, features, lp);
    return lp;
}

SampledSummary sample_summary(const PolicyState& policy, const FeatureLayout& layout,
                              const SourceEntities& source, SplitMix64& rng) {
    SampledSummary out;
    std::vector<std::size_t> features;
    std::vector<double> lp;
    for (std::size_t t = 0; t < layout.summary_length; ++t) {
        layout.active_features(source, out.tokens, t, features);
        log_softmax_at(policy, features, lp);
        const double u = rng.uniform01();
        double cumulative = 0.0;
        std::size_t pick = lp.size() - 1;
        for (std::size_t v = 0; v < lp.size(); ++v) {
            cumulative += std::exp(lp[v]);
            if (u < cumulative) {
                pick = v;
                break;
            }
        }
        out.tokens.push_back(pick);
        out.log_prob += lp[pick];
    }
    return out;
}

SampledSummary greedy_summary(const PolicyState& policy, const FeatureLayout& layout,
                              const SourceEntities& source) {
    SampledSummary out;
    std::vector<std::size_t> features;
    std::vector<double> lp;
    for (std::size_t t = 0; t < layout.summary_length; ++t) {
        layout.active_features(source, out.tokens, t, features);
        log_softmax_at(policy, features, lp);
        const auto pick = static_cast<std::size_t>(
            std::distance(lp.begin(), std::max_element(lp.begin(), lp.end())));
        out.tokens.push_back(pick);
        out.log_prob += lp[pick];
    }
    return out;
}

double sequence_log_prob(const PolicyState& policy, const FeatureLayout& layout,
                         const SourceEntities& source, std::span<const std::size_t> tokens) {
    std::vector<std::size_t> features;
    std::vector<double> lp;
    double total = 0.0;
    for (std::size_t t = 0; t < tokens.size(); ++t) {
        layout.active_features(source, tokens.first(t), t, features);
        log_softmax_at(policy, features, lp);
        total += lp[tokens[t]];
    }
    return total;
}

void accumulate_log_prob_gradient(const PolicyState& policy, const FeatureLayout& layout,
                                  const SourceEntities& source, std::span<const std::size_t> tokens,
                                  double weight, std::span<double> grad) {
    if (weight == 0.0) return;
    const std::size_t vocab = policy.vocab_size;
    std::vector<std::size_t> features;
    std::vector<double> lp;
    for (std::size_t t = 0; t < tokens.size(); ++t) {
        layout.active_features(source, tokens.first(t), t, features);
        log_softmax_at(policy, features, lp);
        // d log softmax(y) / d logit(v) = 1[v == y] - p(v)
        for (double& x : lp) x = -std::exp(x);
        lp[tokens[t]] += 1.0;
        for (std::size_t f : features) {
            double* row = grad.data() + f * vocab;
            for (std::size_t v = 0; v < vocab; ++v) row[v] += weight * lp[v];
        }
    }
}

void adam_step(PolicyState& policy, std::span<const double> grad, const AdamConfig& config) {
    if (!std::all_of(grad.begin(), grad.end(), [](double g) { return std::isfinite(g); })) {
        throw Error(ErrorCode::NumericalDivergence,
                    "non-finite gradient at update " + std::to_string(policy.step_count + 1));
    }
    ++policy.step_count;
    if (std::all_of(grad.begin(), grad.end(), [](double g) { return g == 0.0; })) return;

    const auto t = static_cast<double>(policy.step_count);
    const double bc1 = 1.0 - std::pow(config.beta1, t);
    const double bc2 = 1.0 - std::pow(config.beta2, t);
    for (std::size_t i = 0; i < grad.size(); ++i) {
        const double g = grad[i];
        double& m = policy.adam_m[i];
        double& v = policy.adam_v[i];
        m = config.beta1 * m + (1.0 - config.beta1) * g;
        v = config.beta2 * v + (1.0 - config.beta2) * g * g;
        const double m_hat = m / bc1;
        const double v_hat = v / bc2;
        policy.theta[i] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.epsilon);
    }
    if (!policy.finite()) {
        throw Error(ErrorCode::NumericalDivergence,
                    "non-finite parameters after update " + std::to_string(policy.step_count));
    }
}

std::vector<double> normalize_rewards(std::span<const double> raw) {
    const std::size_t n = raw.size();
    std::vector<double> z(n, 0.0);
    if (n < 2) return z;
    if (std::all_of(raw.begin(), raw.end(), [&](double r) { return r == raw[0]; })) return z;

    auto standardize = [](std::vector<double>& xs) {
        const auto count = static_cast<double>(xs.size());
        const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / count;
        double ss = 0.0;
        for (double& x : xs) {
            x -= mean;
            ss += x * x;
        }
        const double sd = std::sqrt(ss / count);
        if (!(sd > 0.0)) return false;
        for (double& x : xs) x /= sd;
        return true;
    };

    z.assign(raw.begin(), raw.end());
    // A second pass removes the rounding left by the first, which matters
    // when the spread is tiny relative to the values themselves.
    if (!standardize(z) || !standardize(z)) z.assign(n, 0.0);
    return z;
}

std::vector<double> reinforce_gradient(const PolicyState& policy, const FeatureLayout& layout,
                                       std::span<const Rollout> batch) {
    std::vector<double> grad(policy.theta.size(), 0.0);
    if (batch.empty()) return grad;
    const double scale = -1.0 / static_cast<double>(batch.size());
    for (const auto& r : batch) {
        accumulate_log_prob_gradient(policy, layout, *r.source, r.tokens, scale * r.reward, grad);
    }
    return grad;
}

void reinforce_update(PolicyState& policy, const FeatureLayout& layout,
                      std::span<const Rollout> batch, const AdamConfig& config) {
    const auto grad = reinforce_gradient(policy, layout, batch);
    adam_step(policy, grad, config);
}

} // namespace ehi
