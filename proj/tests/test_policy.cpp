#include "ehi/error.hpp"
#include "ehi/policy.hpp"
#include "ehi/random.hpp"

#include "support/oracles.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numeric>

using namespace ehi;
using Catch::Approx;

namespace {

PolicyState random_policy(oracle::Rng& rng, const FeatureLayout& layout, std::size_t vocab,
                          double scale = 1.0) {
    auto p = PolicyState::zeros(layout.dim(), vocab);
    for (auto& t : p.theta) t = oracle::uniform_real(rng, -scale, scale);
    return p;
}

double mean(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double pop_std(const std::vector<double>& v) {
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size()));
}

} // namespace

TEST_CASE("feature layout") {
    const FeatureLayout layout{4, 3};
    CHECK(layout.dim() == 3 * 4 + 3 + 1);
    std::vector<std::size_t> active;
    const std::vector<std::size_t> prefix = {2, 2, 7};
    layout.active_features({1, 2}, std::span(prefix).first(2), 2, active);
    std::sort(active.begin(), active.end());
    // source {1,2}; entity 2 emitted twice; position 2; bias
    CHECK(active == std::vector<std::size_t>{1, 2, 4 + 2, 8 + 2, 12 + 2, 15});
}

TEST_CASE("uniform policy sampling") {
    const FeatureLayout layout{5, 4};
    const std::size_t vocab = 9;
    const auto policy = PolicyState::zeros(layout.dim(), vocab);
    SplitMix64 rng(1);
    const auto s = sample_summary(policy, layout, {0, 3}, rng);
    CHECK(s.tokens.size() == 4);
    CHECK(s.log_prob == Approx(4 * std::log(1.0 / vocab)).margin(1e-12));

    SplitMix64 a(99), b(99);
    CHECK(sample_summary(policy, layout, {1}, a).tokens == sample_summary(policy, layout, {1}, b).tokens);
}

TEST_CASE("a dominant logit is always sampled") {
    const FeatureLayout layout{2, 3};
    auto policy = PolicyState::zeros(layout.dim(), 6);
    const std::size_t bias = layout.dim() - 1;
    policy.at(bias, 4) = 100.0;
    SplitMix64 rng(5);
    for (int i = 0; i < 200; ++i) {
        const auto s = sample_summary(policy, layout, {}, rng);
        CHECK(s.tokens == std::vector<std::size_t>{4, 4, 4});
        CHECK(s.log_prob <= 0.0);
        CHECK(s.log_prob > -1e-40 * 10);
    }
}

TEST_CASE("greedy decoding picks the argmax, ties to the lowest id") {
    const FeatureLayout layout{3, 2};
    auto policy = PolicyState::zeros(layout.dim(), 5);
    CHECK(greedy_summary(policy, layout, {}).tokens == std::vector<std::size_t>{0, 0});
    policy.at(layout.dim() - 1, 3) = 1.0;
    CHECK(greedy_summary(policy, layout, {}).tokens == std::vector<std::size_t>{3, 3});
}

TEST_CASE("sampled log-prob matches recomputation") {
    oracle::Rng orng(7);
    const FeatureLayout layout{4, 5};
    for (int iter = 0; iter < 200; ++iter) {
        const auto policy = random_policy(orng, layout, 8, 3.0);
        SplitMix64 rng(orng());
        const SourceEntities source = {0, 2};
        const auto s = sample_summary(policy, layout, source, rng);
        CHECK(s.log_prob <= 0.0);
        CHECK(s.log_prob == Approx(sequence_log_prob(policy, layout, source, s.tokens)).margin(1e-12));
        const auto lp = next_token_log_probs(policy, layout, source, {}, 0);
        double total = 0.0;
        for (double x : lp) total += std::exp(x);
        CHECK(total == Approx(1.0).margin(1e-12));
    }
}

TEST_CASE("log-prob gradient matches central differences") {
    oracle::Rng rng(13);
    const FeatureLayout layout{2, 2};
    const std::size_t vocab = 5;
    const double h = 1e-5;
    for (int iter = 0; iter < 20; ++iter) {
        auto policy = random_policy(rng, layout, vocab);
        const SourceEntities source = {1};
        const std::vector<std::size_t> tokens = {oracle::uniform_index(rng, vocab),
                                                 oracle::uniform_index(rng, vocab)};
        std::vector<double> grad(policy.theta.size(), 0.0);
        accumulate_log_prob_gradient(policy, layout, source, tokens, 1.0, grad);
        for (std::size_t i = 0; i < policy.theta.size(); ++i) {
            const double saved = policy.theta[i];
            policy.theta[i] = saved + h;
            const double up = sequence_log_prob(policy, layout, source, tokens);
            policy.theta[i] = saved - h;
            const double down = sequence_log_prob(policy, layout, source, tokens);
            policy.theta[i] = saved;
            const double fd = (up - down) / (2 * h);
            CAPTURE(i, grad[i], fd);
            CHECK(std::abs(grad[i] - fd) <= 1e-4 * std::max(1.0, std::abs(fd)));
        }
    }
}

TEST_CASE("adam first step has magnitude close to the learning rate") {
    for (double g : {1.0, -1.0, 1e-3, 250.0}) {
        auto policy = PolicyState::zeros(1, 1);
        const std::vector<double> grad = {g};
        adam_step(policy, grad, AdamConfig{0.01, 0.9, 0.999, 1e-8});
        CAPTURE(g);
        CHECK(std::abs(policy.theta[0]) >= 0.0099);
        CHECK(std::abs(policy.theta[0]) <= 0.01);
        CHECK(policy.theta[0] * g < 0.0);
        CHECK(policy.step_count == 1);
    }
}

TEST_CASE("adam follows the bias-corrected recurrence") {
    auto policy = PolicyState::zeros(1, 2);
    const AdamConfig cfg{0.05, 0.8, 0.9, 1e-6};
    double m = 0, v = 0, theta = 0;
    const std::vector<double> gs = {0.3, -1.2, 2.0, -0.4, 0.7};
    for (std::size_t t = 1; t <= gs.size(); ++t) {
        const double g = gs[t - 1];
        const std::vector<double> grad = {g, 0.0};
        adam_step(policy, grad, cfg);
        m = cfg.beta1 * m + (1 - cfg.beta1) * g;
        v = cfg.beta2 * v + (1 - cfg.beta2) * g * g;
        const double mh = m / (1 - std::pow(cfg.beta1, static_cast<double>(t)));
        const double vh = v / (1 - std::pow(cfg.beta2, static_cast<double>(t)));
        theta -= cfg.learning_rate * mh / (std::sqrt(vh) + cfg.epsilon);
        CHECK(policy.theta[0] == Approx(theta).margin(1e-12));
        CHECK(policy.adam_v[0] >= 0.0);
    }
    CHECK(policy.step_count == gs.size());
}

TEST_CASE("zero gradient leaves parameters untouched") {
    oracle::Rng rng(2);
    const FeatureLayout layout{3, 3};
    auto policy = random_policy(rng, layout, 4);
    policy.adam_m.assign(policy.theta.size(), 0.01);
    policy.adam_v.assign(policy.theta.size(), 0.02);
    const auto before = policy;
    const SourceEntities source = {0};
    const std::vector<Rollout> batch = {{&source, {1, 2, 3}, 0.0}, {&source, {0, 0, 0}, 0.0}};
    reinforce_update(policy, layout, batch, AdamConfig{});
    CHECK(policy.theta == before.theta);
    CHECK(policy.adam_m == before.adam_m);
    CHECK(policy.step_count == before.step_count + 1);
}

TEST_CASE("reinforce gradient is the reward-weighted mean") {
    oracle::Rng rng(19);
    const FeatureLayout layout{2, 2};
    const auto policy = random_policy(rng, layout, 4);
    const SourceEntities s1 = {0}, s2 = {1};
    const std::vector<Rollout> batch = {{&s1, {1, 3}, 0.7}, {&s2, {2, 2}, -1.5}};
    const auto got = reinforce_gradient(policy, layout, batch);

    std::vector<double> g1(policy.theta.size(), 0.0), g2(policy.theta.size(), 0.0);
    accumulate_log_prob_gradient(policy, layout, s1, batch[0].tokens, 1.0, g1);
    accumulate_log_prob_gradient(policy, layout, s2, batch[1].tokens, 1.0, g2);
    for (std::size_t i = 0; i < got.size(); ++i) {
        CHECK(got[i] == Approx(-(0.7 * g1[i] - 1.5 * g2[i]) / 2.0).margin(1e-12));
    }
}

TEST_CASE("reinforce_update raises the likelihood of rewarded samples") {
    const FeatureLayout layout{2, 2};
    auto policy = PolicyState::zeros(layout.dim(), 4);
    const SourceEntities source = {0};
    const std::vector<Rollout> batch = {{&source, {1, 1}, 1.0}, {&source, {3, 2}, -1.0}};
    const double good = sequence_log_prob(policy, layout, source, batch[0].tokens);
    reinforce_update(policy, layout, batch, AdamConfig{});
    CHECK(sequence_log_prob(policy, layout, source, batch[0].tokens) > good);
}

TEST_CASE("non-finite values are reported as divergence") {
    const FeatureLayout layout{1, 1};
    auto policy = PolicyState::zeros(layout.dim(), 2);
    policy.theta[0] = std::numeric_limits<double>::quiet_NaN();
    const SourceEntities source = {0};
    const std::vector<Rollout> batch = {{&source, {0}, 1.0}, {&source, {1}, -1.0}};
    CHECK_THROWS_MATCHES(reinforce_update(policy, layout, batch, AdamConfig{}), Error,
                         Catch::Matchers::Predicate<Error>([](const Error& e) {
                             return e.code() == ErrorCode::NumericalDivergence;
                         }));
}

TEST_CASE("normalize_rewards") {
    const std::vector<double> ex = {0.2, 0.4, 0.6};
    const auto n = normalize_rewards(ex);
    CHECK(n[0] == Approx(-1.22474).margin(1e-4));
    CHECK(n[1] == Approx(0.0).margin(1e-12));
    CHECK(n[2] == Approx(1.22474).margin(1e-4));

    CHECK(normalize_rewards(std::vector<double>{0.5}) == std::vector<double>{0.0});
    CHECK(normalize_rewards(std::vector<double>{0.3, 0.3, 0.3}) == std::vector<double>{0, 0, 0});
    CHECK(normalize_rewards(std::vector<double>{}).empty());
}

TEST_CASE("normalized rewards have zero mean and unit spread") {
    oracle::Rng rng(23);
    for (int iter = 0; iter < 2000; ++iter) {
        const auto b = 2 + oracle::uniform_index(rng, 64);
        std::vector<double> raw(b);
        const double spread = std::pow(10.0, oracle::uniform_real(rng, -6, 0));
        for (auto& r : raw) r = oracle::uniform_real(rng, 0.5 - spread, 0.5 + spread);
        if (pop_std(raw) == 0.0) continue;
        const auto n = normalize_rewards(raw);
        CHECK(std::abs(mean(n)) <= 1e-9);
        CHECK(std::abs(pop_std(n) - 1.0) <= 1e-6);
    }
}
