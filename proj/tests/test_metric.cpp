#include "ehi/json_io.hpp"
#include "ehi/metric.hpp"

#include "support/oracles.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace ehi;
using Catch::Approx;

namespace {

EntitySet set_of(const oracle::Counts& counts) {
    EntitySet set;
    for (const auto& [key, n] : counts) {
        for (std::size_t i = 0; i < n; ++i) set.add({key, key, EntityType::Misc, std::nullopt});
    }
    return set;
}

EhiComponents comp(double ph, double ef, double nh, double of, double lf) {
    return {ph, ef, nh, of, lf};
}

} // namespace

TEST_CASE("compute_components examples") {
    MetricConfig cfg;
    const auto src = set_of({{"alice", 2}, {"bob", 1}, {"acme corp", 1}});
    const auto sum = set_of({{"alice", 1}, {"bob", 1}, {"carol", 1}});
    const auto ref = set_of({{"alice", 1}, {"bob", 1}, {"carol", 1}, {"acme corp", 1}});
    CHECK(compute_components(src, sum, &ref, cfg) == comp(1, 2, 0, 0, 0));

    const EntitySet empty;
    CHECK(compute_components(empty, empty, nullptr, cfg) == comp(0, 0, 0, 0, 0));

    const auto oracle_src = set_of({{"oracle", 1}, {"microsoft", 1}});
    const auto oracle_sum = set_of({{"oracle", 1}, {"ibm", 1}});
    CHECK(compute_components(oracle_src, oracle_sum, nullptr, cfg) == comp(0, 1, 1, 0, 0));
}

TEST_CASE("compute_components repeat cap and importance threshold") {
    const auto src = set_of({{"a", 3}, {"b", 2}, {"c", 1}});
    const auto sum = set_of({{"a", 5}, {"d", 3}});
    MetricConfig cfg;
    CHECK(compute_components(src, sum, nullptr, cfg) == comp(0, 1, 1, 4, 1));
    cfg.of_repeat_cap = 1;
    cfg.lf_importance_threshold = 1;
    CHECK(compute_components(src, sum, nullptr, cfg) == comp(0, 1, 1, 6, 2));
}

TEST_CASE("reference-free mode ignores the reference") {
    const auto src = set_of({{"a", 1}});
    const auto sum = set_of({{"a", 1}, {"b", 1}});
    const auto ref = set_of({{"b", 1}});
    MetricConfig cfg;
    CHECK(compute_components(src, sum, &ref, cfg) == comp(1, 1, 0, 0, 0));
    cfg.reference_mode = ReferenceMode::ReferenceFree;
    CHECK(compute_components(src, sum, &ref, cfg) == comp(0, 1, 1, 0, 0));
}

TEST_CASE("compute_components agrees with the set-arithmetic oracle") {
    oracle::Rng rng(17);
    for (int iter = 0; iter < 2000; ++iter) {
        const auto src = oracle::random_counts(rng, 8, 5);
        const auto sum = oracle::random_counts(rng, 8, 5);
        std::optional<oracle::Counts> ref;
        if (oracle::coin(rng)) ref = oracle::random_counts(rng, 8, 5);
        MetricConfig cfg;
        cfg.of_repeat_cap = 1 + oracle::uniform_index(rng, 3);
        cfg.lf_importance_threshold = 1 + oracle::uniform_index(rng, 3);
        const auto expect =
            oracle::components(src, sum, ref, cfg.of_repeat_cap, cfg.lf_importance_threshold);
        const auto ref_set = ref ? std::optional<EntitySet>(set_of(*ref)) : std::nullopt;
        const auto got = compute_components(set_of(src), set_of(sum), ref_set ? &*ref_set : nullptr, cfg);
        CHECK(got.ph == expect.ph);
        CHECK(got.ef == expect.ef);
        CHECK(got.nh == expect.nh);
        CHECK(got.of == expect.of);
        CHECK(got.lf == expect.lf);
    }
}

TEST_CASE("ehi_from_components values") {
    CHECK(ehi_from_components(comp(2, 1, 0, 0, 0)) == 1.0);
    CHECK(ehi_from_components(comp(0, 0, 0, 0, 0)) == 1.0);
    CHECK(ehi_from_components(comp(0, 0, 1, 0, 0)) == 0.0);

    const double e = std::exp(1.0);
    const double v1 = ((e - 1) + (e * e - 1)) / ((e - 1) + (e * e - 1) + (e - 1));
    CHECK(v1 == Approx(0.82512).margin(1e-5));
    CHECK(ehi_from_components(comp(1, 2, 1, 0, 0)) == Approx(v1).margin(1e-12));

    const double v2 = (std::pow(e, 3) - 1) / ((std::pow(e, 3) - 1) + (e - 1));
    CHECK(v2 == Approx(0.91741).margin(1e-5));
    CHECK(ehi_from_components(comp(0, 3, 1, 0, 0)) == Approx(v2).margin(1e-12));
}

TEST_CASE("literal formula is available") {
    const double e = std::exp(1.0);
    CHECK(ehi_from_components(comp(0, 0, 0, 0, 0), EhiFormula::Literal) == Approx(0.4));
    CHECK(ehi_from_components(comp(1, 2, 1, 0, 0), EhiFormula::Literal) ==
          Approx((e + e * e) / (e + e * e + e + 2)).margin(1e-12));
}

TEST_CASE("ehi_from_components handles huge components") {
    CHECK(ehi_from_components(comp(0, 1000, 0, 0, 0)) == 1.0);
    CHECK(ehi_from_components(comp(0, 0, 1000, 0, 0)) == 0.0);
    CHECK(ehi_from_components(comp(0, 1000, 1000, 0, 0)) == Approx(0.5).margin(1e-12));
    CHECK(ehi_from_components(comp(0, 1001, 1000, 0, 0)) == Approx(std::exp(1.0) / (std::exp(1.0) + 1)));
}

TEST_CASE("ehi properties on random tuples") {
    oracle::Rng rng(29);
    for (int iter = 0; iter < 5000; ++iter) {
        const auto t = oracle::random_tuple(rng);
        const EhiComponents c{t.ph, t.ef, t.nh, t.of, t.lf};
        const double v = ehi_from_components(c);
        CAPTURE(t.ph, t.ef, t.nh, t.of, t.lf);
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
        CHECK(v == Approx(oracle::ehi(t)).margin(1e-12));

        if (t.ph + t.ef > 0) {
            auto more_nh = c;
            more_nh.nh += 1;
            CHECK(ehi_from_components(more_nh) < v);
            auto no_errors = c;
            no_errors.nh = no_errors.of = no_errors.lf = 0;
            CHECK(ehi_from_components(no_errors) == 1.0);
        }
        if (t.nh + t.of + t.lf > 0) {
            auto more_ef = c;
            more_ef.ef += 1;
            CHECK(ehi_from_components(more_ef) > v);
        }
    }
}

TEST_CASE("entity_f1 conventions") {
    const auto ref = set_of({{"alice", 1}, {"acme corp", 1}});
    const auto gen = set_of({{"alice", 2}, {"bob", 1}});
    CHECK(entity_f1(ref, gen) == EntityPrf{0.5, 0.5, 0.5});
    CHECK(entity_f1(ref, ref) == EntityPrf{1, 1, 1});
    CHECK(entity_f1(ref, EntitySet{}) == EntityPrf{0, 0, 0});
    CHECK(entity_f1(EntitySet{}, gen) == EntityPrf{0, 0, 0});
    CHECK(entity_f1(EntitySet{}, EntitySet{}) == EntityPrf{1, 1, 1});
    CHECK(entity_f1(set_of({{"x", 1}}), set_of({{"y", 1}})) == EntityPrf{0, 0, 0});
}

TEST_CASE("entity_f1 agrees with the oracle and is symmetric") {
    oracle::Rng rng(31);
    for (int iter = 0; iter < 2000; ++iter) {
        const auto a = oracle::random_counts(rng, 10, 6);
        const auto b = oracle::random_counts(rng, 10, 6);
        const auto got = entity_f1(set_of(a), set_of(b));
        const auto want = oracle::prf(oracle::keys_of(a), oracle::keys_of(b));
        CHECK(got.precision == want.p);
        CHECK(got.recall == want.r);
        CHECK(got.f1 == want.f1);
        CHECK(entity_f1(set_of(b), set_of(a)).recall == got.precision);
    }
}

TEST_CASE("score_pair injected hallucination") {
    const auto& g = default_gazetteer();
    const MetricConfig cfg;
    const std::string source = "Oracle held talks with Microsoft in Prague. Oracle agreed.";
    const auto clean = score_pair(source, "Oracle met Microsoft.", std::nullopt, g, cfg);
    const auto dirty = score_pair(source, "Oracle met Microsoft and IBM.", std::nullopt, g, cfg);
    CHECK(clean.hallucinated_keys.empty());
    CHECK(dirty.hallucinated_keys == std::vector<std::string>{"ibm"});
    CHECK(dirty.components.nh == 1);
    CHECK(dirty.ehi < clean.ehi);
    CHECK(clean.ehi == 1.0);
    CHECK_FALSE(dirty.reference_used);
}

TEST_CASE("score_pair with summary equal to source") {
    const auto& g = default_gazetteer();
    const std::string text = "Alice visited Berlin with Bob for Interspeech.";
    const auto report = score_pair(text, text, std::nullopt, g, MetricConfig{});
    CHECK(report.components.nh == 0);
    CHECK(report.components.of == 0);
    CHECK(report.ehi == 1.0);
    CHECK(report.entity_f1 == 1.0);
}

TEST_CASE("score_pair with empty summary and entity-free source") {
    const auto report = score_pair("we talked about lunch", "", std::nullopt, default_gazetteer(),
                                   MetricConfig{});
    CHECK(report.ehi == 1.0);
    CHECK(report.entity_f1 == 1.0);
}

TEST_CASE("score_pair uses the reference for F1 and PH") {
    const auto& g = default_gazetteer();
    const auto report = score_pair("Alice met Bob in Paris. Alice left.", "Alice met Carol.",
                                   std::string_view("Alice and Carol talked."), g, MetricConfig{});
    CHECK(report.reference_used);
    CHECK(report.components.ph == 1);
    CHECK(report.components.ef == 1);
    CHECK(report.components.nh == 0);
    CHECK(report.entity_f1 == 1.0);
    CHECK(report.grounded_keys == std::vector<std::string>{"alice"});
    CHECK(report.hallucinated_keys.empty());
}

TEST_CASE("report JSON round trip") {
    const auto report = score_pair("Alice met Bob. Bob left. Bob.", "Alice and IBM.", std::nullopt,
                                   default_gazetteer(), MetricConfig{});
    const auto j = report_to_json(report);
    for (const auto* key : {"ehi", "ph", "ef", "nh", "of", "lf", "entity_precision", "entity_recall",
                            "entity_f1", "omitted_important_keys"}) {
        CHECK(j.contains(key));
    }
    CHECK(j["omitted_important_keys"] == Json::array({"bob"}));
    CHECK(report_from_json(Json::parse(j.dump())) == report);
}

TEST_CASE("metric config from JSON") {
    MetricConfig cfg;
    std::string error;
    CHECK(apply_metric_config(Json::parse(R"({"of_repeat_cap":3,"reference_mode":"reference_free",
        "heuristics_enabled":false,"formula":"literal"})"),
                              cfg, error));
    CHECK(cfg.of_repeat_cap == 3);
    CHECK(cfg.reference_mode == ReferenceMode::ReferenceFree);
    CHECK_FALSE(cfg.heuristics_enabled);
    CHECK(cfg.formula == EhiFormula::Literal);

    CHECK_FALSE(apply_metric_config(Json::parse(R"({"of_repeat_cap":0})"), cfg, error));
    CHECK_FALSE(apply_metric_config(Json::parse(R"({"reference_mode":"sometimes"})"), cfg, error));
    CHECK_FALSE(apply_metric_config(Json::parse("[]"), cfg, error));
}
