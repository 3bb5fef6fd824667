#include "ehi/entities.hpp"
#include "ehi/error.hpp"

#include "support/oracles.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <fstream>
#include <sstream>

using namespace ehi;

namespace {

Gazetteer parse(const std::string& text) {
    std::istringstream in(text);
    return load_gazetteer(in);
}

std::vector<std::string> keys(const EntitySet& set) {
    std::vector<std::string> out;
    for (const auto& m : set.mentions()) out.push_back(m.key);
    return out;
}

std::size_t gazetteer_error_line(const std::string& text) {
    try {
        parse(text);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::GazetteerParse && e.line()) return *e.line();
    }
    return 0;
}

} // namespace

TEST_CASE("load_gazetteer") {
    const auto g = parse("Alice\tPERSON\nAcme Corp\tORG");
    CHECK(g.size() == 2);
    CHECK(g.find("alice") == EntityType::Person);
    CHECK(g.find("acme corp") == EntityType::Org);
    CHECK(g.max_entry_tokens() == 2);

    CHECK(parse("").empty());
    CHECK(parse("# header\n\n  \nBob\tPERSON\r\n").size() == 1);
}

TEST_CASE("load_gazetteer last duplicate wins") {
    const auto g = parse("Paris\tPERSON\nparis.\tLOC\n");
    CHECK(g.size() == 1);
    CHECK(g.find("paris") == EntityType::Loc);
}

TEST_CASE("load_gazetteer reports the failing line") {
    CHECK(gazetteer_error_line("Bob\tROBOT") == 1);
    CHECK(gazetteer_error_line("Alice\tPERSON\n# c\nNoTab\n") == 3);
    CHECK(gazetteer_error_line("A\tORG\tEXTRA\n") == 1);
    CHECK(gazetteer_error_line("Alice\tPERSON\n...\tORG\n") == 2);
}

TEST_CASE("default gazetteer matches the shipped file") {
    std::ifstream in(EHI_SOURCE_DIR "/data/gazetteer.tsv", std::ios::binary);
    REQUIRE(in);
    std::ostringstream ss;
    ss << in.rdbuf();
    CHECK(ss.str() == default_gazetteer_text());
    CHECK(default_gazetteer().size() >= 40);
    CHECK(default_gazetteer().find("ibm") == EntityType::Org);
}

TEST_CASE("heuristic stopword list") {
    const auto words = heuristic_stopwords();
    CHECK(words.size() == 50);
    CHECK(std::is_sorted(words.begin(), words.end()));
    CHECK(std::adjacent_find(words.begin(), words.end()) == words.end());
    CHECK(std::binary_search(words.begin(), words.end(), std::string_view("the")));
}

TEST_CASE("extract_entities examples") {
    const auto g = parse("alice\tPERSON\nacme corp\tORG\n");

    const auto set = extract_entities("alice met ACME CORP twice", g, true);
    REQUIRE(set.mentions().size() == 2);
    CHECK(set.mentions()[0].key == "alice");
    CHECK(set.mentions()[0].type == EntityType::Person);
    CHECK(set.mentions()[1].key == "acme corp");
    CHECK(set.mentions()[1].surface == "ACME CORP");
    CHECK(set.mentions()[1].span == TokenSpan{2, 3});
    CHECK(set.counts() == std::map<std::string, std::size_t>{{"acme corp", 1}, {"alice", 1}});

    CHECK(extract_entities("", g, true).empty());

    const auto twice = extract_entities("Alice met Alice", parse("alice\tPERSON"), true);
    CHECK(twice.count("alice") == 2);
    CHECK(twice.mentions().size() == 2);
}

TEST_CASE("extraction prefers the longest entry") {
    const auto g = parse("Acme\tORG\nAcme Corp\tORG\n");
    const auto set = extract_entities("Acme Corp", g, false);
    REQUIRE(set.mentions().size() == 1);
    CHECK(set.mentions()[0].key == "acme corp");

    const auto dotted = extract_entities("Shares of Acme Corp. fell; Acme rose.", g, false);
    CHECK(keys(dotted) == std::vector<std::string>{"acme corp", "acme"});
}

TEST_CASE("capitalization heuristic") {
    const auto g = parse("Alice\tPERSON\nBob\tPERSON\n");

    const auto pair = entity_sets_for_pair("Alice met Bob", "Alice spoke", std::nullopt, g, true);
    CHECK(pair.source.distinct() == std::vector<std::string>{"alice", "bob"});
    CHECK(pair.summary.distinct() == std::vector<std::string>{"alice"});
    CHECK_FALSE(pair.reference.has_value());

    const auto carol = extract_entities("Alice thanked Carol.", g, true);
    REQUIRE(carol.contains("carol"));
    CHECK(carol.mentions().back().type == EntityType::Misc);
    CHECK_FALSE(extract_entities("Alice thanked Carol.", g, false).contains("carol"));

    // A run of capitals is one mention; gazetteer matches split runs.
    CHECK(keys(extract_entities("we met Jean Claude Van today", g, true)) ==
          std::vector<std::string>{"jean claude van"});
    CHECK(keys(extract_entities("we met Jean Alice Claude", g, true)) ==
          std::vector<std::string>{"jean", "alice", "claude"});

    // Sentence-initial stopwords are not entities, elsewhere they are kept.
    CHECK(extract_entities("The meeting ended. The end.", g, true).empty());
    CHECK(keys(extract_entities("The Board met.", g, true)) == std::vector<std::string>{"board"});
    CHECK(keys(extract_entities("\"The Who\" played", g, true)) == std::vector<std::string>{"who"});
    CHECK(keys(extract_entities("we saw The Who", g, true)) == std::vector<std::string>{"the who"});
}

TEST_CASE("entity_sets_for_pair on empty texts") {
    const auto pair = entity_sets_for_pair("", "", std::string_view(""), default_gazetteer(), true);
    CHECK(pair.source.empty());
    CHECK(pair.summary.empty());
    REQUIRE(pair.reference.has_value());
    CHECK(pair.reference->empty());
}

TEST_CASE("EntitySet bookkeeping") {
    const std::vector<std::string> surfaces = {"Alice", "ALICE'S", "  ", "Bob."};
    const auto set = EntitySet::from_surfaces(surfaces);
    CHECK(set.mentions().size() == 3);
    CHECK(set.count("alice") == 2);
    CHECK(set.count("bob") == 1);
    CHECK(set.count("carol") == 0);
    CHECK(set.distinct() == std::vector<std::string>{"alice", "bob"});

    std::size_t total = 0;
    for (const auto& [k, n] : set.counts()) {
        total += n;
        CHECK(normalize_entity(k) == k);
    }
    CHECK(total == set.mentions().size());
}

TEST_CASE("extraction is case-insensitive for gazetteer entries") {
    oracle::Rng rng(21);
    const auto& g = default_gazetteer();
    const auto entries = g.keys();
    for (int iter = 0; iter < 300; ++iter) {
        std::string text;
        const auto n = 1 + oracle::uniform_index(rng, 20);
        for (std::size_t i = 0; i < n; ++i) {
            if (oracle::coin(rng, 0.3)) {
                text += entries[oracle::uniform_index(rng, entries.size())];
            } else {
                text += oracle::filler_words()[oracle::uniform_index(rng, oracle::filler_words().size())];
            }
            text += oracle::coin(rng, 0.2) ? ". " : " ";
        }
        const auto base = extract_entities(text, g, false);
        CAPTURE(text);
        CHECK(extract_entities(oracle::ascii_upper(text), g, false).counts() == base.counts());
        CHECK(extract_entities(oracle::scramble_case(rng, text), g, false).counts() == base.counts());
    }
}
