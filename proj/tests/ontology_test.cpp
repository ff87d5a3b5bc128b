#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "support.hpp"
#include "trilogy/errors.hpp"
#include "trilogy/ontology.hpp"

using namespace trilogy;
using ontology::ConceptWeight;
using ontology::Ontology;

namespace {

const char* kFigureHierarchy =
    "ATM General\t\n"
    "SDH General\t\n"
    "Optical Networks\t\n"
    "Adaptation Layer And Transport Layer\tATM General\n"
    "ATM Introduction\tATM General\n"
    "ATM Bandwidth allocation\tATM General\n"
    "SDH Networking and Components\tSDH General\n"
    "Wavelength Division Multiplexing\tOptical Networks\n";

const char* kFigureLinks =
    "Aal\tAdaptation Layer And Transport Layer\t20\n"
    "Aal\tATM Introduction\t3\n"
    "Connection admission control\tATM Bandwidth allocation\t10\n"
    "Regenerator section\tSDH Networking and Components\t8\n"
    "WDM\tWavelength Division Multiplexing\t15\n";

}  // namespace

TEST_CASE("load_ontology: keyword table rows load exactly") {
    Ontology o = ontology::load_ontology(kFigureHierarchy, kFigureLinks);
    CHECK(o.links().size() == 5);
    CHECK(o.validate().empty());

    auto aal = o.concepts_for("aal");
    REQUIRE(aal.size() == 2);
    CHECK(aal[0] == ConceptWeight{"Adaptation Layer And Transport Layer", 20});
    CHECK(aal[1] == ConceptWeight{"ATM Introduction", 3});

    CHECK(o.concepts_for("connection admission control") ==
          std::vector<ConceptWeight>{{"ATM Bandwidth allocation", 10}});
    CHECK(o.concepts_for("regenerator section") ==
          std::vector<ConceptWeight>{{"SDH Networking and Components", 8}});
    CHECK(o.concepts_for("wdm") ==
          std::vector<ConceptWeight>{{"Wavelength Division Multiplexing", 15}});
}

TEST_CASE("load_ontology: empty sources give an empty valid ontology") {
    Ontology o = ontology::load_ontology("", "");
    CHECK(o.concepts().empty());
    CHECK(o.links().empty());
    CHECK(o.validate().empty());
}

TEST_CASE("load_ontology: weight out of bounds is rejected") {
    CHECK_THROWS_WITH_AS(
        ontology::load_ontology("A\t\n", "kw\tA\t21\n"),
        doctest::Contains("weight out of bounds"), InvalidInput);
    CHECK_THROWS_AS(ontology::load_ontology("A\t\n", "kw\tA\t0\n"), InvalidInput);
}

TEST_CASE("load_ontology: malformed rows carry line numbers") {
    CHECK_THROWS_WITH_AS(ontology::load_ontology("A\t\n", "kw\tA\n"),
                         doctest::Contains("line 1"), InvalidInput);
    CHECK_THROWS_AS(ontology::load_ontology("A\tB\tC\n", ""), InvalidInput);
    CHECK_THROWS_AS(ontology::load_ontology("A\t\n", "kw\tA\tfive\n"), InvalidInput);
}

TEST_CASE("load_ontology: referential and structural violations are rejected") {
    // duplicate (keyword, concept) pair, case-insensitively
    CHECK_THROWS_WITH_AS(
        ontology::load_ontology("A\t\n", "kw\tA\t5\nKW\tA\t6\n"),
        doctest::Contains("duplicate link"), InvalidInput);
    // link to unknown concept
    CHECK_THROWS_WITH_AS(ontology::load_ontology("A\t\n", "kw\tB\t5\n"),
                         doctest::Contains("unknown concept"), InvalidInput);
    // hierarchy cycle
    CHECK_THROWS_WITH_AS(ontology::load_ontology("A\tB\nB\tA\n", ""),
                         doctest::Contains("cycle"), InvalidInput);
}

TEST_CASE("add_concept: child insertion shows up in the parent's subtree") {
    Ontology o = ontology::load_ontology(kFigureHierarchy, kFigureLinks);
    Ontology with_child = o.add_concept("Wireless ATM", "ATM General");
    CHECK(with_child.has_concept("Wireless ATM"));
    auto sub = with_child.subtree("ATM General");
    CHECK(std::find(sub.begin(), sub.end(), "Wireless ATM") != sub.end());
    // the prior snapshot is untouched
    CHECK_FALSE(o.has_concept("Wireless ATM"));
}

TEST_CASE("add_concept: roots, duplicates, self-parent") {
    Ontology o;
    o = o.add_concept("Solo");
    REQUIRE(o.concepts().size() == 1);
    CHECK(o.concepts()[0].parent.empty());

    CHECK_THROWS_WITH_AS(o.add_concept("solo"), doctest::Contains("duplicate"), InvalidInput);
    CHECK_THROWS_WITH_AS(o.add_concept("X", "X"), doctest::Contains("parent"), InvalidInput);
    CHECK_THROWS_WITH_AS(o.add_concept("X", "Nowhere"), doctest::Contains("unknown parent"),
                         InvalidInput);
}

TEST_CASE("set_link: create, upsert, and referential check") {
    Ontology o = ontology::load_ontology("Wavelength Division Multiplexing\t\n", "");
    Ontology with_link = o.set_link("wdm", "Wavelength Division Multiplexing", 15);
    REQUIRE(with_link.links().size() == 1);
    CHECK(with_link.links()[0].weight == 15);

    // upsert: same pair, new weight, still a single link
    Ontology adjusted = with_link.set_link("WDM", "wavelength division multiplexing", 10);
    REQUIRE(adjusted.links().size() == 1);
    CHECK(adjusted.links()[0].weight == 10);

    CHECK_THROWS_WITH_AS(o.set_link("x", "Nonexistent", 5), doctest::Contains("unknown concept"),
                         InvalidInput);
    CHECK_THROWS_AS(o.set_link("", "Wavelength Division Multiplexing", 5), InvalidInput);
    CHECK_THROWS_AS(o.set_link("wdm", "Wavelength Division Multiplexing", 21), InvalidInput);
    CHECK_THROWS_AS(o.set_link("a b c d e f g h i", "Wavelength Division Multiplexing", 5),
                    InvalidInput);
}

TEST_CASE("concepts_for: case folding and unknown keywords") {
    Ontology o = ontology::load_ontology(kFigureHierarchy, kFigureLinks);
    CHECK(o.concepts_for("AAL") == o.concepts_for("aal"));
    CHECK(o.concepts_for("Connection Admission CONTROL") ==
          o.concepts_for("connection admission control"));
    CHECK(o.concepts_for("unlisted phrase").empty());
}

TEST_CASE("subtree: leaf, descendants, unknown") {
    Ontology o = ontology::load_ontology(kFigureHierarchy, kFigureLinks);
    CHECK(o.subtree("ATM Introduction") == std::vector<std::string>{"ATM Introduction"});

    Ontology with_child = o.add_concept("Wireless ATM", "ATM General");
    auto sub = with_child.subtree("ATM General");
    CHECK(std::count(sub.begin(), sub.end(), "ATM General") == 1);
    CHECK(std::count(sub.begin(), sub.end(), "Wireless ATM") == 1);

    CHECK_THROWS_AS(o.subtree("No Such Topic"), InvalidInput);
}

TEST_CASE("validate: reports forced violations without throwing") {
    using ontology::Concept;
    using ontology::KeywordLink;

    SUBCASE("parent cycle") {
        auto broken = Ontology::from_parts({Concept{"A", "B"}, Concept{"B", "A"}}, {});
        auto report = broken.validate();
        REQUIRE_FALSE(report.empty());
        bool cycle = false;
        for (const auto& v : report) cycle = cycle || v.problem.find("cycle") != std::string::npos;
        CHECK(cycle);
        // subtree must terminate even on cyclic input
        CHECK_FALSE(broken.subtree("A").empty());
    }
    SUBCASE("weight bound") {
        auto broken = Ontology::from_parts({Concept{"A", ""}}, {KeywordLink{"kw", "A", 0}});
        auto report = broken.validate();
        REQUIRE(report.size() == 1);
        CHECK(report[0].problem.find("weight out of bounds") != std::string::npos);
    }
    SUBCASE("seed is clean") { CHECK(ontology::seed_ontology().validate().empty()); }
}

TEST_CASE("serialize/load round-trip is the identity") {
    Ontology o = ontology::seed_ontology();
    Ontology reloaded =
        ontology::load_ontology(ontology::serialize_hierarchy(o), ontology::serialize_links(o));
    CHECK(o == reloaded);

    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        Ontology random = testsupport::random_ontology(rng, 12, 30);
        Ontology back = ontology::load_ontology(ontology::serialize_hierarchy(random),
                                                ontology::serialize_links(random));
        CHECK(random == back);
    }
}

TEST_CASE("property: weights stay in bounds under random mutation sequences") {
    std::mt19937_64 rng(42);
    Ontology o = ontology::seed_ontology();
    std::uniform_int_distribution<int> weight(-5, 30);
    std::uniform_int_distribution<int> pick_concept(0, static_cast<int>(o.concepts().size()) - 1);
    for (int step = 0; step < 300; ++step) {
        int w = weight(rng);
        std::string target = o.concepts()[static_cast<std::size_t>(pick_concept(rng))].name;
        std::string keyword = "kw" + std::to_string(step % 17);
        try {
            o = o.set_link(keyword, target, w);
        } catch (const InvalidInput&) {
            CHECK((w < ontology::kMinWeight || w > ontology::kMaxWeight));
        }
        for (const auto& link : o.links()) {
            CHECK(link.weight >= ontology::kMinWeight);
            CHECK(link.weight <= ontology::kMaxWeight);
        }
    }
    CHECK(o.validate().empty());
}

TEST_CASE("property: concepts_for is sorted by non-increasing weight") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 10; ++trial) {
        Ontology o = testsupport::random_ontology(rng, 10, 40);
        for (const auto& [canon, links] : o.keyword_table()) {
            auto result = o.concepts_for(canon);
            for (std::size_t i = 1; i < result.size(); ++i)
                CHECK(result[i - 1].weight >= result[i].weight);
        }
    }
}

TEST_CASE("property: subtree(child) is contained in subtree(parent)") {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 10; ++trial) {
        Ontology o = testsupport::random_ontology(rng, 15, 5);
        for (const auto& c : o.concepts()) {
            if (c.parent.empty()) continue;
            auto child_sub = o.subtree(c.name);
            auto parent_sub = o.subtree(c.parent);
            for (const auto& name : child_sub) {
                CHECK(std::find(parent_sub.begin(), parent_sub.end(), name) != parent_sub.end());
            }
        }
    }
}

TEST_CASE("snapshots: mutations never disturb a held copy") {
    Ontology base = ontology::seed_ontology();
    std::string fingerprint = base.fingerprint();
    Ontology mutated = base.add_concept("Traffic Shaping", "ATM General")
                           .set_link("traffic shaping", "Traffic Shaping", 12);
    CHECK(base.fingerprint() == fingerprint);
    CHECK(base.concepts().size() + 1 == mutated.concepts().size());
    CHECK(mutated.fingerprint() != fingerprint);
}
