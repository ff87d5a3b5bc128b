#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "support.hpp"
#include "trilogy/errors.hpp"
#include "trilogy/soif.hpp"

using namespace trilogy;
using soif::SoifRecord;

TEST_CASE("parse: single record with one attribute") {
    auto records = soif::parse("@FILE { file:///a\ntitle{5}:\thello\n}\n");
    REQUIRE(records.size() == 1);
    CHECK(records[0].template_type == "FILE");
    CHECK(records[0].url == "file:///a");
    REQUIRE(records[0].attributes.size() == 1);
    CHECK(records[0].attributes[0].first == "title");
    CHECK(records[0].attributes[0].second == "hello");
}

TEST_CASE("parse: empty input and inter-record whitespace") {
    CHECK(soif::parse("").empty());
    CHECK(soif::parse("  \n\t\n").empty());
    auto two = soif::parse(
        "@FILE { u1\n}\n"
        "\n  \n"
        "@FILE { u2\na{2}:\thi\n}\n");
    REQUIRE(two.size() == 2);
    CHECK(two[0].url == "u1");
    CHECK(two[1].attribute("a") == "hi");
}

TEST_CASE("parse: byte count disagreeing with available bytes") {
    CHECK_THROWS_WITH_AS(soif::parse("@FILE { u\ntitle{99}:\thello\n}\n"),
                         doctest::Contains("byte count"), InvalidInput);
    // count shorter than the actual value: the LF check catches it
    CHECK_THROWS_AS(soif::parse("@FILE { u\ntitle{2}:\thello\n}\n"), InvalidInput);
}

TEST_CASE("parse: malformed headers and missing terminators") {
    CHECK_THROWS_WITH_AS(soif::parse("FILE { u\n}\n"), doctest::Contains("'@'"), InvalidInput);
    CHECK_THROWS_AS(soif::parse("@FILE u\n}\n"), InvalidInput);
    CHECK_THROWS_AS(soif::parse("@ { u\n}\n"), InvalidInput);
    CHECK_THROWS_WITH_AS(soif::parse("@FILE { u\na{1}:\tx\n"), doctest::Contains("closing"),
                         InvalidInput);
    CHECK_THROWS_AS(soif::parse("@FILE { u\na{x}:\tv\n}\n"), InvalidInput);
}

TEST_CASE("parse: value bytes may contain newlines and braces") {
    SoifRecord r;
    r.template_type = "FILE";
    r.url = "file:///tricky";
    r.attributes = {{"body", "line one\n}\n@FILE { fake\nmore"}};
    auto back = soif::parse(soif::serialize_record(r));
    REQUIRE(back.size() == 1);
    CHECK(back[0] == r);
}

TEST_CASE("serialize: attribute name rules") {
    SoifRecord r;
    r.template_type = "FILE";
    r.url = "u";
    r.attributes = {{"bad name", "v"}};
    CHECK_THROWS_WITH_AS(soif::serialize_record(r), doctest::Contains("attribute name"),
                         InvalidInput);
    r.attributes = {{"colon:name", "v"}};
    CHECK_THROWS_AS(soif::serialize_record(r), InvalidInput);
    r.attributes = {{"", "v"}};
    CHECK_THROWS_AS(soif::serialize_record(r), InvalidInput);
    CHECK(soif::serialize(std::vector<SoifRecord>{}).empty());
}

namespace {

SoifRecord random_soif_record(std::mt19937_64& rng, bool allow_large) {
    static const char* templates[] = {"FILE", "conference_article", "thesis", "book"};
    SoifRecord r;
    r.template_type = templates[std::uniform_int_distribution<int>(0, 3)(rng)];
    r.url = "file:///r/" + std::to_string(rng());
    int attr_count = std::uniform_int_distribution<int>(0, 6)(rng);
    for (int a = 0; a < attr_count; ++a) {
        std::string name = "attr" + std::to_string(a);
        std::size_t max_len = 64;
        if (allow_large && std::uniform_int_distribution<int>(0, 20)(rng) == 0)
            max_len = 64 * 1024;
        std::size_t len = std::uniform_int_distribution<std::size_t>(0, max_len)(rng);
        std::string value(len, '\0');
        for (char& c : value) c = static_cast<char>(std::uniform_int_distribution<int>(0, 255)(rng));
        r.attributes.emplace_back(std::move(name), std::move(value));
    }
    return r;
}

}  // namespace

TEST_CASE("property: parse(serialize(records)) == records over random byte values") {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<SoifRecord> records;
        int n = std::uniform_int_distribution<int>(0, 4)(rng);
        for (int i = 0; i < n; ++i) records.push_back(random_soif_record(rng, true));
        std::string wire = soif::serialize(records);
        std::vector<SoifRecord> back = soif::parse(wire);
        REQUIRE(back.size() == records.size());
        for (std::size_t i = 0; i < records.size(); ++i) CHECK(back[i] == records[i]);
        // and byte-exactly stable through a second generation
        CHECK(soif::serialize(back) == wire);
    }
}

TEST_CASE("fuzz: mutated and random inputs never crash or over-read") {
    std::mt19937_64 rng(99);
    int parsed_ok = 0;
    int rejected = 0;
    for (int trial = 0; trial < 2000; ++trial) {
        std::string input;
        if (trial % 2 == 0) {
            // mutate a valid serialization
            std::vector<SoifRecord> records{random_soif_record(rng, false)};
            input = soif::serialize(records);
            int flips = std::uniform_int_distribution<int>(1, 6)(rng);
            for (int f = 0; f < flips && !input.empty(); ++f) {
                std::size_t pos =
                    std::uniform_int_distribution<std::size_t>(0, input.size() - 1)(rng);
                input[pos] = static_cast<char>(std::uniform_int_distribution<int>(0, 255)(rng));
            }
            if (std::uniform_int_distribution<int>(0, 3)(rng) == 0)
                input.resize(std::uniform_int_distribution<std::size_t>(0, input.size())(rng));
        } else {
            std::size_t len = std::uniform_int_distribution<std::size_t>(0, 512)(rng);
            input.resize(len);
            for (char& c : input)
                c = static_cast<char>(std::uniform_int_distribution<int>(0, 255)(rng));
        }
        try {
            soif::parse(input);
            ++parsed_ok;
        } catch (const InvalidInput&) {
            ++rejected;
        }
    }
    CHECK(parsed_ok + rejected == 2000);
    CHECK(rejected > 0);
}

TEST_CASE("fuzz: adversarial byte counts are rejected, not trusted") {
    CHECK_THROWS_AS(soif::parse("@FILE { u\na{99999999999999999999999}:\tv\n}\n"), InvalidInput);
    CHECK_THROWS_AS(soif::parse("@FILE { u\na{18446744073709551615}:\tv\n}\n"), InvalidInput);
}

TEST_CASE("gather: html extracts the document title") {
    std::string html =
        "<html><head><title>Cell Level Simulation in ATM Networks</title>\n"
        "<meta name=\"keywords\" content=\"atm, simulation\"></head>\n"
        "<body><h1>Intro</h1><p>Cells &amp; queues.</p>"
        "<script>var x = '<title>nope</title>';</script></body></html>";
    auto r = soif::gather(html, "html", "file:///doc.html", 1700000000);
    CHECK(r.template_type == "FILE");
    CHECK(r.url == "file:///doc.html");
    CHECK(r.attribute("title") == "Cell Level Simulation in ATM Networks");
    CHECK(r.attribute("keywords") == "atm, simulation");
    CHECK(r.attribute("abstract").find("Cells & queues.") != std::string::npos);
    CHECK(r.attribute("abstract").find("nope") == std::string::npos);
    CHECK(r.attribute("gathered-time") == "1700000000");
    CHECK(r.attribute("file-size") == std::to_string(html.size()));
}

TEST_CASE("gather: html falls back to the first heading") {
    auto r = soif::gather("<h2>Fallback Heading</h2><p>body</p>", "html", "u", 0);
    CHECK(r.attribute("title") == "Fallback Heading");
}

TEST_CASE("gather: text uses the first non-empty line as title") {
    auto r = soif::gather("\n\n  X  \nrest of the document", "text", "file:///a.txt", 123);
    CHECK(r.attribute("title") == "X");
    CHECK(r.attribute("abstract").starts_with("X"));
    CHECK(r.attribute("keywords").empty());
}

TEST_CASE("gather: abstract truncates at a UTF-8 boundary") {
    std::string text = "title line\n";
    while (text.size() < 498) text += "x";
    text += "\xC3\xA9";  // two-byte sequence straddling the 500-byte mark
    text += " tail beyond the cut";
    auto r = soif::gather(text, "text", "u", 0);
    CHECK(r.attribute("abstract").size() <= soif::kAbstractByteLimit);
    // never ends mid-sequence
    unsigned char last = static_cast<unsigned char>(r.attribute("abstract").back());
    CHECK((last & 0xC0) != 0x80);
}

TEST_CASE("gather: bib source maps fields to attributes") {
    std::string bib =
        R"({"kind":"thesis","fields":{"title":"T","author":"A","institution":"I","year":"1998","degree":"PhD","keywords":"atm","abstract":"about atm"}})";
    auto r = soif::gather(bib, "bib", "bib:thesis:x", 5);
    CHECK(r.template_type == "thesis");
    CHECK(r.attribute("title") == "T");
    CHECK(r.attribute("degree") == "PhD");
    CHECK(r.attribute("abstract") == "about atm");
    CHECK_THROWS_AS(soif::gather(R"({"kind":"poem","fields":{}})", "bib", "u", 5), InvalidInput);
    CHECK_THROWS_AS(soif::gather("not json", "bib", "u", 5), InvalidInput);
}

TEST_CASE("gather: empty source and unknown hints are errors") {
    CHECK_THROWS_AS(soif::gather("", "text", "u"), InvalidInput);
    CHECK_THROWS_WITH_AS(soif::gather("x", "pdf", "u"), doctest::Contains("media hint"),
                         InvalidInput);
}

TEST_CASE("gather: deterministic except gathered-time") {
    std::string source = "Some Document\nwith a body about wdm networks";
    auto a = soif::gather(source, "text", "file:///d.txt", 100);
    auto b = soif::gather(source, "text", "file:///d.txt", 200);
    CHECK(a.attribute("gathered-time") != b.attribute("gathered-time"));
    a.set_attribute("gathered-time", "");
    b.set_attribute("gathered-time", "");
    CHECK(a == b);
}

TEST_CASE("gathered records serialize and round-trip") {
    auto r = soif::gather("Title\nBody text here.", "text", "file:///rt.txt", 42);
    auto back = soif::parse(soif::serialize_record(r));
    REQUIRE(back.size() == 1);
    CHECK(back[0] == r);
}
