#include <array>

#include "doctest.h"

#include "tempdrift/prefixing.hpp"

using namespace tempdrift;

TEST_CASE("prefix_document renders the exact date-prefix format") {
    TimedDocument doc{"a", "I really do enjoy being single", 2018, Sentiment::positive};
    const PrefixedInput input = prefix_document(doc);
    CHECK(input.rendered == "year: 2018 text: I really do enjoy being single");
    CHECK(input.year == 2018);
    CHECK(input.body == doc.text);

    doc.year = 2023;
    CHECK(prefix_document(doc).rendered == "year: 2023 text: I really do enjoy being single");
    CHECK(prefix_text(2013, "I really do enjoy being single").rendered ==
          "year: 2013 text: I really do enjoy being single");
}

TEST_CASE("parse_prefixed inverts prefix_document") {
    const auto [year, body] = parse_prefixed("year: 2013 text: hi");
    CHECK(year == 2013);
    CHECK(body == "hi");

    SUBCASE("first-occurrence rule keeps embedded markers in the body") {
        const auto [y, b] = parse_prefixed("year: 2018 text: a text: b");
        CHECK(y == 2018);
        CHECK(b == "a text: b");
    }
    SUBCASE("a body containing markers round-trips") {
        const std::string body = "text: year: 1999 text: nested";
        const auto [y, b] = parse_prefixed(prefix_text(2015, body).rendered);
        CHECK(y == 2015);
        CHECK(b == body);
    }
    SUBCASE("errors") {
        CHECK_THROWS_AS(parse_prefixed("hello"), std::runtime_error);
        CHECK_THROWS_AS(parse_prefixed("year: 2013 no marker"), std::runtime_error);
        CHECK_THROWS_AS(parse_prefixed("year: 20x3 text: hi"), std::runtime_error);
        CHECK_THROWS_AS(parse_prefixed("year: -13 text: hi"), std::runtime_error);
    }
}

TEST_CASE("round-trip property over randomized documents") {
    const std::array<std::string_view, 7> pieces = {
        "plain", "text:", "year:", "::", "number 2018", "\ttabbed", "trailing "};
    Rng rng = stream_for(77, "roundtrip", 0);
    for (int i = 0; i < 2000; ++i) {
        std::string body;
        const int n = static_cast<int>(rng.uniform_int(1, 5));
        for (int k = 0; k < n; ++k) {
            if (k) body += ' ';
            body += pieces[static_cast<size_t>(rng.uniform_int(0, pieces.size() - 1))];
        }
        const int year = static_cast<int>(rng.uniform_int(1900, 2100));
        const auto [py, pb] = parse_prefixed(prefix_text(year, body).rendered);
        REQUIRE(py == year);
        REQUIRE(pb == body);
    }
}

TEST_CASE("augment_year draws inside the range and touches nothing else") {
    const TimedDocument doc{"doc-1", "fixed text", 2018, Sentiment::positive};

    SUBCASE("degenerate range") {
        Rng rng = stream_for(1, "augment", doc.id);
        CHECK(augment_year(doc, {2018, 2018}, rng).year == 2018);
    }
    SUBCASE("determinism per (doc id, seed)") {
        Rng a = stream_for(5, "augment-year", doc.id);
        Rng b = stream_for(5, "augment-year", doc.id);
        CHECK(augment_year(doc, {2013, 2021}, a).year == augment_year(doc, {2013, 2021}, b).year);
    }
    SUBCASE("text and label untouched, source unmodified") {
        Rng rng = stream_for(2, "augment", doc.id);
        const TimedDocument out = augment_year(doc, {2013, 2021}, rng);
        CHECK(out.text == doc.text);
        CHECK(out.label == doc.label);
        CHECK(out.id == doc.id);
        CHECK(doc.year == 2018);
    }
    SUBCASE("invalid range") {
        Rng rng = stream_for(3, "augment", doc.id);
        CHECK_THROWS_AS(augment_year(doc, {2021, 2013}, rng), std::runtime_error);
    }
}

TEST_CASE("augmented years are uniform over the inclusive range") {
    const YearRange range{2013, 2021};
    std::array<int, 9> counts{};
    const int draws = 90000;
    for (int i = 0; i < draws; ++i) {
        TimedDocument doc{"p" + std::to_string(i), "t", 2018, std::nullopt};
        Rng rng = stream_for(424242, "uniformity", doc.id);
        const int year = augment_year(doc, range, rng).year;
        REQUIRE(year >= range.min_year);
        REQUIRE(year <= range.max_year);
        ++counts[static_cast<size_t>(year - range.min_year)];
    }
    const double expected = draws / 9.0;
    for (int c : counts) {
        CHECK(c > expected * 0.97);
        CHECK(c < expected * 1.03);
    }
    // both endpoints reachable
    CHECK(counts.front() > 0);
    CHECK(counts.back() > 0);
}
