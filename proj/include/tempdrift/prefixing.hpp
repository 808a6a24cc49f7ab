#pragma once

#include <string>

#include "tempdrift/corpus.hpp"
#include "tempdrift/rng.hpp"

namespace tempdrift {

// A date-prefixed classifier input. rendered is always exactly
// "year: <year> text: <body>" and body is the source text, unmodified.
struct PrefixedInput {
    std::string rendered;
    int year = 0;
    std::string body;
};

PrefixedInput prefix_document(const TimedDocument& doc);
PrefixedInput prefix_text(int year, std::string_view body);

// Inverse of prefix_document. The year is the digit run between "year: " and
// the first " text: "; the body is everything after that first marker, so a
// body containing " text: " round-trips. Throws on missing markers or a
// non-numeric year.
std::pair<int, std::string> parse_prefixed(const std::string& rendered);

// Copy of doc with the year redrawn uniformly from [range.min_year,
// range.max_year], both endpoints included. Text and label are untouched.
TimedDocument augment_year(const TimedDocument& doc, const YearRange& range, Rng& stream);

}  // namespace tempdrift
