#include "tempdrift/prefixing.hpp"

#include <cctype>
#include <stdexcept>

namespace tempdrift {

namespace {
constexpr std::string_view kYearMarker = "year: ";
constexpr std::string_view kTextMarker = " text: ";
}  // namespace

PrefixedInput prefix_text(int year, std::string_view body) {
    PrefixedInput input;
    input.year = year;
    input.body = body;
    input.rendered.reserve(kYearMarker.size() + kTextMarker.size() + body.size() + 4);
    input.rendered += kYearMarker;
    input.rendered += std::to_string(year);
    input.rendered += kTextMarker;
    input.rendered += body;
    return input;
}

PrefixedInput prefix_document(const TimedDocument& doc) {
    return prefix_text(doc.year, doc.text);
}

std::pair<int, std::string> parse_prefixed(const std::string& rendered) {
    if (rendered.rfind(kYearMarker, 0) != 0) {
        throw std::runtime_error("parse_prefixed: input does not start with \"year: \"");
    }
    const size_t text_pos = rendered.find(kTextMarker, kYearMarker.size());
    if (text_pos == std::string::npos) {
        throw std::runtime_error("parse_prefixed: missing \" text: \" marker");
    }
    const std::string year_str =
        rendered.substr(kYearMarker.size(), text_pos - kYearMarker.size());
    if (year_str.empty()) throw std::runtime_error("parse_prefixed: empty year");
    for (char c : year_str) {
        if (!std::isdigit(static_cast<unsigned char>(c))) {
            throw std::runtime_error("parse_prefixed: non-numeric year '" + year_str + "'");
        }
    }
    return {std::stoi(year_str), rendered.substr(text_pos + kTextMarker.size())};
}

TimedDocument augment_year(const TimedDocument& doc, const YearRange& range, Rng& stream) {
    if (range.min_year > range.max_year) {
        throw std::runtime_error("augment_year: invalid year range");
    }
    TimedDocument out = doc;
    out.year = static_cast<int>(stream.uniform_int(range.min_year, range.max_year));
    return out;
}

}  // namespace tempdrift
