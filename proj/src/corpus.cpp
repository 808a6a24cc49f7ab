#include "tempdrift/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include "json.hpp"

#include "tempdrift/rng.hpp"

namespace tempdrift {

namespace {

using nlohmann::json;

bool all_whitespace(std::string_view s) {
    for (char c : s) {
        if (!std::isspace(static_cast<unsigned char>(c))) return false;
    }
    return true;
}

[[noreturn]] void record_error(const std::string& path, size_t line, const std::string& what) {
    throw std::runtime_error(path + ":" + std::to_string(line) + ": " + what);
}

int year_from_date(const std::string& date, const std::string& path, size_t line) {
    if (date.size() < 4) record_error(path, line, "field 'date': too short for a leading 4-digit year");
    for (size_t i = 0; i < 4; ++i) {
        if (!std::isdigit(static_cast<unsigned char>(date[i]))) {
            record_error(path, line, "field 'date': unparsable year in '" + date + "'");
        }
    }
    return std::stoi(date.substr(0, 4));
}

std::optional<Sentiment> label_from_int(long v, const std::string& path, size_t line) {
    if (v == 0) return Sentiment::negative;
    if (v == 1) return Sentiment::positive;
    record_error(path, line, "field 'label': expected 0 or 1, got " + std::to_string(v));
}

std::string file_stem(const std::string& path) {
    const size_t slash = path.find_last_of("/\\");
    const size_t start = slash == std::string::npos ? 0 : slash + 1;
    const size_t dot = path.find_last_of('.');
    const size_t end = (dot == std::string::npos || dot < start) ? path.size() : dot;
    return path.substr(start, end - start);
}

TimedDocument doc_from_json(const json& rec, const std::string& path, size_t line,
                            const std::string& stem, size_t index) {
    if (!rec.is_object()) record_error(path, line, "record is not a JSON object");

    TimedDocument doc;
    if (rec.contains("id")) {
        if (!rec["id"].is_string()) record_error(path, line, "field 'id': not a string");
        doc.id = rec["id"].get<std::string>();
    } else {
        doc.id = stem + "-" + std::to_string(index);
    }

    if (!rec.contains("text") || !rec["text"].is_string()) {
        record_error(path, line, "field 'text': missing or not a string");
    }
    doc.text = rec["text"].get<std::string>();

    if (rec.contains("year")) {
        if (!rec["year"].is_number_integer()) record_error(path, line, "field 'year': not an integer");
        doc.year = rec["year"].get<int>();
    } else if (rec.contains("date")) {
        if (!rec["date"].is_string()) record_error(path, line, "field 'date': not a string");
        doc.year = year_from_date(rec["date"].get<std::string>(), path, line);
    } else {
        record_error(path, line, "field 'year': missing (no 'year' or 'date')");
    }

    if (rec.contains("label") && !rec["label"].is_null()) {
        if (!rec["label"].is_number_integer()) record_error(path, line, "field 'label': not an integer");
        doc.label = label_from_int(rec["label"].get<long>(), path, line);
    }
    return doc;
}

Corpus load_jsonl(const std::string& path, std::istream& in) {
    Corpus corpus;
    corpus.name = file_stem(path);
    std::string line;
    size_t lineno = 0;
    size_t index = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || all_whitespace(line)) continue;
        json rec;
        try {
            rec = json::parse(line);
        } catch (const json::parse_error& e) {
            record_error(path, lineno, std::string("invalid JSON: ") + e.what());
        }
        TimedDocument doc = doc_from_json(rec, path, lineno, corpus.name, index);
        try {
            validate_document(doc);
        } catch (const std::exception& e) {
            record_error(path, lineno, e.what());
        }
        corpus.documents.push_back(std::move(doc));
        ++index;
    }
    return corpus;
}

std::vector<std::string> parse_csv_row(const std::string& line, const std::string& path,
                                       size_t lineno) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    size_t i = 0;
    while (i < line.size()) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    i += 2;
                    continue;
                }
                quoted = false;
                ++i;
            } else {
                cur += c;
                ++i;
            }
        } else if (c == '"' && cur.empty()) {
            quoted = true;
            ++i;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
            ++i;
        } else {
            cur += c;
            ++i;
        }
    }
    if (quoted) record_error(path, lineno, "unterminated quoted field");
    fields.push_back(std::move(cur));
    return fields;
}

Corpus load_csv(const std::string& path, std::istream& in) {
    Corpus corpus;
    corpus.name = file_stem(path);

    std::string header_line;
    if (!std::getline(in, header_line)) return corpus;  // empty file, empty corpus
    if (!header_line.empty() && header_line.back() == '\r') header_line.pop_back();

    const auto header = parse_csv_row(header_line, path, 1);
    int col_id = -1, col_text = -1, col_year = -1, col_date = -1, col_label = -1;
    for (size_t i = 0; i < header.size(); ++i) {
        if (header[i] == "id") col_id = static_cast<int>(i);
        else if (header[i] == "text") col_text = static_cast<int>(i);
        else if (header[i] == "year") col_year = static_cast<int>(i);
        else if (header[i] == "date") col_date = static_cast<int>(i);
        else if (header[i] == "label") col_label = static_cast<int>(i);
    }
    if (col_text < 0) record_error(path, 1, "header: missing 'text' column");
    if (col_year < 0 && col_date < 0) record_error(path, 1, "header: missing 'year' or 'date' column");

    std::string line;
    size_t lineno = 1;
    size_t index = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = parse_csv_row(line, path, lineno);
        if (fields.size() != header.size()) {
            record_error(path, lineno, "expected " + std::to_string(header.size()) +
                                           " fields, got " + std::to_string(fields.size()));
        }
        TimedDocument doc;
        doc.id = (col_id >= 0 && !fields[col_id].empty())
                     ? fields[col_id]
                     : corpus.name + "-" + std::to_string(index);
        doc.text = fields[col_text];
        if (col_year >= 0 && !fields[col_year].empty()) {
            try {
                size_t pos = 0;
                doc.year = std::stoi(fields[col_year], &pos);
                if (pos != fields[col_year].size()) throw std::invalid_argument("trailing");
            } catch (const std::exception&) {
                record_error(path, lineno, "field 'year': unparsable year '" + fields[col_year] + "'");
            }
        } else if (col_date >= 0 && !fields[col_date].empty()) {
            doc.year = year_from_date(fields[col_date], path, lineno);
        } else {
            record_error(path, lineno, "field 'year': missing value");
        }
        if (col_label >= 0 && !fields[col_label].empty()) {
            if (fields[col_label] == "0") doc.label = Sentiment::negative;
            else if (fields[col_label] == "1") doc.label = Sentiment::positive;
            else record_error(path, lineno, "field 'label': expected 0 or 1, got '" + fields[col_label] + "'");
        }
        try {
            validate_document(doc);
        } catch (const std::exception& e) {
            record_error(path, lineno, e.what());
        }
        corpus.documents.push_back(std::move(doc));
        ++index;
    }
    return corpus;
}

}  // namespace

void validate_document(const TimedDocument& doc) {
    if (doc.year < 1900 || doc.year > 2100) {
        throw std::runtime_error("document '" + doc.id + "': year " + std::to_string(doc.year) +
                                 " outside [1900, 2100]");
    }
    if (all_whitespace(doc.text)) {
        throw std::runtime_error("document '" + doc.id + "': text empty after whitespace trim");
    }
}

Corpus load_corpus(const std::string& path, CorpusFormat format) {
    std::ifstream in(path);
    if (!in.is_open()) throw std::runtime_error("load_corpus: cannot open file: " + path);

    Corpus corpus = format == CorpusFormat::jsonl ? load_jsonl(path, in) : load_csv(path, in);

    std::unordered_set<std::string> seen;
    for (const auto& doc : corpus.documents) {
        if (!seen.insert(doc.id).second) {
            throw std::runtime_error(path + ": duplicate id '" + doc.id + "'");
        }
    }
    return corpus;
}

std::string corpus_to_jsonl(const Corpus& corpus) {
    std::string out;
    for (const auto& doc : corpus.documents) {
        json rec;
        rec["id"] = doc.id;
        rec["text"] = doc.text;
        rec["year"] = doc.year;
        if (doc.label) rec["label"] = static_cast<int>(*doc.label);
        out += rec.dump();
        out += '\n';
    }
    return out;
}

void save_corpus(const Corpus& corpus, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out.is_open()) throw std::runtime_error("save_corpus: cannot open file: " + path);
    out << corpus_to_jsonl(corpus);
    if (!out) throw std::runtime_error("save_corpus: write failed: " + path);
}

YearRange labeled_year_range(const Corpus& corpus) {
    bool any = false;
    YearRange range{0, 0};
    for (const auto& doc : corpus.documents) {
        if (!doc.label) continue;
        if (!any) {
            range = {doc.year, doc.year};
            any = true;
        } else {
            range.min_year = std::min(range.min_year, doc.year);
            range.max_year = std::max(range.max_year, doc.year);
        }
    }
    if (!any) throw std::runtime_error("labeled_year_range: corpus '" + corpus.name +
                                       "' has no labeled documents");
    return range;
}

EvalBuckets bucketize(const Corpus& eval_docs, const YearRange& train_range,
                      int short_gap, int long_gap) {
    if (short_gap >= long_gap) {
        throw std::runtime_error("bucketize: short_gap must be < long_gap");
    }
    EvalBuckets buckets;
    buckets.within.name = "within";
    buckets.short_term.name = "short";
    buckets.long_term.name = "long";
    for (const auto& doc : eval_docs.documents) {
        if (!doc.label) {
            throw std::runtime_error("bucketize: unlabeled document '" + doc.id + "'");
        }
        if (doc.year <= train_range.max_year) {
            buckets.within.documents.push_back(doc);
        } else if (doc.year <= train_range.max_year + short_gap) {
            buckets.short_term.documents.push_back(doc);
        } else {
            buckets.long_term.documents.push_back(doc);
        }
    }
    return buckets;
}

void validate_drift_spec(const DriftSpec& spec) {
    if (spec.train_years.min_year > spec.train_years.max_year) {
        throw std::runtime_error("drift spec: train_years min > max");
    }
    if (spec.flip_year <= spec.train_years.min_year) {
        throw std::runtime_error("drift spec: flip_year must be strictly after train_years.min");
    }
    if (spec.tokens_per_doc < 1 || spec.tokens_per_doc % 2 == 0) {
        throw std::runtime_error("drift spec: tokens_per_doc must be odd and >= 1");
    }
    if (spec.label_noise_rate < 0.0 || spec.label_noise_rate >= 1.0) {
        throw std::runtime_error("drift spec: label_noise_rate must be in [0, 1)");
    }
    if (spec.stable_pos_tokens + spec.stable_neg_tokens + spec.drifting_tokens == 0) {
        throw std::runtime_error("drift spec: vocabulary is empty");
    }
    if (spec.short_gap_years < 1 || spec.long_gap_years <= spec.short_gap_years) {
        throw std::runtime_error("drift spec: need 1 <= short_gap_years < long_gap_years");
    }
    if (spec.unlabeled_years) {
        if (spec.unlabeled_years->min_year > spec.unlabeled_years->max_year ||
            spec.unlabeled_years->min_year < spec.train_years.min_year ||
            spec.unlabeled_years->max_year > spec.train_years.max_year) {
            throw std::runtime_error("drift spec: unlabeled_years must sit inside train_years");
        }
    }
    if (spec.labeled_year_weights) {
        const size_t span = static_cast<size_t>(spec.train_years.max_year -
                                                spec.train_years.min_year) + 1;
        if (spec.labeled_year_weights->size() != span) {
            throw std::runtime_error("drift spec: labeled_year_weights needs one entry per train year");
        }
        double total = 0.0;
        for (double w : *spec.labeled_year_weights) {
            if (w < 0.0) throw std::runtime_error("drift spec: labeled_year_weights must be >= 0");
            total += w;
        }
        if (!(total > 0.0)) throw std::runtime_error("drift spec: labeled_year_weights sum to zero");
    }
}

std::vector<std::string> drift_vocabulary(const DriftSpec& spec) {
    std::vector<std::string> vocab;
    vocab.reserve(spec.stable_pos_tokens + spec.stable_neg_tokens + spec.drifting_tokens);
    for (size_t i = 0; i < spec.stable_pos_tokens; ++i) vocab.push_back("sp" + std::to_string(i));
    for (size_t i = 0; i < spec.stable_neg_tokens; ++i) vocab.push_back("sn" + std::to_string(i));
    for (size_t i = 0; i < spec.drifting_tokens; ++i) vocab.push_back("dr" + std::to_string(i));
    return vocab;
}

int token_polarity(std::string_view token, int year, int flip_year) {
    if (token.starts_with("sp")) return 1;
    if (token.starts_with("sn")) return -1;
    if (token.starts_with("dr")) return year < flip_year ? 1 : -1;
    throw std::runtime_error("token_polarity: unknown token '" + std::string(token) + "'");
}

Sentiment majority_label(const std::vector<std::string>& tokens, int year, int flip_year) {
    int sum = 0;
    for (const auto& t : tokens) sum += token_polarity(t, year, flip_year);
    return sum > 0 ? Sentiment::positive : Sentiment::negative;
}

namespace {

int draw_weighted_year(Rng& rng, YearRange years, const std::vector<double>& weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    const double r = rng.uniform01() * total;
    double cum = 0.0;
    for (size_t i = 0; i < weights.size(); ++i) {
        cum += weights[i];
        if (r < cum) return years.min_year + static_cast<int>(i);
    }
    return years.max_year;
}

// One document per (seed, split, index) stream; draw order is fixed:
// year, then tokens, then the label-noise coin.
Corpus generate_split(const DriftSpec& spec, const std::vector<std::string>& vocab,
                      const std::string& split, size_t count, YearRange years, bool labeled,
                      const std::vector<double>* year_weights = nullptr) {
    Corpus corpus;
    corpus.name = split;
    corpus.documents.reserve(count);
    for (size_t i = 0; i < count; ++i) {
        Rng rng = stream_for(spec.seed, split, static_cast<uint64_t>(i));
        TimedDocument doc;
        doc.id = split + "-" + std::to_string(i);
        doc.year = year_weights
                       ? draw_weighted_year(rng, years, *year_weights)
                       : static_cast<int>(rng.uniform_int(years.min_year, years.max_year));
        std::vector<std::string> tokens;
        tokens.reserve(spec.tokens_per_doc);
        for (int t = 0; t < spec.tokens_per_doc; ++t) {
            const auto v = rng.uniform_int(0, static_cast<int64_t>(vocab.size()) - 1);
            tokens.push_back(vocab[static_cast<size_t>(v)]);
        }
        for (size_t t = 0; t < tokens.size(); ++t) {
            if (t) doc.text += ' ';
            doc.text += tokens[t];
        }
        if (labeled) {
            Sentiment label = majority_label(tokens, doc.year, spec.flip_year);
            if (spec.label_noise_rate > 0.0 && rng.uniform01() < spec.label_noise_rate) {
                label = label == Sentiment::positive ? Sentiment::negative : Sentiment::positive;
            }
            doc.label = label;
        }
        corpus.documents.push_back(std::move(doc));
    }
    return corpus;
}

}  // namespace

nlohmann::json drift_spec_to_json(const DriftSpec& spec) {
    json j;
    j["stable_pos_tokens"] = spec.stable_pos_tokens;
    j["stable_neg_tokens"] = spec.stable_neg_tokens;
    j["drifting_tokens"] = spec.drifting_tokens;
    j["flip_year"] = spec.flip_year;
    j["train_years"] = {{"min_year", spec.train_years.min_year},
                        {"max_year", spec.train_years.max_year}};
    if (spec.unlabeled_years) {
        j["unlabeled_years"] = {{"min_year", spec.unlabeled_years->min_year},
                                {"max_year", spec.unlabeled_years->max_year}};
    } else {
        j["unlabeled_years"] = nullptr;
    }
    if (spec.labeled_year_weights) {
        j["labeled_year_weights"] = *spec.labeled_year_weights;
    } else {
        j["labeled_year_weights"] = nullptr;
    }
    j["short_gap_years"] = spec.short_gap_years;
    j["long_gap_years"] = spec.long_gap_years;
    j["docs_per_split"] = {{"train", spec.docs_per_split.train},
                           {"unlabeled", spec.docs_per_split.unlabeled},
                           {"within", spec.docs_per_split.within},
                           {"short", spec.docs_per_split.short_term},
                           {"long", spec.docs_per_split.long_term}};
    j["tokens_per_doc"] = spec.tokens_per_doc;
    j["label_noise_rate"] = spec.label_noise_rate;
    j["seed"] = spec.seed;
    return j;
}

namespace {

YearRange year_range_from_json(const json& j) {
    return YearRange{j.at("min_year").get<int>(), j.at("max_year").get<int>()};
}

}  // namespace

DriftSpec drift_spec_from_json(const nlohmann::json& j) {
    DriftSpec spec;
    if (j.contains("stable_pos_tokens")) spec.stable_pos_tokens = j["stable_pos_tokens"].get<size_t>();
    if (j.contains("stable_neg_tokens")) spec.stable_neg_tokens = j["stable_neg_tokens"].get<size_t>();
    if (j.contains("drifting_tokens")) spec.drifting_tokens = j["drifting_tokens"].get<size_t>();
    if (j.contains("flip_year")) spec.flip_year = j["flip_year"].get<int>();
    if (j.contains("train_years")) spec.train_years = year_range_from_json(j["train_years"]);
    if (j.contains("unlabeled_years")) {
        if (j["unlabeled_years"].is_null()) spec.unlabeled_years.reset();  // full range
        else spec.unlabeled_years = year_range_from_json(j["unlabeled_years"]);
    }
    if (j.contains("labeled_year_weights")) {
        if (j["labeled_year_weights"].is_null()) spec.labeled_year_weights.reset();  // uniform
        else spec.labeled_year_weights = j["labeled_year_weights"].get<std::vector<double>>();
    }
    if (j.contains("short_gap_years")) spec.short_gap_years = j["short_gap_years"].get<int>();
    if (j.contains("long_gap_years")) spec.long_gap_years = j["long_gap_years"].get<int>();
    if (j.contains("docs_per_split")) {
        const auto& d = j["docs_per_split"];
        if (d.contains("train")) spec.docs_per_split.train = d["train"].get<size_t>();
        if (d.contains("unlabeled")) spec.docs_per_split.unlabeled = d["unlabeled"].get<size_t>();
        if (d.contains("within")) spec.docs_per_split.within = d["within"].get<size_t>();
        if (d.contains("short")) spec.docs_per_split.short_term = d["short"].get<size_t>();
        if (d.contains("long")) spec.docs_per_split.long_term = d["long"].get<size_t>();
    }
    if (j.contains("tokens_per_doc")) spec.tokens_per_doc = j["tokens_per_doc"].get<int>();
    if (j.contains("label_noise_rate")) spec.label_noise_rate = j["label_noise_rate"].get<double>();
    if (j.contains("seed")) spec.seed = j["seed"].get<uint64_t>();
    validate_drift_spec(spec);
    return spec;
}

DriftCorpora generate_drift_corpus(const DriftSpec& spec) {
    validate_drift_spec(spec);
    const auto vocab = drift_vocabulary(spec);
    const YearRange unlabeled_years = spec.unlabeled_years.value_or(spec.train_years);
    const int train_max = spec.train_years.max_year;
    const YearRange short_years{train_max + 1, train_max + spec.short_gap_years};
    const YearRange long_years{train_max + spec.short_gap_years + 1,
                               train_max + spec.long_gap_years};

    DriftCorpora out;
    out.train = generate_split(spec, vocab, "train", spec.docs_per_split.train,
                               spec.train_years, true,
                               spec.labeled_year_weights ? &*spec.labeled_year_weights : nullptr);
    out.unlabeled = generate_split(spec, vocab, "unlabeled", spec.docs_per_split.unlabeled,
                                   unlabeled_years, false);
    out.buckets.within = generate_split(spec, vocab, "within", spec.docs_per_split.within,
                                        spec.train_years, true);
    out.buckets.short_term = generate_split(spec, vocab, "short", spec.docs_per_split.short_term,
                                            short_years, true);
    out.buckets.long_term = generate_split(spec, vocab, "long", spec.docs_per_split.long_term,
                                           long_years, true);
    return out;
}

}  // namespace tempdrift
