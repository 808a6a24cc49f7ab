#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace tempdrift {

enum class Sentiment : int { negative = 0, positive = 1 };

struct TimedDocument {
    std::string id;
    std::string text;
    int year = 0;
    std::optional<Sentiment> label;

    bool operator==(const TimedDocument&) const = default;
};

// Ordered collection of documents. Iteration order is load/generation order
// and never changes after construction.
struct Corpus {
    std::string name;
    std::vector<TimedDocument> documents;

    size_t size() const { return documents.size(); }
    bool empty() const { return documents.empty(); }
};

struct YearRange {
    int min_year = 0;
    int max_year = 0;
};

// Temporal evaluation subsets: within the training period, a short gap
// beyond it, and a long gap. Buckets are disjoint by id and fully labeled.
struct EvalBuckets {
    Corpus within;
    Corpus short_term;
    Corpus long_term;
};

struct DocsPerSplit {
    size_t train = 1000;
    size_t unlabeled = 3000;
    size_t within = 1000;
    size_t short_term = 1000;
    size_t long_term = 1000;
};

// Synthetic drift corpus: stable-polarity tokens plus tokens whose polarity
// flips at flip_year. Everything is a pure function of the spec, so two
// generations with the same spec are byte-identical.
//
// The default profile is a temporally skewed setting: gold annotations
// concentrate on old years and the unlabeled pool is older still, while the
// polarity flip sits late in the training range. That is the regime where
// uniform-year augmentation of pseudo-labels has something to correct.
struct DriftSpec {
    size_t stable_pos_tokens = 8;
    size_t stable_neg_tokens = 8;
    size_t drifting_tokens = 8;
    int flip_year = 2017;
    YearRange train_years{2013, 2018};
    // Year pool for the unlabeled split. Must sit inside train_years; unset
    // means the full range.
    std::optional<YearRange> unlabeled_years = YearRange{2013, 2014};
    // Per-year sampling weights for the labeled train split, one entry per
    // year of train_years in order. Unset means uniform.
    std::optional<std::vector<double>> labeled_year_weights =
        std::vector<double>{8, 8, 8, 1, 1, 1};
    int short_gap_years = 2;
    int long_gap_years = 5;
    DocsPerSplit docs_per_split;
    int tokens_per_doc = 5;
    double label_noise_rate = 0.1;
    uint64_t seed = 42;
};

struct DriftCorpora {
    Corpus train;
    Corpus unlabeled;
    EvalBuckets buckets;
};

enum class CorpusFormat { jsonl, csv };

// Throws std::runtime_error naming the document when an invariant is broken:
// year outside [1900, 2100] or text empty after whitespace trim.
void validate_document(const TimedDocument& doc);

// Reads a JSONL or CSV corpus. Records need text and year (or a date string
// whose leading four digits are the year); label 0/1 is optional; missing ids
// are autogenerated as "<name>-<index>". Malformed records raise errors that
// name the line and field.
Corpus load_corpus(const std::string& path, CorpusFormat format);

// JSONL, one object per line, same schema load_corpus reads.
void save_corpus(const Corpus& corpus, const std::string& path);
std::string corpus_to_jsonl(const Corpus& corpus);

// Min and max year over labeled documents only. Throws when none are labeled.
YearRange labeled_year_range(const Corpus& corpus);

// within: year <= train_range.max; short: up to short_gap beyond (inclusive);
// long: everything later. All docs must be labeled.
EvalBuckets bucketize(const Corpus& eval_docs, const YearRange& train_range,
                      int short_gap, int long_gap);

void validate_drift_spec(const DriftSpec& spec);
DriftCorpora generate_drift_corpus(const DriftSpec& spec);

// Partial configs are fine: absent fields keep their defaults.
nlohmann::json drift_spec_to_json(const DriftSpec& spec);
DriftSpec drift_spec_from_json(const nlohmann::json& j);

// Generator vocabulary and ground truth, exposed so tests can recompute
// labels from tokens independently of the generated corpora.
std::vector<std::string> drift_vocabulary(const DriftSpec& spec);
int token_polarity(std::string_view token, int year, int flip_year);
Sentiment majority_label(const std::vector<std::string>& tokens, int year, int flip_year);

}  // namespace tempdrift
