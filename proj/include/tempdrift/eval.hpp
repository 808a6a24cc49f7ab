#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "tempdrift/corpus.hpp"
#include "tempdrift/model.hpp"

namespace tempdrift {

struct ConfusionCounts {
    size_t tp = 0;
    size_t fp = 0;
    size_t fn = 0;
    size_t tn = 0;

    size_t total() const { return tp + fp + fn + tn; }
};

ConfusionCounts confusion_for_class(const std::vector<Sentiment>& predictions,
                                    const std::vector<Sentiment>& gold, Sentiment cls);

// Unweighted mean of per-class F1 over {negative, positive}. A class with no
// predicted and no actual instances contributes F1 = 0. Throws on empty or
// mismatched inputs.
double macro_f1(const std::vector<Sentiment>& predictions, const std::vector<Sentiment>& gold);

// Relative Performance Drop: (f_tj - f_t0) / f_t0. Throws when f_t0 <= 0.
double rpd(double f_t0, double f_tj);

// Per-bucket macro-F1 plus RPDs against the within bucket. Empty buckets
// report absent values, not zeros.
struct EvalReport {
    std::string method_label;
    std::optional<double> f1_within;
    std::optional<double> f1_short;
    std::optional<double> f1_long;
    std::optional<double> rpd_within_short;
    std::optional<double> rpd_within_long;
    size_t count_within = 0;
    size_t count_short = 0;
    size_t count_long = 0;
};

// Prefixes every eval document with its true year, classifies at threshold
// 0.5, and fills an EvalReport.
EvalReport evaluate(const Classifier& model, const EvalBuckets& buckets);

nlohmann::json report_to_json(const EvalReport& report);

struct AblationReport {
    std::string text_table;
    nlohmann::json json;
    std::string csv;
};

// Fixed-column table (Method, F1 Within, F1 Short, F1 Long, RPD Within-Short,
// RPD Within-Long), values rounded to 4 decimals, best value per column
// flagged with '*'. The JSON carries both unrounded and rounded values.
AblationReport ablation_report(const std::vector<EvalReport>& reports);

}  // namespace tempdrift
