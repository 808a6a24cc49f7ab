#include "tempdrift/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "tempdrift/prefixing.hpp"

namespace tempdrift {

namespace {

using nlohmann::json;

double class_f1(const ConfusionCounts& c) {
    const double denom = static_cast<double>(2 * c.tp + c.fp + c.fn);
    if (denom == 0.0) return 0.0;
    return 2.0 * static_cast<double>(c.tp) / denom;
}

std::optional<double> bucket_f1(const Classifier& model, const Corpus& bucket) {
    if (bucket.empty()) return std::nullopt;
    std::vector<Sentiment> predictions;
    std::vector<Sentiment> gold;
    predictions.reserve(bucket.size());
    gold.reserve(bucket.size());
    for (const auto& doc : bucket.documents) {
        if (!doc.label) throw std::runtime_error("evaluate: unlabeled document '" + doc.id + "'");
        predictions.push_back(classify(predict_proba(model, prefix_document(doc))));
        gold.push_back(*doc.label);
    }
    return macro_f1(predictions, gold);
}

double round4(double v) {
    return std::round(v * 1e4) / 1e4;
}

std::string fmt4(std::optional<double> v) {
    if (!v) return "-";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", *v);
    return buf;
}

json opt_json(std::optional<double> v) {
    if (!v) return nullptr;
    return *v;
}

json opt_round4(std::optional<double> v) {
    if (!v) return nullptr;
    return round4(*v);
}

}  // namespace

ConfusionCounts confusion_for_class(const std::vector<Sentiment>& predictions,
                                    const std::vector<Sentiment>& gold, Sentiment cls) {
    ConfusionCounts c;
    for (size_t i = 0; i < predictions.size(); ++i) {
        const bool pred_is = predictions[i] == cls;
        const bool gold_is = gold[i] == cls;
        if (pred_is && gold_is) ++c.tp;
        else if (pred_is && !gold_is) ++c.fp;
        else if (!pred_is && gold_is) ++c.fn;
        else ++c.tn;
    }
    return c;
}

double macro_f1(const std::vector<Sentiment>& predictions, const std::vector<Sentiment>& gold) {
    if (predictions.size() != gold.size()) {
        throw std::runtime_error("macro_f1: predictions/gold length mismatch");
    }
    if (predictions.empty()) throw std::runtime_error("macro_f1: empty input");
    const double f1_neg = class_f1(confusion_for_class(predictions, gold, Sentiment::negative));
    const double f1_pos = class_f1(confusion_for_class(predictions, gold, Sentiment::positive));
    return 0.5 * (f1_neg + f1_pos);
}

double rpd(double f_t0, double f_tj) {
    if (!(f_t0 > 0.0)) throw std::runtime_error("rpd: reference score must be > 0");
    return (f_tj - f_t0) / f_t0;
}

EvalReport evaluate(const Classifier& model, const EvalBuckets& buckets) {
    EvalReport report;
    report.f1_within = bucket_f1(model, buckets.within);
    report.f1_short = bucket_f1(model, buckets.short_term);
    report.f1_long = bucket_f1(model, buckets.long_term);
    report.count_within = buckets.within.size();
    report.count_short = buckets.short_term.size();
    report.count_long = buckets.long_term.size();
    if (report.f1_within && *report.f1_within > 0.0) {
        if (report.f1_short) report.rpd_within_short = rpd(*report.f1_within, *report.f1_short);
        if (report.f1_long) report.rpd_within_long = rpd(*report.f1_within, *report.f1_long);
    }
    return report;
}

json report_to_json(const EvalReport& report) {
    json out;
    out["method"] = report.method_label;
    out["f1"] = {{"within", opt_json(report.f1_within)},
                 {"short", opt_json(report.f1_short)},
                 {"long", opt_json(report.f1_long)}};
    out["rpd"] = {{"within_short", opt_json(report.rpd_within_short)},
                  {"within_long", opt_json(report.rpd_within_long)}};
    out["counts"] = {{"within", report.count_within},
                     {"short", report.count_short},
                     {"long", report.count_long}};
    return out;
}

AblationReport ablation_report(const std::vector<EvalReport>& reports) {
    if (reports.empty()) throw std::runtime_error("ablation_report: no reports");

    const std::vector<std::string> headers = {"Method",          "F1 Within",
                                              "F1 Short",        "F1 Long",
                                              "RPD Within-Short", "RPD Within-Long"};
    using Getter = std::optional<double> (*)(const EvalReport&);
    const Getter getters[5] = {
        [](const EvalReport& r) { return r.f1_within; },
        [](const EvalReport& r) { return r.f1_short; },
        [](const EvalReport& r) { return r.f1_long; },
        [](const EvalReport& r) { return r.rpd_within_short; },
        [](const EvalReport& r) { return r.rpd_within_long; },
    };

    // best per column = maximum unrounded value (for RPD, closest to zero
    // from below)
    std::optional<double> best[5];
    for (const auto& r : reports) {
        for (int c = 0; c < 5; ++c) {
            const auto v = getters[c](r);
            if (v && (!best[c] || *v > *best[c])) best[c] = *v;
        }
    }

    std::vector<std::vector<std::string>> cells;
    for (const auto& r : reports) {
        std::vector<std::string> row;
        row.push_back(r.method_label);
        for (int c = 0; c < 5; ++c) {
            const auto v = getters[c](r);
            std::string cell = fmt4(v);
            if (v && best[c] && *v == *best[c]) cell += " *";
            row.push_back(std::move(cell));
        }
        cells.push_back(std::move(row));
    }

    std::vector<size_t> widths(headers.size());
    for (size_t c = 0; c < headers.size(); ++c) {
        widths[c] = headers[c].size();
        for (const auto& row : cells) widths[c] = std::max(widths[c], row[c].size());
    }
    const auto pad = [](const std::string& s, size_t w) {
        return s + std::string(w - s.size(), ' ');
    };

    std::string table;
    for (size_t c = 0; c < headers.size(); ++c) {
        table += pad(headers[c], widths[c]);
        table += c + 1 < headers.size() ? "  " : "\n";
    }
    for (size_t c = 0; c < headers.size(); ++c) {
        table += std::string(widths[c], '-');
        table += c + 1 < headers.size() ? "  " : "\n";
    }
    for (const auto& row : cells) {
        for (size_t c = 0; c < row.size(); ++c) {
            table += pad(row[c], widths[c]);
            table += c + 1 < row.size() ? "  " : "\n";
        }
    }

    json rows = json::array();
    std::string csv = "method,f1_within,f1_short,f1_long,rpd_within_short,rpd_within_long\n";
    for (const auto& r : reports) {
        json row = report_to_json(r);
        row["rounded"] = {{"f1",
                           {{"within", opt_round4(r.f1_within)},
                            {"short", opt_round4(r.f1_short)},
                            {"long", opt_round4(r.f1_long)}}},
                          {"rpd",
                           {{"within_short", opt_round4(r.rpd_within_short)},
                            {"within_long", opt_round4(r.rpd_within_long)}}}};
        rows.push_back(std::move(row));
        csv += r.method_label;
        for (int c = 0; c < 5; ++c) {
            csv += ',';
            const auto v = getters[c](r);
            if (v) csv += fmt4(v);
        }
        csv += '\n';
    }

    AblationReport out;
    out.text_table = std::move(table);
    out.json = {{"rows", std::move(rows)}};
    out.csv = std::move(csv);
    return out;
}

}  // namespace tempdrift
