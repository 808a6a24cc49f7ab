#include <cmath>

#include "doctest.h"

#include "tempdrift/eval.hpp"
#include "tempdrift/prefixing.hpp"
#include "tempdrift/rng.hpp"

using namespace tempdrift;

namespace {

// From-definition oracle: count per-class predicted/actual/true-positive
// totals independently, then take the harmonic mean of precision and recall.
// With p = tp/predicted and r = tp/actual, 2pr/(p+r) reduces to the integer
// ratio 2*tp/(predicted+actual), which keeps the comparison exact.
double macro_f1_oracle(const std::vector<Sentiment>& preds, const std::vector<Sentiment>& gold) {
    double sum = 0.0;
    for (Sentiment cls : {Sentiment::negative, Sentiment::positive}) {
        size_t tp = 0, predicted = 0, actual = 0;
        for (size_t i = 0; i < preds.size(); ++i) {
            if (preds[i] == cls) ++predicted;
            if (gold[i] == cls) ++actual;
            if (preds[i] == cls && gold[i] == cls) ++tp;
        }
        sum += (predicted + actual) ? 2.0 * static_cast<double>(tp) / (predicted + actual) : 0.0;
    }
    return sum / 2.0;
}

std::vector<Sentiment> bits_to_labels(unsigned bits, size_t n) {
    std::vector<Sentiment> labels(n);
    for (size_t i = 0; i < n; ++i) {
        labels[i] = (bits >> i) & 1u ? Sentiment::positive : Sentiment::negative;
    }
    return labels;
}

}  // namespace

TEST_CASE("macro_f1 matches hand-worked examples") {
    using S = Sentiment;
    CHECK(macro_f1({S::positive, S::negative}, {S::positive, S::negative}) == 1.0);
    // preds [1,0,1,0] vs gold [1,1,0,0]: both per-class F1s are 0.5
    CHECK(macro_f1({S::positive, S::negative, S::positive, S::negative},
                   {S::positive, S::positive, S::negative, S::negative}) == 0.5);
    // absent class convention: no positive predicted, none actual, F1_pos = 0
    CHECK(macro_f1({S::negative, S::negative}, {S::negative, S::negative}) == 0.5);

    CHECK_THROWS_AS(macro_f1({}, {}), std::runtime_error);
    CHECK_THROWS_AS(macro_f1({S::positive}, {}), std::runtime_error);
}

TEST_CASE("macro_f1 equals the brute-force oracle on all short instances") {
    for (size_t n = 1; n <= 6; ++n) {
        for (unsigned p = 0; p < (1u << n); ++p) {
            for (unsigned g = 0; g < (1u << n); ++g) {
                const auto preds = bits_to_labels(p, n);
                const auto gold = bits_to_labels(g, n);
                REQUIRE(macro_f1(preds, gold) == macro_f1_oracle(preds, gold));
            }
        }
    }
}

TEST_CASE("confusion counts total the evaluated documents") {
    using S = Sentiment;
    const std::vector<S> preds = {S::positive, S::negative, S::positive, S::negative, S::positive};
    const std::vector<S> gold = {S::positive, S::positive, S::negative, S::negative, S::positive};
    const ConfusionCounts c = confusion_for_class(preds, gold, S::positive);
    CHECK(c.tp == 2);
    CHECK(c.fp == 1);
    CHECK(c.fn == 1);
    CHECK(c.tn == 1);
    CHECK(c.total() == preds.size());
}

TEST_CASE("rpd follows the relative-drop formula") {
    // quotients from the reference 4-decimal F1 pairs (frozen from exact division)
    CHECK(rpd(0.7266, 0.6725) == doctest::Approx(-0.0744563721).epsilon(1e-8));
    CHECK(rpd(0.7266, 0.6595) == doctest::Approx(-0.0923479218).epsilon(1e-8));
    CHECK(rpd(0.7213, 0.6747) == doctest::Approx(-0.0646055733).epsilon(1e-8));
    // the reference rounded columns are reproduced to 1e-3 (they were rounded
    // from unrounded scores); the third pair is also inside 5e-5
    CHECK(std::abs(rpd(0.7266, 0.6725) - (-0.0744)) < 1e-3);
    CHECK(std::abs(rpd(0.7266, 0.6595) - (-0.0924)) < 1e-3);
    CHECK(std::abs(rpd(0.7213, 0.6747) - (-0.0646)) < 5e-5);
    CHECK(std::abs(rpd(0.7355, 0.6728) - (-0.0852)) < 1e-3);
    CHECK(std::abs(rpd(0.7278, 0.6749) - (-0.0727)) < 1e-3);
    CHECK(std::abs(rpd(0.7278, 0.6648) - (-0.0865)) < 1e-3);
    CHECK(std::abs(rpd(0.7210, 0.6833) - (-0.0532)) < 1e-3);
    CHECK(std::abs(rpd(0.7210, 0.6719) - (-0.0681)) < 1e-3);
    CHECK(std::abs(rpd(0.7213, 0.6916) - (-0.0411)) < 1e-3);

    SUBCASE("identity and errors") {
        CHECK(rpd(0.42, 0.42) == 0.0);
        CHECK_THROWS_AS(rpd(0.0, 0.5), std::runtime_error);
        CHECK_THROWS_AS(rpd(-0.1, 0.5), std::runtime_error);
    }
    SUBCASE("sign property and scale invariance") {
        Rng rng = stream_for(8, "rpd-props", 0);
        for (int i = 0; i < 500; ++i) {
            const double f0 = 0.05 + rng.uniform01();
            const double fj = 0.05 + rng.uniform01();
            const double value = rpd(f0, fj);
            CHECK((fj < f0) == (value < 0.0));
            const double c = 0.1 + rng.uniform01() * 5.0;
            CHECK(rpd(c * f0, c * fj) == doctest::Approx(value).epsilon(1e-10));
        }
    }
}

namespace {

// classifier that scores by stable token sign, built by direct training
Classifier token_sign_model() {
    FeaturizerConfig cfg;
    cfg.hash_dim_log2 = 12;
    std::vector<Example> examples;
    for (int year = 2013; year <= 2018; ++year) {
        for (int i = 0; i < 4; ++i) {
            examples.emplace_back(prefix_text(year, "up up up"), 1.0);
            examples.emplace_back(prefix_text(year, "down down down"), 0.0);
        }
    }
    TrainConfig tc;
    tc.max_steps = 300;
    tc.shuffle_seed = 4;
    return train(Classifier::zeros(cfg), examples, tc);
}

Corpus bucket_of(const std::string& name, std::vector<std::pair<std::string, Sentiment>> rows,
                 int year) {
    Corpus corpus;
    corpus.name = name;
    int i = 0;
    for (auto& [text, label] : rows) {
        corpus.documents.push_back({name + "-" + std::to_string(i++), text, year, label});
    }
    return corpus;
}

}  // namespace

TEST_CASE("evaluate prefixes with true years and fills per-bucket scores") {
    const Classifier model = token_sign_model();
    EvalBuckets buckets;
    buckets.within = bucket_of("within", {{"up up up", Sentiment::positive},
                                          {"down down down", Sentiment::negative}}, 2016);
    buckets.short_term = bucket_of("short", {{"up up up", Sentiment::positive},
                                             {"down down down", Sentiment::negative}}, 2019);
    buckets.long_term = bucket_of("long", {{"down down down", Sentiment::negative},
                                           {"up up up", Sentiment::positive}}, 2022);

    const EvalReport report = evaluate(model, buckets);
    CHECK(*report.f1_within == 1.0);
    CHECK(*report.f1_short == 1.0);
    CHECK(*report.f1_long == 1.0);
    CHECK(*report.rpd_within_short == 0.0);
    CHECK(*report.rpd_within_long == 0.0);
    CHECK(report.count_within == 2);

    SUBCASE("constant-0.5 model predicts everything negative") {
        FeaturizerConfig cfg;
        cfg.hash_dim_log2 = 10;
        const Classifier zero = Classifier::zeros(cfg);
        EvalBuckets one;
        one.within = bucket_of("within", {{"a", Sentiment::positive}, {"b", Sentiment::negative}},
                               2015);
        const EvalReport r = evaluate(zero, one);
        // preds [neg, neg] vs gold [pos, neg]: F1_neg = 2/3, F1_pos = 0
        CHECK(*r.f1_within == doctest::Approx(1.0 / 3.0));
        CHECK(!r.f1_short.has_value());
    }
    SUBCASE("empty buckets report absent scores, not zeros") {
        EvalBuckets sparse;
        sparse.within = buckets.within;
        const EvalReport r = evaluate(model, sparse);
        CHECK(r.f1_within.has_value());
        CHECK(!r.f1_short.has_value());
        CHECK(!r.rpd_within_short.has_value());
        CHECK(r.count_short == 0);
    }
    SUBCASE("unlabeled eval doc is an error") {
        EvalBuckets bad;
        bad.within = buckets.within;
        bad.within.documents[0].label.reset();
        CHECK_THROWS_AS(evaluate(model, bad), std::runtime_error);
    }
    SUBCASE("stored RPDs recompute exactly from stored F1s") {
        CHECK(*report.rpd_within_short == rpd(*report.f1_within, *report.f1_short));
        CHECK(*report.rpd_within_long == rpd(*report.f1_within, *report.f1_long));
    }
}

TEST_CASE("report json carries the documented schema") {
    EvalReport report;
    report.method_label = "baseline";
    report.f1_within = 0.75;
    report.count_within = 10;
    const auto j = report_to_json(report);
    CHECK(j["method"] == "baseline");
    CHECK(j["f1"]["within"] == 0.75);
    CHECK(j["f1"]["short"].is_null());
    CHECK(j["rpd"]["within_short"].is_null());
    CHECK(j["counts"]["within"] == 10);
}

TEST_CASE("ablation_report formats a fixed-column table") {
    EvalReport a;
    a.method_label = "baseline";
    a.f1_within = 0.72661;
    a.f1_short = 0.67254;
    a.f1_long = 0.65953;
    a.rpd_within_short = rpd(*a.f1_within, *a.f1_short);
    a.rpd_within_long = rpd(*a.f1_within, *a.f1_long);

    SUBCASE("single report is flagged best in every column") {
        const AblationReport table = ablation_report({a});
        CHECK(table.text_table.find("Method") != std::string::npos);
        CHECK(table.text_table.find("RPD Within-Short") != std::string::npos);
        size_t stars = 0;
        for (char c : table.text_table) stars += c == '*';
        CHECK(stars == 5);
    }
    SUBCASE("json carries matching unrounded and rounded values") {
        EvalReport b = a;
        b.method_label = "+sl(aug)+ft";
        b.f1_short = 0.68331;
        b.rpd_within_short = rpd(*b.f1_within, *b.f1_short);
        const AblationReport table = ablation_report({a, b});
        for (const auto& row : table.json["rows"]) {
            const double unrounded = row["f1"]["within"].get<double>();
            const double rounded = row["rounded"]["f1"]["within"].get<double>();
            CHECK(rounded == doctest::Approx(std::round(unrounded * 1e4) / 1e4).epsilon(1e-12));
        }
        CHECK(table.csv.find("method,f1_within") == 0);
        CHECK(table.json["rows"].size() == 2);
    }
    SUBCASE("best flag goes to the maximum value per column") {
        EvalReport b = a;
        b.method_label = "better-short";
        b.f1_short = 0.70;
        b.rpd_within_short = rpd(*b.f1_within, *b.f1_short);
        const AblationReport table = ablation_report({a, b});
        // the second row should carry the star in the F1 Short column
        const auto row_pos = table.text_table.find("better-short");
        REQUIRE(row_pos != std::string::npos);
        const auto line_end = table.text_table.find('\n', row_pos);
        const std::string line = table.text_table.substr(row_pos, line_end - row_pos);
        CHECK(line.find("0.7000 *") != std::string::npos);
    }
    SUBCASE("empty input is an error") {
        CHECK_THROWS_AS(ablation_report({}), std::runtime_error);
    }
}
