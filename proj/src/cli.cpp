#include "tempdrift/cli.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <random>
#include <stdexcept>

#include "tempdrift/eval.hpp"
#include "tempdrift/io.hpp"
#include "tempdrift/manifest.hpp"
#include "tempdrift/prefixing.hpp"

namespace tempdrift::cli {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

json load_json_file(const std::string& path) {
    try {
        return json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw std::runtime_error(path + ": invalid JSON: " + e.what());
    }
}

CorpusFormat format_for(const std::string& path) {
    return path.ends_with(".csv") ? CorpusFormat::csv : CorpusFormat::jsonl;
}

void ensure_out_dir(const std::string& dir) {
    if (dir.empty()) throw std::runtime_error("output directory required");
    fs::create_directories(dir);
}

std::string join(const std::string& dir, const std::string& name) {
    return (fs::path(dir) / name).string();
}

std::optional<uint64_t> json_seed(const json& j) {
    if (j.contains("seed")) return j["seed"].get<uint64_t>();
    return std::nullopt;
}

std::string fmt_prob(double p) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", p);
    return buf;
}

struct SweepRange {
    int first;
    int last;
};

SweepRange parse_sweep(const std::string& sweep) {
    const size_t dots = sweep.find("..");
    if (dots == std::string::npos) {
        throw std::runtime_error("--sweep-years: expected A..B, got '" + sweep + "'");
    }
    try {
        const int a = std::stoi(sweep.substr(0, dots));
        const int b = std::stoi(sweep.substr(dots + 2));
        if (a > b) throw std::runtime_error("range reversed");
        return {a, b};
    } catch (const std::exception&) {
        throw std::runtime_error("--sweep-years: expected A..B with A <= B, got '" + sweep + "'");
    }
}

std::string resolve_data_path(const std::string& explicit_path, const std::string& data_dir,
                              const std::string& default_name, const std::string& what) {
    if (!explicit_path.empty()) return explicit_path;
    if (!data_dir.empty()) return join(data_dir, default_name);
    throw std::runtime_error("no path for " + what + ": pass --data-dir or the explicit flag");
}

}  // namespace

uint64_t resolve_seed(std::optional<uint64_t> flag, std::optional<uint64_t> config_seed,
                      std::ostream& log) {
    if (flag) return *flag;
    if (config_seed) return *config_seed;
    if (const char* env = std::getenv("TEMPDRIFT_SEED")) {
        try {
            return std::stoull(env);
        } catch (const std::exception&) {
            throw std::runtime_error("TEMPDRIFT_SEED is not a valid integer: " + std::string(env));
        }
    }
    std::random_device rd;
    const uint64_t drawn = (static_cast<uint64_t>(rd()) << 32) ^ rd();
    log << "seed drawn: " << drawn << "\n";
    return drawn;
}

void cmd_synth(const SynthOptions& options, std::ostream& log) {
    RunManifest manifest;
    manifest.command = "synth";

    json raw = json::object();
    if (!options.spec_path.empty()) {
        raw = load_json_file(options.spec_path);
        manifest.inputs.push_back({options.spec_path, file_digest_hex(options.spec_path)});
    }
    DriftSpec spec = drift_spec_from_json(raw);
    spec.seed = resolve_seed(options.seed, json_seed(raw), log);

    const DriftCorpora corpora = generate_drift_corpus(spec);
    ensure_out_dir(options.out_dir);

    const std::pair<std::string, const Corpus*> files[] = {
        {"train.jsonl", &corpora.train},
        {"unlabeled.jsonl", &corpora.unlabeled},
        {"eval_within.jsonl", &corpora.buckets.within},
        {"eval_short.jsonl", &corpora.buckets.short_term},
        {"eval_long.jsonl", &corpora.buckets.long_term},
    };
    for (const auto& [name, corpus] : files) {
        const std::string path = join(options.out_dir, name);
        write_file_atomic(path, corpus_to_jsonl(*corpus));
        manifest.outputs.push_back(path);
        log << "wrote " << path << " (" << corpus->size() << " docs)\n";
    }
    manifest.seed = spec.seed;
    manifest.config = drift_spec_to_json(spec);
    write_manifest(manifest, options.out_dir);
}

void cmd_pipeline(const PipelineOptions& options, std::ostream& log) {
    RunManifest manifest;
    manifest.command = "pipeline";

    json raw = json::object();
    if (!options.config_path.empty()) {
        raw = load_json_file(options.config_path);
        manifest.inputs.push_back({options.config_path, file_digest_hex(options.config_path)});
    }
    PipelineConfig cfg = pipeline_config_from_json(raw);
    if (!options.variant.empty()) cfg.variant = variant_from_name(options.variant);
    if (!options.augment.empty()) {
        if (options.augment == "on") cfg.augment = true;
        else if (options.augment == "off") cfg.augment = false;
        else throw std::runtime_error("--augment must be 'on' or 'off'");
    }
    cfg.seed = resolve_seed(options.seed, json_seed(raw), log);

    const auto load_input = [&](const std::string& path) {
        Corpus corpus = load_corpus(path, format_for(path));
        manifest.inputs.push_back({path, file_digest_hex(path)});
        return corpus;
    };

    const std::string train_path =
        resolve_data_path(options.train_path, options.data_dir, "train.jsonl", "train corpus");
    const Corpus train = load_input(train_path);

    Corpus unlabeled;
    unlabeled.name = "unlabeled";
    if (cfg.variant != Variant::baseline) {  // baseline ignores unlabeled data entirely
        unlabeled = load_input(resolve_data_path(options.unlabeled_path, options.data_dir,
                                                 "unlabeled.jsonl", "unlabeled corpus"));
    }

    EvalBuckets buckets;
    if (!options.eval_path.empty()) {
        if (!options.short_gap || !options.long_gap) {
            throw std::runtime_error("--eval needs --short-gap and --long-gap");
        }
        const Corpus eval_docs = load_input(options.eval_path);
        buckets = bucketize(eval_docs, labeled_year_range(train), *options.short_gap,
                            *options.long_gap);
    } else {
        buckets.within = load_input(resolve_data_path(
            options.eval_within_path, options.data_dir, "eval_within.jsonl", "within bucket"));
        buckets.short_term = load_input(resolve_data_path(
            options.eval_short_path, options.data_dir, "eval_short.jsonl", "short bucket"));
        buckets.long_term = load_input(resolve_data_path(
            options.eval_long_path, options.data_dir, "eval_long.jsonl", "long bucket"));
    }

    const PipelineOutcome outcome = run_pipeline(train, unlabeled, buckets, cfg);

    ensure_out_dir(options.out_dir);
    const auto write_output = [&](const std::string& name, std::string_view content) {
        const std::string path = join(options.out_dir, name);
        write_file_atomic(path, content);
        manifest.outputs.push_back(path);
    };

    write_output("teacher.ckpt.json", checkpoint_to_json(outcome.artifacts.teacher));
    const Classifier& final_model = outcome.artifacts.student ? *outcome.artifacts.student
                                                              : outcome.artifacts.teacher;
    write_output("final.ckpt.json", checkpoint_to_json(final_model));
    if (cfg.variant != Variant::baseline) {
        write_output("pseudo_labels.jsonl", pseudo_labels_to_jsonl(outcome.artifacts.pseudo_labels));
    }
    const AblationReport table = ablation_report({outcome.report});
    write_output("report.json", report_to_json(outcome.report).dump(2) + "\n");
    write_output("report.txt", table.text_table);
    write_output("report.csv", table.csv);

    manifest.seed = cfg.seed;
    manifest.config = pipeline_config_to_json(cfg);
    manifest.timings = outcome.artifacts.stage_log;
    write_manifest(manifest, options.out_dir);

    log << table.text_table;
}

namespace {

struct VariantSpec {
    Variant variant;
    bool augment;
};

// Table row order: baseline, +sl(no-aug), +sl(no-aug)+ft, +sl(aug), +sl(aug)+ft
constexpr VariantSpec kAblationGrid[] = {
    {Variant::baseline, false},
    {Variant::self_label, false},
    {Variant::self_label_finetune, false},
    {Variant::self_label, true},
    {Variant::self_label_finetune, true},
};

std::optional<double> mean_of(const std::vector<std::optional<double>>& values) {
    double total = 0.0;
    size_t n = 0;
    for (const auto& v : values) {
        if (v) {
            total += *v;
            ++n;
        }
    }
    if (n == 0) return std::nullopt;
    return total / static_cast<double>(n);
}

}  // namespace

void cmd_ablation(const AblationOptions& options, std::ostream& log) {
    if (options.seeds < 1) throw std::runtime_error("--seeds must be >= 1");

    RunManifest manifest;
    manifest.command = "ablation";

    json raw = json::object();
    if (!options.config_path.empty()) {
        raw = load_json_file(options.config_path);
        manifest.inputs.push_back({options.config_path, file_digest_hex(options.config_path)});
    }
    const json drift_json = raw.contains("drift") ? raw["drift"] : json::object();
    const json pipeline_json = raw.contains("pipeline") ? raw["pipeline"] : json::object();
    const DriftSpec drift_base = drift_spec_from_json(drift_json);
    const PipelineConfig pipeline_base = pipeline_config_from_json(pipeline_json);

    const uint64_t base_seed = resolve_seed(options.seed, json_seed(pipeline_json), log);
    const size_t n_seeds = static_cast<size_t>(options.seeds);
    const size_t n_variants = std::size(kAblationGrid);

    using clock = std::chrono::steady_clock;
    // reports[v][s]
    std::vector<std::vector<EvalReport>> reports(n_variants);
    std::vector<uint64_t> seeds;
    json per_seed = json::array();
    std::string per_seed_text;
    for (size_t s = 0; s < n_seeds; ++s) {
        const uint64_t seed = base_seed + s;
        seeds.push_back(seed);
        const auto begin = clock::now();

        DriftSpec drift = drift_base;
        drift.seed = seed;
        const DriftCorpora corpora = generate_drift_corpus(drift);

        std::vector<EvalReport> seed_reports;
        for (size_t v = 0; v < n_variants; ++v) {
            PipelineConfig cfg = pipeline_base;
            cfg.seed = seed;
            cfg.variant = kAblationGrid[v].variant;
            cfg.augment = kAblationGrid[v].augment;
            PipelineOutcome outcome =
                run_pipeline(corpora.train, corpora.unlabeled, corpora.buckets, cfg);
            reports[v].push_back(outcome.report);
            seed_reports.push_back(std::move(outcome.report));
        }
        const double ms = std::chrono::duration<double, std::milli>(clock::now() - begin).count();
        manifest.timings.push_back({"seed-" + std::to_string(seed),
                                    static_cast<int64_t>(n_variants), std::nullopt, ms});

        const AblationReport seed_table = ablation_report(seed_reports);
        per_seed_text += "seed " + std::to_string(seed) + "\n" + seed_table.text_table + "\n";
        json entry;
        entry["seed"] = seed;
        entry["rows"] = seed_table.json["rows"];
        per_seed.push_back(std::move(entry));
    }

    // mean over seeds, column by column
    std::vector<EvalReport> mean_reports;
    for (size_t v = 0; v < n_variants; ++v) {
        EvalReport mean;
        mean.method_label = method_label(kAblationGrid[v].variant, kAblationGrid[v].augment);
        std::vector<std::optional<double>> col;
        const auto collect = [&](auto getter) {
            col.clear();
            for (const auto& r : reports[v]) col.push_back(getter(r));
            return mean_of(col);
        };
        mean.f1_within = collect([](const EvalReport& r) { return r.f1_within; });
        mean.f1_short = collect([](const EvalReport& r) { return r.f1_short; });
        mean.f1_long = collect([](const EvalReport& r) { return r.f1_long; });
        mean.rpd_within_short = collect([](const EvalReport& r) { return r.rpd_within_short; });
        mean.rpd_within_long = collect([](const EvalReport& r) { return r.rpd_within_long; });
        for (const auto& r : reports[v]) {
            mean.count_within += r.count_within;
            mean.count_short += r.count_short;
            mean.count_long += r.count_long;
        }
        mean_reports.push_back(std::move(mean));
    }

    // augmented vs non-augmented comparison, per-seed win counts
    constexpr size_t kBaseline = 0, kNoAugFt = 2, kAugFt = 4;
    size_t rpd_wins = 0;
    size_t f1_geq = 0;
    for (size_t s = 0; s < n_seeds; ++s) {
        const auto& base_rpd = reports[kBaseline][s].rpd_within_short;
        const auto& aug_rpd = reports[kAugFt][s].rpd_within_short;
        if (base_rpd && aug_rpd && *aug_rpd > *base_rpd) ++rpd_wins;
        const auto& noaug_f1 = reports[kNoAugFt][s].f1_short;
        const auto& aug_f1 = reports[kAugFt][s].f1_short;
        if (noaug_f1 && aug_f1 && *aug_f1 >= *noaug_f1) ++f1_geq;
    }
    json comparison;
    comparison["rpd_within_short"] = {
        {"baseline_mean", mean_reports[kBaseline].rpd_within_short
                              ? json(*mean_reports[kBaseline].rpd_within_short)
                              : json(nullptr)},
        {"sl_aug_ft_mean", mean_reports[kAugFt].rpd_within_short
                               ? json(*mean_reports[kAugFt].rpd_within_short)
                               : json(nullptr)},
        {"sl_aug_ft_better_seeds", rpd_wins},
        {"seeds", n_seeds}};
    comparison["f1_short"] = {
        {"sl_no_aug_ft_mean",
         mean_reports[kNoAugFt].f1_short ? json(*mean_reports[kNoAugFt].f1_short) : json(nullptr)},
        {"sl_aug_ft_mean",
         mean_reports[kAugFt].f1_short ? json(*mean_reports[kAugFt].f1_short) : json(nullptr)},
        {"sl_aug_ft_geq_seeds", f1_geq},
        {"seeds", n_seeds}};

    const AblationReport mean_table = ablation_report(mean_reports);
    std::string summary;
    summary += "mean over " + std::to_string(n_seeds) + " seeds (base seed " +
               std::to_string(base_seed) + ")\n";
    summary += mean_table.text_table;
    summary += "\n+sl(aug)+ft RPD within-short better than baseline in " +
               std::to_string(rpd_wins) + "/" + std::to_string(n_seeds) + " seeds\n";
    summary += "+sl(aug)+ft F1 short >= +sl(no-aug)+ft in " + std::to_string(f1_geq) + "/" +
               std::to_string(n_seeds) + " seeds\n";

    json out_json;
    out_json["seeds"] = seeds;
    out_json["per_seed"] = std::move(per_seed);
    out_json["mean"] = mean_table.json["rows"];
    out_json["comparison"] = std::move(comparison);

    ensure_out_dir(options.out_dir);
    const auto write_output = [&](const std::string& name, std::string_view content) {
        const std::string path = join(options.out_dir, name);
        write_file_atomic(path, content);
        manifest.outputs.push_back(path);
    };
    write_output("ablation.json", out_json.dump(2) + "\n");
    write_output("ablation.txt", per_seed_text + summary);
    write_output("ablation.csv", mean_table.csv);

    manifest.seed = base_seed;
    manifest.config = {{"drift", drift_spec_to_json(drift_base)},
                       {"pipeline", pipeline_config_to_json(pipeline_base)},
                       {"seeds", options.seeds}};
    write_manifest(manifest, options.out_dir);

    log << summary;
}

void cmd_predict(const PredictOptions& options, std::ostream& out) {
    if (options.model_path.empty()) throw std::runtime_error("--model is required");
    const Classifier model = load_checkpoint(options.model_path);

    if (!options.text.empty() && !options.input_path.empty()) {
        throw std::runtime_error("pass either --text or --input, not both");
    }

    std::optional<SweepRange> sweep;
    if (!options.sweep_years.empty()) sweep = parse_sweep(options.sweep_years);

    std::vector<TimedDocument> docs;
    if (!options.text.empty()) {
        if (!options.year && !sweep) {
            throw std::runtime_error("missing year: pass --year or --sweep-years");
        }
        TimedDocument doc;
        doc.id = "input-0";
        doc.text = options.text;
        doc.year = options.year.value_or(sweep ? sweep->first : 0);
        docs.push_back(std::move(doc));
    } else if (!options.input_path.empty()) {
        docs = load_corpus(options.input_path, format_for(options.input_path)).documents;
    } else {
        throw std::runtime_error("pass --text or --input");
    }

    out << "id\tyear\tprobability\tlabel\n";
    for (const auto& doc : docs) {
        const int first = sweep ? sweep->first : doc.year;
        const int last = sweep ? sweep->last : doc.year;
        for (int year = first; year <= last; ++year) {
            const double p = predict_proba(model, prefix_text(year, doc.text));
            const Sentiment label = classify(p, options.threshold);
            out << doc.id << '\t' << year << '\t' << fmt_prob(p) << '\t'
                << (label == Sentiment::positive ? "positive" : "negative") << '\n';
        }
    }
}

}  // namespace tempdrift::cli
