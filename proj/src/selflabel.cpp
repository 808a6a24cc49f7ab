#include "tempdrift/selflabel.hpp"

#include <chrono>
#include <stdexcept>
#include <unordered_map>

#include "tempdrift/io.hpp"
#include "tempdrift/prefixing.hpp"
#include "tempdrift/rng.hpp"

namespace tempdrift {

namespace {

using nlohmann::json;

uint64_t stage_seed(uint64_t pipeline_seed, std::string_view stage) {
    return hash_combine(pipeline_seed, fnv1a64(stage));
}

double target_for(const PseudoLabel& label, TargetKind kind) {
    if (kind == TargetKind::soft) return label.soft;
    return label.hard == Sentiment::positive ? 1.0 : 0.0;
}

// One pseudo-labeling pass. The per-document draw index folds in the pass
// number so resampled epochs stay order-independent and replayable.
std::vector<PseudoLabel> pseudo_label_pass(const Classifier& teacher, const Corpus& unlabeled,
                                           const PipelineConfig& cfg, const YearRange& range,
                                           int64_t pass) {
    const std::string teacher_id = model_id(teacher);
    const auto copies = static_cast<uint64_t>(cfg.copies_per_doc);
    std::vector<PseudoLabel> labels;
    labels.reserve(unlabeled.size() * copies);
    for (const auto& doc : unlabeled.documents) {
        for (uint64_t k = 0; k < copies; ++k) {
            const uint64_t draw = static_cast<uint64_t>(pass) * copies + k;
            PseudoLabel label;
            label.doc_id = doc.id;
            label.teacher_id = teacher_id;
            if (cfg.augment) {
                Rng stream = stream_for(cfg.seed, "augment-year", doc.id, draw);
                label.sampled_year = augment_year(doc, range, stream).year;
            } else {
                label.sampled_year = doc.year;
            }
            const int scored_year = cfg.label_with_original_year ? doc.year : label.sampled_year;
            label.soft = predict_proba(teacher, prefix_text(scored_year, doc.text));
            label.hard = classify(label.soft);
            labels.push_back(std::move(label));
        }
    }
    return labels;
}

std::unordered_map<std::string, const TimedDocument*> index_by_id(const Corpus& corpus) {
    std::unordered_map<std::string, const TimedDocument*> index;
    index.reserve(corpus.size());
    for (const auto& doc : corpus.documents) index.emplace(doc.id, &doc);
    return index;
}

std::vector<Example> student_examples(const std::vector<PseudoLabel>& pseudo,
                                      const std::unordered_map<std::string, const TimedDocument*>& docs,
                                      TargetKind kind) {
    std::vector<Example> examples;
    examples.reserve(pseudo.size());
    for (const auto& label : pseudo) {
        const auto it = docs.find(label.doc_id);
        if (it == docs.end()) {
            throw std::runtime_error("train_student: pseudo-label references unknown doc_id '" +
                                     label.doc_id + "'");
        }
        examples.emplace_back(prefix_text(label.sampled_year, it->second->text),
                              target_for(label, kind));
    }
    return examples;
}

TrainConfig student_train_config(const PipelineConfig& cfg) {
    TrainConfig student = cfg.teacher;  // same hyperparameters, step-governed
    student.epochs.reset();
    student.max_steps = cfg.student_steps;
    student.shuffle_seed = stage_seed(cfg.seed, "student");
    return student;
}

json train_config_to_json(const TrainConfig& cfg) {
    json j = {{"lr", cfg.lr},
              {"beta1", cfg.beta1},
              {"beta2", cfg.beta2},
              {"epsilon", cfg.epsilon},
              {"batch_size", cfg.batch_size}};
    if (cfg.epochs) j["epochs"] = *cfg.epochs;
    if (cfg.max_steps) j["max_steps"] = *cfg.max_steps;
    return j;
}

TrainConfig train_config_from_json(const json& j, TrainConfig base) {
    if (j.contains("lr")) base.lr = j["lr"].get<double>();
    if (j.contains("beta1")) base.beta1 = j["beta1"].get<double>();
    if (j.contains("beta2")) base.beta2 = j["beta2"].get<double>();
    if (j.contains("epsilon")) base.epsilon = j["epsilon"].get<double>();
    if (j.contains("batch_size")) base.batch_size = j["batch_size"].get<int>();
    if (j.contains("epochs") && j.contains("max_steps")) {
        throw std::runtime_error("train config: epochs and max_steps are mutually exclusive");
    }
    if (j.contains("epochs")) {
        base.epochs = j["epochs"].get<int64_t>();
        base.max_steps.reset();
    } else if (j.contains("max_steps")) {
        base.max_steps = j["max_steps"].get<int64_t>();
        base.epochs.reset();
    }
    return base;
}

}  // namespace

std::string variant_name(Variant v) {
    switch (v) {
        case Variant::baseline: return "baseline";
        case Variant::self_label: return "sl";
        case Variant::self_label_finetune: return "sl-ft";
    }
    throw std::runtime_error("variant_name: unknown variant");
}

Variant variant_from_name(const std::string& name) {
    if (name == "baseline") return Variant::baseline;
    if (name == "sl") return Variant::self_label;
    if (name == "sl-ft") return Variant::self_label_finetune;
    throw std::runtime_error("unknown variant '" + name + "' (expected baseline, sl, sl-ft)");
}

std::string method_label(Variant v, bool augment) {
    if (v == Variant::baseline) return "baseline";
    std::string label = augment ? "+sl(aug)" : "+sl(no-aug)";
    if (v == Variant::self_label_finetune) label += "+ft";
    return label;
}

void validate_pipeline_config(const PipelineConfig& cfg) {
    if (cfg.student_steps < 0) throw std::runtime_error("pipeline config: student_steps < 0");
    if (cfg.copies_per_doc < 1) throw std::runtime_error("pipeline config: copies_per_doc < 1");
    validate_train_config(cfg.teacher);
    validate_train_config(cfg.finetune);
    validate_featurizer_config(cfg.featurizer);
    if (cfg.year_range && cfg.year_range->min_year > cfg.year_range->max_year) {
        throw std::runtime_error("pipeline config: year_range min > max");
    }
}

json pipeline_config_to_json(const PipelineConfig& cfg) {
    json j;
    j["seed"] = cfg.seed;
    j["variant"] = variant_name(cfg.variant);
    j["augment"] = cfg.augment;
    j["target_kind"] = cfg.target_kind == TargetKind::soft ? "soft" : "hard";
    j["copies_per_doc"] = cfg.copies_per_doc;
    j["teacher"] = train_config_to_json(cfg.teacher);
    j["student_steps"] = cfg.student_steps;
    j["finetune"] = train_config_to_json(cfg.finetune);
    if (cfg.year_range) {
        j["year_range"] = {{"min_year", cfg.year_range->min_year},
                           {"max_year", cfg.year_range->max_year}};
    } else {
        j["year_range"] = nullptr;
    }
    j["label_with_original_year"] = cfg.label_with_original_year;
    j["resample_per_epoch"] = cfg.resample_per_epoch;
    j["featurizer"] = {{"hash_dim_log2", cfg.featurizer.hash_dim_log2},
                       {"use_bigrams", cfg.featurizer.use_bigrams},
                       {"use_year_cross", cfg.featurizer.use_year_cross}};
    return j;
}

PipelineConfig pipeline_config_from_json(const json& j) {
    PipelineConfig cfg;
    if (j.contains("seed")) cfg.seed = j["seed"].get<uint64_t>();
    if (j.contains("variant")) cfg.variant = variant_from_name(j["variant"].get<std::string>());
    if (j.contains("augment")) cfg.augment = j["augment"].get<bool>();
    if (j.contains("target_kind")) {
        const auto kind = j["target_kind"].get<std::string>();
        if (kind == "soft") cfg.target_kind = TargetKind::soft;
        else if (kind == "hard") cfg.target_kind = TargetKind::hard;
        else throw std::runtime_error("pipeline config: target_kind must be soft or hard");
    }
    if (j.contains("copies_per_doc")) cfg.copies_per_doc = j["copies_per_doc"].get<int>();
    if (j.contains("teacher")) cfg.teacher = train_config_from_json(j["teacher"], cfg.teacher);
    if (j.contains("student_steps")) cfg.student_steps = j["student_steps"].get<int64_t>();
    if (j.contains("finetune")) cfg.finetune = train_config_from_json(j["finetune"], cfg.finetune);
    if (j.contains("year_range") && !j["year_range"].is_null()) {
        cfg.year_range = YearRange{j["year_range"].at("min_year").get<int>(),
                                   j["year_range"].at("max_year").get<int>()};
    }
    if (j.contains("label_with_original_year")) {
        cfg.label_with_original_year = j["label_with_original_year"].get<bool>();
    }
    if (j.contains("resample_per_epoch")) cfg.resample_per_epoch = j["resample_per_epoch"].get<bool>();
    if (j.contains("featurizer")) {
        const auto& f = j["featurizer"];
        if (f.contains("hash_dim_log2")) cfg.featurizer.hash_dim_log2 = f["hash_dim_log2"].get<int>();
        if (f.contains("use_bigrams")) cfg.featurizer.use_bigrams = f["use_bigrams"].get<bool>();
        if (f.contains("use_year_cross")) cfg.featurizer.use_year_cross = f["use_year_cross"].get<bool>();
    }
    validate_pipeline_config(cfg);
    return cfg;
}

std::string model_id(const Classifier& model) {
    return fnv_hex(checkpoint_to_json(model));
}

Classifier train_teacher(const Corpus& labeled, const PipelineConfig& cfg) {
    if (labeled.empty()) throw std::runtime_error("train_teacher: empty labeled corpus");
    std::vector<Example> examples;
    examples.reserve(labeled.size());
    for (const auto& doc : labeled.documents) {
        if (!doc.label) {
            throw std::runtime_error("train_teacher: unlabeled document '" + doc.id + "'");
        }
        examples.emplace_back(prefix_document(doc),
                              *doc.label == Sentiment::positive ? 1.0 : 0.0);
    }
    TrainConfig teacher_cfg = cfg.teacher;
    teacher_cfg.shuffle_seed = stage_seed(cfg.seed, "teacher");
    return train(Classifier::zeros(cfg.featurizer), examples, teacher_cfg);
}

std::vector<PseudoLabel> generate_pseudo_labels(const Classifier& teacher, const Corpus& unlabeled,
                                                const PipelineConfig& cfg,
                                                const YearRange& augment_range) {
    return pseudo_label_pass(teacher, unlabeled, cfg, augment_range, 0);
}

Classifier train_student(const std::vector<PseudoLabel>& pseudo, const Corpus& unlabeled,
                         const PipelineConfig& cfg) {
    if (pseudo.empty()) throw std::runtime_error("train_student: no pseudo-labels");
    const auto docs = index_by_id(unlabeled);
    const auto examples = student_examples(pseudo, docs, cfg.target_kind);
    const TrainConfig student_cfg = student_train_config(cfg);

    Trainer trainer(Classifier::zeros(cfg.featurizer), student_cfg);
    trainer.set_examples(examples);
    while (trainer.steps_done() < cfg.student_steps) trainer.run_pass(cfg.student_steps);
    return trainer.take_model(student_cfg.shuffle_seed);
}

namespace {

// resample_per_epoch: redraw years and re-score with the teacher at every
// full pass over the unlabeled pool
Classifier train_student_resampling(const Classifier& teacher, const Corpus& unlabeled,
                                    const PipelineConfig& cfg, const YearRange& range) {
    const auto docs = index_by_id(unlabeled);
    const TrainConfig student_cfg = student_train_config(cfg);
    Trainer trainer(Classifier::zeros(cfg.featurizer), student_cfg);
    int64_t pass = 0;
    while (trainer.steps_done() < cfg.student_steps) {
        const auto labels = pseudo_label_pass(teacher, unlabeled, cfg, range, pass);
        if (labels.empty()) throw std::runtime_error("train_student: no pseudo-labels");
        trainer.set_examples(student_examples(labels, docs, cfg.target_kind));
        trainer.run_pass(cfg.student_steps);
        ++pass;
    }
    return trainer.take_model(student_cfg.shuffle_seed);
}

}  // namespace

Classifier finetune(Classifier student, const Corpus& labeled, const PipelineConfig& cfg) {
    if (labeled.empty()) throw std::runtime_error("finetune: empty labeled corpus");
    std::vector<Example> examples;
    examples.reserve(labeled.size());
    for (const auto& doc : labeled.documents) {
        if (!doc.label) throw std::runtime_error("finetune: unlabeled document '" + doc.id + "'");
        examples.emplace_back(prefix_document(doc),
                              *doc.label == Sentiment::positive ? 1.0 : 0.0);
    }
    TrainConfig finetune_cfg = cfg.finetune;
    finetune_cfg.shuffle_seed = stage_seed(cfg.seed, "finetune");
    return train(std::move(student), examples, finetune_cfg);
}

PipelineOutcome run_pipeline(const Corpus& labeled, const Corpus& unlabeled,
                             const EvalBuckets& buckets, const PipelineConfig& cfg) {
    validate_pipeline_config(cfg);
    using clock = std::chrono::steady_clock;

    PipelineOutcome outcome;
    auto& artifacts = outcome.artifacts;

    const auto run_stage = [&](const std::string& stage, auto&& body) {
        const auto begin = clock::now();
        try {
            body();
        } catch (const std::exception& e) {
            throw std::runtime_error("stage " + stage + ": " + e.what());
        }
        const double ms =
            std::chrono::duration<double, std::milli>(clock::now() - begin).count();
        artifacts.stage_log.back().wall_ms = ms;
    };

    run_stage("teacher", [&] {
        artifacts.teacher = train_teacher(labeled, cfg);
        artifacts.stage_log.push_back({"teacher", artifacts.teacher.meta.steps,
                                       artifacts.teacher.meta.final_loss, 0.0});
    });

    if (cfg.variant != Variant::baseline) {
        YearRange range{0, 0};
        run_stage("pseudo", [&] {
            range = cfg.year_range ? *cfg.year_range : labeled_year_range(labeled);
            artifacts.pseudo_labels =
                generate_pseudo_labels(artifacts.teacher, unlabeled, cfg, range);
            artifacts.stage_log.push_back(
                {"pseudo", static_cast<int64_t>(artifacts.pseudo_labels.size()),
                 std::nullopt, 0.0});
        });
        run_stage("student", [&] {
            artifacts.student =
                (cfg.resample_per_epoch && cfg.augment)
                    ? train_student_resampling(artifacts.teacher, unlabeled, cfg, range)
                    : train_student(artifacts.pseudo_labels, unlabeled, cfg);
            artifacts.stage_log.push_back({"student", artifacts.student->meta.steps,
                                           artifacts.student->meta.final_loss, 0.0});
        });
        if (cfg.variant == Variant::self_label_finetune) {
            run_stage("finetune", [&] {
                artifacts.student = finetune(std::move(*artifacts.student), labeled, cfg);
                artifacts.stage_log.push_back({"finetune", artifacts.student->meta.steps,
                                               artifacts.student->meta.final_loss, 0.0});
            });
        }
    }

    const Classifier& final_model =
        cfg.variant == Variant::baseline ? artifacts.teacher : *artifacts.student;
    run_stage("evaluate", [&] {
        outcome.report = evaluate(final_model, buckets);
        outcome.report.method_label = method_label(cfg.variant, cfg.augment);
        artifacts.stage_log.push_back(
            {"evaluate",
             static_cast<int64_t>(outcome.report.count_within + outcome.report.count_short +
                                  outcome.report.count_long),
             std::nullopt, 0.0});
    });
    return outcome;
}

std::string pseudo_labels_to_jsonl(const std::vector<PseudoLabel>& labels) {
    std::string out;
    for (const auto& label : labels) {
        json rec;
        rec["doc_id"] = label.doc_id;
        rec["sampled_year"] = label.sampled_year;
        rec["soft"] = label.soft;
        rec["hard"] = static_cast<int>(label.hard);
        rec["teacher_id"] = label.teacher_id;
        out += rec.dump();
        out += '\n';
    }
    return out;
}

std::vector<PseudoLabel> pseudo_labels_from_jsonl(const std::string& text) {
    std::vector<PseudoLabel> labels;
    size_t start = 0;
    size_t lineno = 0;
    while (start < text.size()) {
        size_t end = text.find('\n', start);
        if (end == std::string::npos) end = text.size();
        ++lineno;
        const std::string line = text.substr(start, end - start);
        start = end + 1;
        if (line.empty()) continue;
        json rec;
        try {
            rec = json::parse(line);
        } catch (const json::parse_error& e) {
            throw std::runtime_error("pseudo-labels line " + std::to_string(lineno) +
                                     ": invalid JSON: " + e.what());
        }
        PseudoLabel label;
        label.doc_id = rec.at("doc_id").get<std::string>();
        label.sampled_year = rec.at("sampled_year").get<int>();
        label.soft = rec.at("soft").get<double>();
        const int hard = rec.at("hard").get<int>();
        if (hard != 0 && hard != 1) {
            throw std::runtime_error("pseudo-labels line " + std::to_string(lineno) +
                                     ": hard label must be 0 or 1");
        }
        label.hard = static_cast<Sentiment>(hard);
        label.teacher_id = rec.at("teacher_id").get<std::string>();
        if (label.hard != classify(label.soft)) {
            throw std::runtime_error("pseudo-labels line " + std::to_string(lineno) +
                                     ": hard label inconsistent with soft score");
        }
        labels.push_back(std::move(label));
    }
    return labels;
}

}  // namespace tempdrift
