#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "tempdrift/corpus.hpp"
#include "tempdrift/eval.hpp"
#include "tempdrift/model.hpp"

namespace tempdrift {

// Teacher-assigned target for one unlabeled document under one (possibly
// resampled) prefix year.
struct PseudoLabel {
    std::string doc_id;
    int sampled_year = 0;
    double soft = 0.5;
    Sentiment hard = Sentiment::negative;
    std::string teacher_id;
};

enum class TargetKind { soft, hard };
enum class Variant { baseline, self_label, self_label_finetune };

std::string variant_name(Variant v);          // "baseline", "sl", "sl-ft"
Variant variant_from_name(const std::string& name);

// Table-style row label, e.g. "+sl(aug)+ft".
std::string method_label(Variant v, bool augment);

inline TrainConfig two_epoch_train_config(double lr = 0.05) {
    TrainConfig cfg;
    cfg.epochs = 2;
    cfg.lr = lr;
    return cfg;
}

struct PipelineConfig {
    uint64_t seed = 1;
    Variant variant = Variant::self_label_finetune;
    bool augment = true;
    TargetKind target_kind = TargetKind::soft;
    int copies_per_doc = 1;  // K
    TrainConfig teacher = two_epoch_train_config();
    int64_t student_steps = 6000;
    // sl-ft variant only. Fine-tuning runs at a much smaller rate than
    // from-scratch training so it adjusts the student instead of retraining
    // it from nothing.
    TrainConfig finetune = two_epoch_train_config(0.002);
    std::optional<YearRange> year_range;  // augmentation range override
    bool label_with_original_year = false;
    bool resample_per_epoch = false;
    FeaturizerConfig featurizer;
};

void validate_pipeline_config(const PipelineConfig& cfg);
nlohmann::json pipeline_config_to_json(const PipelineConfig& cfg);
PipelineConfig pipeline_config_from_json(const nlohmann::json& j);

struct StageRecord {
    std::string stage;
    int64_t steps = 0;
    std::optional<double> final_loss;
    double wall_ms = 0.0;
};

struct PipelineArtifacts {
    Classifier teacher;
    std::optional<Classifier> student;
    std::vector<PseudoLabel> pseudo_labels;
    std::vector<StageRecord> stage_log;
};

struct PipelineOutcome {
    PipelineArtifacts artifacts;
    EvalReport report;
};

// Trains on every sample date-prefixed with its true year. All documents
// must be labeled.
Classifier train_teacher(const Corpus& labeled, const PipelineConfig& cfg);

// K pseudo-labels per unlabeled document. With augment on, the year is drawn
// via augment_year from cfg.year_range (or the range passed in) and the
// teacher scores the input prefixed with that sampled year; with augment off
// the original year is used throughout.
std::vector<PseudoLabel> generate_pseudo_labels(const Classifier& teacher,
                                                const Corpus& unlabeled,
                                                const PipelineConfig& cfg,
                                                const YearRange& augment_range);

// Fresh model of the same architecture trained for exactly student_steps
// steps on (input prefixed with the sampled year, soft or hard target).
Classifier train_student(const std::vector<PseudoLabel>& pseudo, const Corpus& unlabeled,
                         const PipelineConfig& cfg);

// Continues training the student on gold labels with true-year prefixes,
// same weights, fresh optimizer state.
Classifier finetune(Classifier student, const Corpus& labeled, const PipelineConfig& cfg);

// teacher -> pseudo-labels -> student -> optional finetune -> evaluate.
// The baseline variant skips the pseudo/student stages and evaluates the
// teacher. A pure function of (corpora, config).
PipelineOutcome run_pipeline(const Corpus& labeled, const Corpus& unlabeled,
                             const EvalBuckets& buckets, const PipelineConfig& cfg);

// checkpoint reference: digest of the serialized model
std::string model_id(const Classifier& model);

std::string pseudo_labels_to_jsonl(const std::vector<PseudoLabel>& labels);
std::vector<PseudoLabel> pseudo_labels_from_jsonl(const std::string& text);

}  // namespace tempdrift
