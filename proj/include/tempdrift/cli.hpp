#pragma once

#include <optional>
#include <ostream>
#include <string>

#include "tempdrift/corpus.hpp"
#include "tempdrift/selflabel.hpp"

namespace tempdrift::cli {

// Seed precedence: explicit flag, then the config file's value, then the
// TEMPDRIFT_SEED environment variable, then a freshly drawn seed (printed
// and stored in the manifest so the run stays replayable).
uint64_t resolve_seed(std::optional<uint64_t> flag, std::optional<uint64_t> config_seed,
                      std::ostream& log);

struct SynthOptions {
    std::string spec_path;  // empty: built-in default spec
    std::string out_dir;
    std::optional<uint64_t> seed;
};

// Writes train/unlabeled/eval_within/eval_short/eval_long JSONL plus a
// manifest into out_dir.
void cmd_synth(const SynthOptions& options, std::ostream& log);

struct PipelineOptions {
    std::string config_path;  // empty: defaults
    std::string data_dir;     // directory holding the cmd_synth file layout
    // per-file overrides of the data_dir layout
    std::string train_path;
    std::string unlabeled_path;
    std::string eval_within_path;
    std::string eval_short_path;
    std::string eval_long_path;
    // alternative: one eval file, bucketized against the train year range
    std::string eval_path;
    std::optional<int> short_gap;
    std::optional<int> long_gap;
    std::string variant;  // empty: from config
    std::string augment;  // "", "on", "off"
    std::optional<uint64_t> seed;
    std::string out_dir;
};

// Runs one pipeline variant end to end; writes checkpoints, the pseudo-label
// file, report JSON + text table, and the manifest.
void cmd_pipeline(const PipelineOptions& options, std::ostream& log);

struct AblationOptions {
    std::string config_path;  // {"drift": {...}, "pipeline": {...}}, both optional
    int seeds = 5;
    std::optional<uint64_t> seed;  // base seed; runs use base, base+1, ...
    std::string out_dir;
};

// Runs all five method variants over N seeds on regenerated synthetic
// corpora; writes per-seed and mean tables plus the augmented-vs-non-
// augmented comparison.
void cmd_ablation(const AblationOptions& options, std::ostream& log);

struct PredictOptions {
    std::string model_path;
    std::string input_path;  // JSONL/CSV documents
    std::string text;        // single ad-hoc input
    std::optional<int> year;
    std::string sweep_years;  // "A..B": one row per prefix year
    double threshold = 0.5;
};

// Prints (id, year, probability, label) rows for each input.
void cmd_predict(const PredictOptions& options, std::ostream& out);

}  // namespace tempdrift::cli
