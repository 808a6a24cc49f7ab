#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tempdrift/prefixing.hpp"

namespace tempdrift {

struct FeaturizerConfig {
    int hash_dim_log2 = 18;
    bool use_bigrams = true;
    bool use_year_cross = true;

    size_t dim() const { return size_t{1} << hash_dim_log2; }
    bool operator==(const FeaturizerConfig&) const = default;
};

void validate_featurizer_config(const FeaturizerConfig& cfg);

// Hashed counts. Indices are strictly increasing; values are the summed
// counts of every feature string that landed on that index.
struct SparseVector {
    std::vector<uint32_t> indices;
    std::vector<double> values;

    size_t nnz() const { return indices.size(); }
};

// Whitespace tokenization with leading/trailing punctuation split into
// separate tokens and ASCII lowercasing. Exposed for tests.
std::vector<std::string> tokenize(std::string_view body);

// Features: body unigrams, adjacent bigrams (optional), the year token, and
// (optional) one (year, unigram) cross feature per body unigram. Feature
// strings are hashed with 64-bit FNV-1a, index = hash masked to 2^hash_dim.
SparseVector featurize(const PrefixedInput& input, const FeaturizerConfig& cfg);

struct TrainMeta {
    uint64_t seed = 0;
    int64_t steps = 0;
    double final_loss = 0.0;
};

// Linear logistic classifier over hashed features.
struct Classifier {
    FeaturizerConfig featurizer;
    std::vector<double> weights;  // length 2^hash_dim_log2
    double bias = 0.0;
    TrainMeta meta;

    static Classifier zeros(const FeaturizerConfig& cfg);
};

double sigmoid(double z);
double predict_proba(const Classifier& model, const PrefixedInput& input);
Sentiment classify(double p, double threshold = 0.5);

// Binary cross-entropy with the probability clamped to [1e-12, 1 - 1e-12]
// before the logs. Accepts soft targets y in [0, 1].
double bce_loss(double p, double y);

// Gradient of bce_loss(sigmoid(w.x + b), y): (p - y) * x_i on the active
// indices, (p - y) for the bias.
struct SparseGrad {
    std::vector<std::pair<uint32_t, double>> weights;  // sorted by index
    double bias = 0.0;
};

SparseGrad loss_gradient(const Classifier& model, const PrefixedInput& input, double y);

struct TrainConfig {
    double lr = 0.05;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    int batch_size = 16;
    std::optional<int64_t> epochs;     // exactly one of epochs / max_steps
    std::optional<int64_t> max_steps;  // governs the loop length
    uint64_t shuffle_seed = 0;
};

void validate_train_config(const TrainConfig& cfg);

// Adam moments over weights plus bias (bias lives at index dim). Sparse
// updates: moments decay only at indices touched by the gradient.
struct AdamState {
    std::vector<double> m;
    std::vector<double> v;
    int64_t t = 0;
    double lr = 0.05;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double beta1_pow = 1.0;  // beta1^t, kept incrementally
    double beta2_pow = 1.0;

    static AdamState init(size_t dim, const TrainConfig& cfg);
};

void adam_step(AdamState& state, Classifier& model, const SparseGrad& grad);

using Example = std::pair<PrefixedInput, double>;

// Incremental minibatch trainer; train() drives it, and callers that need to
// rebuild the example set between passes (resampled augmentation) use it
// directly. One step = one minibatch Adam update on the mean gradient.
class Trainer {
public:
    Trainer(Classifier model, const TrainConfig& cfg);

    void set_examples(const std::vector<Example>& examples);

    // Runs one pass over the current examples (shuffled by (shuffle_seed,
    // pass index)), stopping early at step_cap when given. Returns the
    // number of steps taken.
    int64_t run_pass(std::optional<int64_t> step_cap);

    double mean_loss() const;  // over the current example set
    int64_t steps_done() const { return steps_done_; }
    const Classifier& model() const { return model_; }
    Classifier take_model(uint64_t seed_for_meta);

private:
    Classifier model_;
    TrainConfig cfg_;
    AdamState state_;
    std::vector<SparseVector> features_;
    std::vector<double> targets_;
    int64_t steps_done_ = 0;
    int64_t pass_index_ = 0;
};

// Seeded-shuffle minibatch training for epochs or max_steps, whichever the
// config sets. Returns the model with seed/steps/final mean loss recorded.
Classifier train(Classifier model, const std::vector<Example>& examples, const TrainConfig& cfg);

// Versioned JSON checkpoint; only nonzero weights are stored. Round-trips
// weights exactly (shortest round-trip decimal form).
std::string checkpoint_to_json(const Classifier& model);
Classifier checkpoint_from_json(const std::string& text);
void save_checkpoint(const Classifier& model, const std::string& path);
Classifier load_checkpoint(const std::string& path);

}  // namespace tempdrift
