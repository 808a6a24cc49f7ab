#include "tempdrift/model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <stdexcept>

#include "json.hpp"

#include "tempdrift/io.hpp"
#include "tempdrift/rng.hpp"

namespace tempdrift {

namespace {

using nlohmann::json;

constexpr double kProbClamp = 1e-12;
constexpr char kFieldSep = '\x1f';
constexpr std::string_view kCheckpointSchema = "tempdrift.checkpoint.v1";

double clamp_proba(double p) {
    return std::min(1.0 - kProbClamp, std::max(kProbClamp, p));
}

double raw_score(const Classifier& model, const SparseVector& x) {
    double z = model.bias;
    for (size_t i = 0; i < x.indices.size(); ++i) {
        z += model.weights[x.indices[i]] * x.values[i];
    }
    return z;
}

}  // namespace

void validate_featurizer_config(const FeaturizerConfig& cfg) {
    if (cfg.hash_dim_log2 < 8 || cfg.hash_dim_log2 > 26) {
        throw std::runtime_error("featurizer: hash_dim_log2 must be in [8, 26]");
    }
}

std::vector<std::string> tokenize(std::string_view body) {
    std::vector<std::string> tokens;
    size_t i = 0;
    const size_t n = body.size();
    const auto is_space = [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; };
    const auto is_punct = [](char c) { return std::ispunct(static_cast<unsigned char>(c)) != 0; };
    while (i < n) {
        if (is_space(body[i])) {
            ++i;
            continue;
        }
        size_t j = i;
        while (j < n && !is_space(body[j])) ++j;
        const std::string_view chunk = body.substr(i, j - i);

        size_t a = 0;
        size_t b = chunk.size();
        while (a < b && is_punct(chunk[a])) {
            tokens.emplace_back(1, chunk[a]);
            ++a;
        }
        size_t core_end = b;
        while (core_end > a && is_punct(chunk[core_end - 1])) --core_end;
        if (core_end > a) {
            std::string core(chunk.substr(a, core_end - a));
            for (char& c : core) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
            tokens.push_back(std::move(core));
        }
        for (size_t k = core_end; k < b; ++k) tokens.emplace_back(1, chunk[k]);
        i = j;
    }
    return tokens;
}

SparseVector featurize(const PrefixedInput& input, const FeaturizerConfig& cfg) {
    validate_featurizer_config(cfg);
    const std::vector<std::string> tokens = tokenize(input.body);
    const std::string year = std::to_string(input.year);
    const uint64_t mask = (uint64_t{1} << cfg.hash_dim_log2) - 1;

    std::vector<uint32_t> raw;
    raw.reserve(tokens.size() * 3 + 2);
    std::string buf;
    const auto push = [&](const std::string& feature) {
        raw.push_back(static_cast<uint32_t>(fnv1a64(feature) & mask));
    };

    for (const auto& t : tokens) push("u:" + t);
    if (cfg.use_bigrams) {
        for (size_t i = 0; i + 1 < tokens.size(); ++i) {
            buf = "b:";
            buf += tokens[i];
            buf += kFieldSep;
            buf += tokens[i + 1];
            push(buf);
        }
    }
    push("y:" + year);
    if (cfg.use_year_cross) {
        for (const auto& t : tokens) {
            buf = "x:";
            buf += year;
            buf += kFieldSep;
            buf += t;
            push(buf);
        }
    }

    std::sort(raw.begin(), raw.end());
    SparseVector out;
    out.indices.reserve(raw.size());
    out.values.reserve(raw.size());
    for (uint32_t idx : raw) {
        if (!out.indices.empty() && out.indices.back() == idx) {
            out.values.back() += 1.0;
        } else {
            out.indices.push_back(idx);
            out.values.push_back(1.0);
        }
    }
    return out;
}

Classifier Classifier::zeros(const FeaturizerConfig& cfg) {
    validate_featurizer_config(cfg);
    Classifier model;
    model.featurizer = cfg;
    model.weights.assign(cfg.dim(), 0.0);
    return model;
}

double sigmoid(double z) {
    if (z >= 0.0) {
        const double e = std::exp(-z);
        return 1.0 / (1.0 + e);
    }
    const double e = std::exp(z);
    return e / (1.0 + e);
}

double predict_proba(const Classifier& model, const PrefixedInput& input) {
    return sigmoid(raw_score(model, featurize(input, model.featurizer)));
}

Sentiment classify(double p, double threshold) {
    return p > threshold ? Sentiment::positive : Sentiment::negative;
}

double bce_loss(double p, double y) {
    const double q = clamp_proba(p);
    return -(y * std::log(q) + (1.0 - y) * std::log(1.0 - q));
}

SparseGrad loss_gradient(const Classifier& model, const PrefixedInput& input, double y) {
    const SparseVector x = featurize(input, model.featurizer);
    const double p = sigmoid(raw_score(model, x));
    const double r = p - y;
    SparseGrad grad;
    grad.bias = r;
    grad.weights.reserve(x.indices.size());
    for (size_t i = 0; i < x.indices.size(); ++i) {
        grad.weights.emplace_back(x.indices[i], r * x.values[i]);
    }
    return grad;
}

void validate_train_config(const TrainConfig& cfg) {
    if (cfg.epochs.has_value() == cfg.max_steps.has_value()) {
        throw std::runtime_error("train config: exactly one of epochs / max_steps must be set");
    }
    if (cfg.epochs && *cfg.epochs < 0) throw std::runtime_error("train config: epochs < 0");
    if (cfg.max_steps && *cfg.max_steps < 0) throw std::runtime_error("train config: max_steps < 0");
    if (!(cfg.lr > 0.0)) throw std::runtime_error("train config: lr must be > 0");
    if (cfg.batch_size < 1) throw std::runtime_error("train config: batch_size must be >= 1");
    if (!(cfg.beta1 > 0.0 && cfg.beta1 < 1.0) || !(cfg.beta2 > 0.0 && cfg.beta2 < 1.0)) {
        throw std::runtime_error("train config: betas must be in (0, 1)");
    }
    if (!(cfg.epsilon > 0.0)) throw std::runtime_error("train config: epsilon must be > 0");
}

AdamState AdamState::init(size_t dim, const TrainConfig& cfg) {
    AdamState st;
    st.m.assign(dim + 1, 0.0);  // +1: bias slot
    st.v.assign(dim + 1, 0.0);
    st.lr = cfg.lr;
    st.beta1 = cfg.beta1;
    st.beta2 = cfg.beta2;
    st.epsilon = cfg.epsilon;
    return st;
}

void adam_step(AdamState& state, Classifier& model, const SparseGrad& grad) {
    if (state.m.size() != model.weights.size() + 1) {
        throw std::runtime_error("adam_step: state/model dimension mismatch");
    }
    state.t += 1;
    state.beta1_pow *= state.beta1;
    state.beta2_pow *= state.beta2;
    const double bc1 = 1.0 - state.beta1_pow;
    const double bc2 = 1.0 - state.beta2_pow;

    const auto update = [&](size_t slot, double g, double& param) {
        state.m[slot] = state.beta1 * state.m[slot] + (1.0 - state.beta1) * g;
        state.v[slot] = state.beta2 * state.v[slot] + (1.0 - state.beta2) * g * g;
        const double m_hat = state.m[slot] / bc1;
        const double v_hat = state.v[slot] / bc2;
        param -= state.lr * m_hat / (std::sqrt(v_hat) + state.epsilon);
    };

    for (const auto& [idx, g] : grad.weights) update(idx, g, model.weights[idx]);
    update(model.weights.size(), grad.bias, model.bias);
}

Trainer::Trainer(Classifier model, const TrainConfig& cfg)
    : model_(std::move(model)), cfg_(cfg), state_(AdamState::init(model_.weights.size(), cfg)) {
    validate_train_config(cfg_);
}

void Trainer::set_examples(const std::vector<Example>& examples) {
    features_.clear();
    targets_.clear();
    features_.reserve(examples.size());
    targets_.reserve(examples.size());
    for (const auto& [input, target] : examples) {
        if (target < 0.0 || target > 1.0) {
            throw std::runtime_error("train: target outside [0, 1]");
        }
        features_.push_back(featurize(input, model_.featurizer));
        targets_.push_back(target);
    }
}

int64_t Trainer::run_pass(std::optional<int64_t> step_cap) {
    const size_t n = features_.size();
    if (n == 0) throw std::runtime_error("train: empty example list");

    std::vector<size_t> order(n);
    for (size_t i = 0; i < n; ++i) order[i] = i;
    Rng rng = stream_for(cfg_.shuffle_seed, "shuffle", static_cast<uint64_t>(pass_index_));
    shuffle_indices(order, rng);
    ++pass_index_;

    const size_t bs = static_cast<size_t>(cfg_.batch_size);
    int64_t steps_this_pass = 0;
    for (size_t start = 0; start < n; start += bs) {
        if (step_cap && steps_done_ >= *step_cap) break;
        const size_t end = std::min(n, start + bs);
        const double inv = 1.0 / static_cast<double>(end - start);

        // mean-of-batch gradient, accumulated in batch order over a sorted
        // index map so the reduction order is fixed
        std::map<uint32_t, double> weight_grad;
        double bias_grad = 0.0;
        for (size_t k = start; k < end; ++k) {
            const size_t ex = order[k];
            const SparseVector& x = features_[ex];
            const double p = sigmoid(raw_score(model_, x));
            const double r = (p - targets_[ex]) * inv;
            bias_grad += r;
            for (size_t i = 0; i < x.indices.size(); ++i) {
                weight_grad[x.indices[i]] += r * x.values[i];
            }
        }
        SparseGrad grad;
        grad.bias = bias_grad;
        grad.weights.assign(weight_grad.begin(), weight_grad.end());
        adam_step(state_, model_, grad);
        ++steps_done_;
        ++steps_this_pass;
    }
    return steps_this_pass;
}

double Trainer::mean_loss() const {
    if (features_.empty()) return 0.0;
    double total = 0.0;
    for (size_t i = 0; i < features_.size(); ++i) {
        total += bce_loss(sigmoid(raw_score(model_, features_[i])), targets_[i]);
    }
    return total / static_cast<double>(features_.size());
}

Classifier Trainer::take_model(uint64_t seed_for_meta) {
    model_.meta.seed = seed_for_meta;
    model_.meta.steps = steps_done_;
    model_.meta.final_loss = mean_loss();
    return std::move(model_);
}

Classifier train(Classifier model, const std::vector<Example>& examples, const TrainConfig& cfg) {
    validate_train_config(cfg);
    if (examples.empty()) throw std::runtime_error("train: empty example list");

    Trainer trainer(std::move(model), cfg);
    trainer.set_examples(examples);
    if (cfg.epochs) {
        for (int64_t pass = 0; pass < *cfg.epochs; ++pass) trainer.run_pass(std::nullopt);
    } else {
        while (trainer.steps_done() < *cfg.max_steps) trainer.run_pass(*cfg.max_steps);
    }
    return trainer.take_model(cfg.shuffle_seed);
}

std::string checkpoint_to_json(const Classifier& model) {
    std::vector<uint32_t> indices;
    std::vector<double> values;
    for (size_t i = 0; i < model.weights.size(); ++i) {
        if (model.weights[i] != 0.0) {
            indices.push_back(static_cast<uint32_t>(i));
            values.push_back(model.weights[i]);
        }
    }
    json out;
    out["schema"] = kCheckpointSchema;
    out["featurizer"] = {{"hash_dim_log2", model.featurizer.hash_dim_log2},
                         {"use_bigrams", model.featurizer.use_bigrams},
                         {"use_year_cross", model.featurizer.use_year_cross}};
    out["bias"] = model.bias;
    out["weights"] = {{"indices", indices}, {"values", values}};
    out["meta"] = {{"seed", model.meta.seed},
                   {"steps", model.meta.steps},
                   {"final_loss", model.meta.final_loss}};
    return out.dump();
}

Classifier checkpoint_from_json(const std::string& text) {
    json in;
    try {
        in = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::runtime_error(std::string("checkpoint: invalid JSON: ") + e.what());
    }
    if (!in.contains("schema") || in["schema"] != kCheckpointSchema) {
        throw std::runtime_error("checkpoint: missing or unsupported schema");
    }
    FeaturizerConfig cfg;
    cfg.hash_dim_log2 = in.at("featurizer").at("hash_dim_log2").get<int>();
    cfg.use_bigrams = in.at("featurizer").at("use_bigrams").get<bool>();
    cfg.use_year_cross = in.at("featurizer").at("use_year_cross").get<bool>();

    Classifier model = Classifier::zeros(cfg);
    model.bias = in.at("bias").get<double>();
    const auto& indices = in.at("weights").at("indices");
    const auto& values = in.at("weights").at("values");
    if (indices.size() != values.size()) {
        throw std::runtime_error("checkpoint: weights indices/values length mismatch");
    }
    uint64_t prev = 0;
    bool first = true;
    for (size_t i = 0; i < indices.size(); ++i) {
        const auto idx = indices[i].get<uint64_t>();
        if (idx >= model.weights.size()) throw std::runtime_error("checkpoint: weight index out of range");
        if (!first && idx <= prev) throw std::runtime_error("checkpoint: weight indices not increasing");
        prev = idx;
        first = false;
        model.weights[idx] = values[i].get<double>();
    }
    model.meta.seed = in.at("meta").at("seed").get<uint64_t>();
    model.meta.steps = in.at("meta").at("steps").get<int64_t>();
    model.meta.final_loss = in.at("meta").at("final_loss").get<double>();
    return model;
}

void save_checkpoint(const Classifier& model, const std::string& path) {
    write_file_atomic(path, checkpoint_to_json(model));
}

Classifier load_checkpoint(const std::string& path) {
    return checkpoint_from_json(read_file(path));
}

}  // namespace tempdrift
