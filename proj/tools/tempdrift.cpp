#include <iostream>

#include "CLI11.hpp"

#include "tempdrift/cli.hpp"
#include "tempdrift/manifest.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Temporal-robustness sentiment pipeline: date-prefixed inputs, "
                 "self-labeling with date-prefix augmentation, per-bucket macro-F1/RPD "
                 "evaluation."};
    app.set_version_flag("--version", std::string(tempdrift::kToolVersion));
    app.require_subcommand(1);

    tempdrift::cli::SynthOptions synth;
    auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic drift corpus");
    synth_cmd->add_option("--spec", synth.spec_path, "Drift spec JSON (built-in defaults when omitted)");
    synth_cmd->add_option("--out", synth.out_dir, "Output directory")->required();
    synth_cmd->add_option("--seed", synth.seed, "Seed override");

    tempdrift::cli::PipelineOptions pipeline;
    auto* pipeline_cmd = app.add_subcommand("pipeline", "Run one pipeline variant end to end");
    pipeline_cmd->add_option("--config", pipeline.config_path, "Pipeline config JSON");
    pipeline_cmd->add_option("--data-dir", pipeline.data_dir, "Directory with the synth file layout");
    pipeline_cmd->add_option("--train", pipeline.train_path, "Labeled training corpus (JSONL/CSV)");
    pipeline_cmd->add_option("--unlabeled", pipeline.unlabeled_path, "Unlabeled corpus");
    pipeline_cmd->add_option("--eval-within", pipeline.eval_within_path, "Within-bucket eval corpus");
    pipeline_cmd->add_option("--eval-short", pipeline.eval_short_path, "Short-bucket eval corpus");
    pipeline_cmd->add_option("--eval-long", pipeline.eval_long_path, "Long-bucket eval corpus");
    pipeline_cmd->add_option("--eval", pipeline.eval_path,
                             "Single eval corpus, bucketized against the train year range");
    pipeline_cmd->add_option("--short-gap", pipeline.short_gap, "Short bucket gap in years (with --eval)");
    pipeline_cmd->add_option("--long-gap", pipeline.long_gap, "Long bucket gap in years (with --eval)");
    pipeline_cmd->add_option("--variant", pipeline.variant, "baseline, sl, or sl-ft")
        ->check(CLI::IsMember({"baseline", "sl", "sl-ft"}));
    pipeline_cmd->add_option("--augment", pipeline.augment, "Date-prefix augmentation: on or off")
        ->check(CLI::IsMember({"on", "off"}));
    pipeline_cmd->add_option("--seed", pipeline.seed, "Seed override");
    pipeline_cmd->add_option("--out", pipeline.out_dir, "Output directory")->required();

    tempdrift::cli::AblationOptions ablation;
    auto* ablation_cmd =
        app.add_subcommand("ablation", "Run all five method variants over N seeds");
    ablation_cmd->add_option("--config", ablation.config_path,
                             "JSON with optional \"drift\" and \"pipeline\" sections");
    ablation_cmd->add_option("--seeds", ablation.seeds, "Number of seeds")->check(CLI::PositiveNumber);
    ablation_cmd->add_option("--seed", ablation.seed, "Base seed (runs use base, base+1, ...)");
    ablation_cmd->add_option("--out", ablation.out_dir, "Output directory")->required();

    tempdrift::cli::PredictOptions predict;
    auto* predict_cmd = app.add_subcommand("predict", "Score inputs with a trained checkpoint");
    predict_cmd->add_option("--model", predict.model_path, "Model checkpoint")->required();
    predict_cmd->add_option("--input", predict.input_path, "Documents to score (JSONL/CSV)");
    predict_cmd->add_option("--text", predict.text, "Single input text");
    predict_cmd->add_option("--year", predict.year, "Prefix year for --text");
    predict_cmd->add_option("--sweep-years", predict.sweep_years,
                            "A..B: score each input once per prefix year");
    predict_cmd->add_option("--threshold", predict.threshold, "Positive-class threshold");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*synth_cmd) tempdrift::cli::cmd_synth(synth, std::cout);
        if (*pipeline_cmd) tempdrift::cli::cmd_pipeline(pipeline, std::cout);
        if (*ablation_cmd) tempdrift::cli::cmd_ablation(ablation, std::cout);
        if (*predict_cmd) tempdrift::cli::cmd_predict(predict, std::cout);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
