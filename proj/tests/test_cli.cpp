#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"

#include "tempdrift/cli.hpp"
#include "tempdrift/io.hpp"
#include "tempdrift/manifest.hpp"

using namespace tempdrift;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& tag) {
    const fs::path dir = fs::temp_directory_path() / ("td_cli_" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string write_json(const fs::path& path, const std::string& content) {
    std::ofstream out(path);
    out << content;
    return path.string();
}

// small spec so CLI tests stay fast
const char* kSmallSpec = R"({
  "docs_per_split": {"train": 200, "unlabeled": 150, "within": 80, "short": 80, "long": 80},
  "seed": 7
})";

const char* kSmallPipeline = R"({
  "seed": 7,
  "student_steps": 400,
  "featurizer": {"hash_dim_log2": 14}
})";

void synth_into(const fs::path& dir) {
    const auto spec = write_json(dir / "spec.json", kSmallSpec);
    cli::SynthOptions options;
    options.spec_path = spec;
    options.out_dir = (dir / "data").string();
    std::ostringstream log;
    cli::cmd_synth(options, log);
}

size_t line_count(const std::string& path) {
    std::ifstream in(path);
    size_t lines = 0;
    std::string line;
    while (std::getline(in, line)) ++lines;
    return lines;
}

}  // namespace

TEST_CASE("cmd_synth writes the five corpus files plus a manifest") {
    const auto dir = fresh_dir("synth");
    synth_into(dir);

    const auto data = dir / "data";
    CHECK(line_count((data / "train.jsonl").string()) == 200);
    CHECK(line_count((data / "unlabeled.jsonl").string()) == 150);
    CHECK(line_count((data / "eval_within.jsonl").string()) == 80);
    CHECK(line_count((data / "eval_short.jsonl").string()) == 80);
    CHECK(line_count((data / "eval_long.jsonl").string()) == 80);
    CHECK(fs::exists(data / "manifest.json"));

    SUBCASE("manifest records the seed, config, digests and outputs") {
        const auto manifest = nlohmann::json::parse(read_file((data / "manifest.json").string()));
        CHECK(manifest["command"] == "synth");
        CHECK(manifest["seed"] == 7);
        CHECK(manifest["config"]["docs_per_split"]["train"] == 200);
        CHECK(manifest["inputs"].size() == 1);
        CHECK(manifest["outputs"].size() == 5);
    }
    SUBCASE("same spec produces identical file digests") {
        const auto dir2 = fresh_dir("synth_again");
        synth_into(dir2);
        for (const char* name :
             {"train.jsonl", "unlabeled.jsonl", "eval_within.jsonl", "eval_short.jsonl",
              "eval_long.jsonl"}) {
            CHECK(file_digest_hex((data / name).string()) ==
                  file_digest_hex((dir2 / "data" / name).string()));
        }
    }
    SUBCASE("invalid spec fails with a field-level message") {
        cli::SynthOptions options;
        options.spec_path = write_json(dir / "bad.json", R"({"tokens_per_doc": 4})");
        options.out_dir = (dir / "bad_out").string();
        std::ostringstream log;
        CHECK_THROWS_WITH_AS(cli::cmd_synth(options, log), doctest::Contains("tokens_per_doc"),
                             std::runtime_error);
    }
}

TEST_CASE("cmd_pipeline runs end to end and is byte-deterministic") {
    const auto dir = fresh_dir("pipeline");
    synth_into(dir);
    const auto config = write_json(dir / "pipeline.json", kSmallPipeline);

    cli::PipelineOptions options;
    options.config_path = config;
    options.data_dir = (dir / "data").string();
    options.variant = "sl-ft";
    options.augment = "on";
    options.out_dir = (dir / "run1").string();
    std::ostringstream log1;
    cli::cmd_pipeline(options, log1);

    for (const char* name : {"teacher.ckpt.json", "final.ckpt.json", "pseudo_labels.jsonl",
                             "report.json", "report.txt", "report.csv", "manifest.json"}) {
        CHECK(fs::exists(dir / "run1" / name));
    }
    CHECK(log1.str().find("+sl(aug)+ft") != std::string::npos);

    SUBCASE("second identical run produces byte-identical artifacts") {
        options.out_dir = (dir / "run2").string();
        std::ostringstream log2;
        cli::cmd_pipeline(options, log2);
        for (const char* name :
             {"report.json", "pseudo_labels.jsonl", "teacher.ckpt.json", "final.ckpt.json"}) {
            CHECK(read_file((dir / "run1" / name).string()) ==
                  read_file((dir / "run2" / name).string()));
        }
    }
    SUBCASE("baseline ignores unlabeled data entirely") {
        cli::PipelineOptions base = options;
        base.variant = "baseline";
        base.unlabeled_path = (dir / "does_not_exist.jsonl").string();
        base.out_dir = (dir / "run_base").string();
        std::ostringstream log;
        cli::cmd_pipeline(base, log);
        CHECK(fs::exists(dir / "run_base" / "report.json"));
        CHECK(!fs::exists(dir / "run_base" / "pseudo_labels.jsonl"));
    }
    SUBCASE("single eval file with gaps reproduces the bucketized report") {
        // merge the three bucket files into one eval corpus
        std::string merged;
        for (const char* name : {"eval_within.jsonl", "eval_short.jsonl", "eval_long.jsonl"}) {
            merged += read_file((dir / "data" / name).string());
        }
        const auto eval_path = (dir / "eval_all.jsonl").string();
        write_file_atomic(eval_path, merged);

        cli::PipelineOptions single = options;
        single.eval_path = eval_path;
        single.short_gap = 2;
        single.long_gap = 5;
        single.out_dir = (dir / "run_single").string();
        std::ostringstream log;
        cli::cmd_pipeline(single, log);
        CHECK(read_file((dir / "run_single" / "report.json").string()) ==
              read_file((dir / "run1" / "report.json").string()));
    }
    SUBCASE("missing gap flags with --eval is an error") {
        cli::PipelineOptions bad = options;
        bad.eval_path = (dir / "data" / "eval_within.jsonl").string();
        bad.out_dir = (dir / "run_bad").string();
        std::ostringstream log;
        CHECK_THROWS_WITH_AS(cli::cmd_pipeline(bad, log), doctest::Contains("--short-gap"),
                             std::runtime_error);
    }
    SUBCASE("report json matches the documented schema") {
        const auto report = nlohmann::json::parse(read_file((dir / "run1" / "report.json").string()));
        CHECK(report.contains("method"));
        CHECK(report["f1"].contains("within"));
        CHECK(report["rpd"].contains("within_short"));
        CHECK(report["counts"]["within"] == 80);
    }
}

TEST_CASE("seed resolution prefers flag, then config, then environment") {
    std::ostringstream log;
    CHECK(cli::resolve_seed(99, 12, log) == 99);
    CHECK(cli::resolve_seed(std::nullopt, 12, log) == 12);

    setenv("TEMPDRIFT_SEED", "4242", 1);
    CHECK(cli::resolve_seed(std::nullopt, std::nullopt, log) == 4242);
    setenv("TEMPDRIFT_SEED", "junk", 1);
    CHECK_THROWS_AS(cli::resolve_seed(std::nullopt, std::nullopt, log), std::runtime_error);
    unsetenv("TEMPDRIFT_SEED");

    SUBCASE("with nothing set a seed is drawn and printed") {
        std::ostringstream drawn_log;
        const uint64_t a = cli::resolve_seed(std::nullopt, std::nullopt, drawn_log);
        const uint64_t b = cli::resolve_seed(std::nullopt, std::nullopt, drawn_log);
        CHECK(a != b);  // 64-bit draws; collision would be astronomical
        CHECK(drawn_log.str().find("seed drawn") != std::string::npos);
    }
}

TEST_CASE("cmd_ablation emits per-seed and mean tables with the comparison") {
    const auto dir = fresh_dir("ablation");
    const auto config = write_json(dir / "ablation.json", R"({
        "drift": {"docs_per_split": {"train": 150, "unlabeled": 120, "within": 60, "short": 60, "long": 60}},
        "pipeline": {"student_steps": 300, "featurizer": {"hash_dim_log2": 14}}
    })");

    cli::AblationOptions options;
    options.config_path = config;
    options.seeds = 1;
    options.seed = 5;
    options.out_dir = (dir / "out").string();
    std::ostringstream log;
    cli::cmd_ablation(options, log);

    const auto out = nlohmann::json::parse(read_file((dir / "out" / "ablation.json").string()));
    CHECK(out["seeds"] == nlohmann::json::array({5}));
    REQUIRE(out["per_seed"].size() == 1);
    CHECK(out["per_seed"][0]["rows"].size() == 5);
    CHECK(out["mean"].size() == 5);
    CHECK(out["comparison"]["rpd_within_short"].contains("baseline_mean"));
    CHECK(out["comparison"]["f1_short"].contains("sl_aug_ft_geq_seeds"));

    CHECK(fs::exists(dir / "out" / "ablation.txt"));
    const std::string csv = read_file((dir / "out" / "ablation.csv").string());
    CHECK(csv.find("method,f1_within") == 0);
    CHECK(line_count((dir / "out" / "ablation.csv").string()) == 6);  // header + 5 methods

    const std::string text = log.str();
    CHECK(text.find("baseline") != std::string::npos);
    CHECK(text.find("+sl(aug)+ft") != std::string::npos);
    CHECK(text.find("seeds") != std::string::npos);
}

TEST_CASE("cmd_predict prints deterministic probability rows") {
    const auto dir = fresh_dir("predict");
    synth_into(dir);
    const auto config = write_json(dir / "pipeline.json", kSmallPipeline);

    cli::PipelineOptions pipeline;
    pipeline.config_path = config;
    pipeline.data_dir = (dir / "data").string();
    pipeline.variant = "baseline";
    pipeline.out_dir = (dir / "model_run").string();
    std::ostringstream log;
    cli::cmd_pipeline(pipeline, log);
    const std::string model = (dir / "model_run" / "final.ckpt.json").string();

    cli::PredictOptions predict;
    predict.model_path = model;
    predict.text = "dr0 dr1 dr2";
    predict.sweep_years = "2013..2023";

    std::ostringstream out1;
    cli::cmd_predict(predict, out1);
    const std::string table = out1.str();

    // 11 sweep years + header
    size_t lines = 0;
    for (char c : table) lines += c == '\n';
    CHECK(lines == 12);
    CHECK(table.find("id\tyear\tprobability\tlabel") == 0);
    CHECK(table.find("2013") != std::string::npos);
    CHECK(table.find("2023") != std::string::npos);

    SUBCASE("probabilities stay in [0, 1] and reruns are byte-identical") {
        std::ostringstream out2;
        cli::cmd_predict(predict, out2);
        CHECK(out2.str() == table);

        std::istringstream rows(table);
        std::string line;
        std::getline(rows, line);  // header
        while (std::getline(rows, line)) {
            const auto first = line.find('\t');
            const auto second = line.find('\t', first + 1);
            const auto third = line.find('\t', second + 1);
            const double p = std::stod(line.substr(second + 1, third - second - 1));
            CHECK(p >= 0.0);
            CHECK(p <= 1.0);
            const std::string label = line.substr(third + 1);
            CHECK((label == "positive" || label == "negative"));
        }
    }
    SUBCASE("missing year without a sweep is an error") {
        cli::PredictOptions bad;
        bad.model_path = model;
        bad.text = "hello";
        std::ostringstream out;
        CHECK_THROWS_WITH_AS(cli::cmd_predict(bad, out), doctest::Contains("missing year"),
                             std::runtime_error);
    }
    SUBCASE("jsonl input uses each document's own year") {
        const auto input = write_json(dir / "inputs.jsonl",
                                      R"({"id":"q1","text":"sp0 sp1 sp2","year":2015})" "\n");
        cli::PredictOptions file_predict;
        file_predict.model_path = model;
        file_predict.input_path = input;
        std::ostringstream out;
        cli::cmd_predict(file_predict, out);
        CHECK(out.str().find("q1\t2015\t") != std::string::npos);
    }
    SUBCASE("bad sweep format is rejected") {
        cli::PredictOptions bad = predict;
        bad.sweep_years = "2013-2023";
        std::ostringstream out;
        CHECK_THROWS_AS(cli::cmd_predict(bad, out), std::runtime_error);
    }
}
