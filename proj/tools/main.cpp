#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "skipgan/errors.hpp"
#include "skipgan/experiment.hpp"
#include "skipgan/synthetic.hpp"

namespace {

// "kind[:path[:class]]", e.g. "cifar10:/data/cifar10:car",
// "image-folder:/data/frames", "synthetic".
skipgan::DatasetSpec parse_dataset_flag(const std::string& text) {
    skipgan::DatasetSpec spec;
    const auto first = text.find(':');
    spec.kind = text.substr(0, first);
    if (first != std::string::npos) {
        const auto second = text.find(':', first + 1);
        spec.path = text.substr(first + 1, second == std::string::npos
                                               ? std::string::npos
                                               : second - first - 1);
        if (second != std::string::npos)
            spec.anomalous_class =
                skipgan::cifar10_class_from_json(nlohmann::json(text.substr(second + 1)));
    }
    spec.validate();
    return spec;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Adversarially trained reconstruction model for image anomaly detection"};
    app.require_subcommand(1);

    // train
    auto* train = app.add_subcommand("train", "Train one model per seed from a config file");
    std::string train_config_path;
    std::string train_out;
    std::vector<std::uint64_t> train_seeds;
    train->add_option("--config", train_config_path, "Experiment config (JSON)")
        ->required();
    train->add_option("--out", train_out, "Override the configured output directory");
    train->add_option("--seed", train_seeds, "Override the configured seed list (repeatable)");

    // score
    auto* score = app.add_subcommand("score", "Score a test set with a trained checkpoint");
    std::string score_checkpoint, score_dataset, score_out = "scores.csv";
    double score_lambda = skipgan::ScoreConfig{}.lambda_score;
    int score_batch = 64;
    score->add_option("--checkpoint", score_checkpoint, "Checkpoint file")->required();
    score
        ->add_option("--dataset", score_dataset,
                     "Dataset spec: kind[:path[:class]] with kind one of "
                     "cifar10 | image-folder | synthetic")
        ->required();
    score->add_option("--out", score_out, "Scores CSV path");
    score->add_option("--lambda", score_lambda, "Weight on the reconstruction score R");
    score->add_option("--batch-size", score_batch, "Scoring batch size");

    // eval
    auto* eval = app.add_subcommand("eval", "Compute AUC, ROC and histograms from scores files");
    std::vector<std::string> eval_files;
    std::string eval_out = "eval";
    int eval_bins = 30;
    eval->add_option("scores", eval_files, "One scores CSV per run")->required();
    eval->add_option("--out", eval_out, "Output directory");
    eval->add_option("--bins", eval_bins, "Histogram bin count");

    // synth
    auto* synth = app.add_subcommand("synth", "Write a synthetic image-folder dataset");
    skipgan::SyntheticSpec synth_spec;
    std::string synth_out;
    synth->add_option("--out", synth_out, "Output directory")->required();
    synth->add_option("--size", synth_spec.image_size, "Image side length");
    synth->add_option("--channels", synth_spec.channels, "1 (PGM) or 3 (PPM)");
    synth->add_option("--train", synth_spec.n_train, "Training normals");
    synth->add_option("--test-normal", synth_spec.n_test_normal, "Test normals");
    synth->add_option("--test-abnormal", synth_spec.n_test_abnormal, "Test abnormals");
    synth->add_option("--blobs", synth_spec.n_blobs, "Gaussian bumps per channel");
    synth->add_option("--rect-min", synth_spec.rect_min, "Minimum anomaly rectangle side");
    synth->add_option("--rect-max", synth_spec.rect_max, "Maximum anomaly rectangle side");
    synth->add_option("--seed", synth_spec.seed, "Generation seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (app.got_subcommand(train)) {
            skipgan::ExperimentConfig config = skipgan::load_experiment_config(train_config_path);
            if (!train_out.empty()) config.output_dir = train_out;
            if (!train_seeds.empty()) config.seeds = train_seeds;
            skipgan::run_train(config);
        } else if (app.got_subcommand(score)) {
            skipgan::ScoreConfig cfg;
            cfg.lambda_score = score_lambda;
            skipgan::run_score(score_checkpoint, parse_dataset_flag(score_dataset), cfg, score_out,
                               score_batch);
        } else if (app.got_subcommand(eval)) {
            skipgan::run_eval(eval_files, eval_out, eval_bins);
        } else if (app.got_subcommand(synth)) {
            skipgan::generate_synthetic(synth_spec, synth_out);
            std::cout << "wrote " << synth_spec.n_train << "/" << synth_spec.n_test_normal << "/"
                      << synth_spec.n_test_abnormal << " images under " << synth_out << "\n";
        }
    } catch (const skipgan::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const skipgan::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
