#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "skipgan/dataset.hpp"
#include "skipgan/generator.hpp"
#include "skipgan/scoring.hpp"
#include "skipgan/synthetic.hpp"
#include "skipgan/trainer.hpp"

namespace skipgan {

// Where the images come from. For cifar10 and image-folder, `path` may be
// left empty and resolved from the SKIPGAN_DATA_ROOT environment variable.
struct DatasetSpec {
    std::string kind;  // "cifar10" | "image-folder" | "synthetic"
    std::string path;
    int anomalous_class = -1;  // cifar10: class treated as anomalous, 0..9
    int patch_window = 0;      // image-folder: 0 disables patching
    int patch_stride = 0;      // defaults to patch_window / 2 when patching
    std::uint64_t split_seed = 0;
    SyntheticSpec synthetic;

    void validate() const;
};

struct ExperimentConfig {
    DatasetSpec dataset;
    GeneratorConfig model;
    TrainConfig train;
    ScoreConfig score;
    std::string output_dir = "runs";
    std::vector<std::uint64_t> seeds = {0};
    int histogram_bins = 30;
    std::uint64_t feature_subsample = 1000;

    void validate() const;
};

// 0..9 (accepts the usual class names; "car" means automobile).
int cifar10_class_from_json(const nlohmann::json& value);

// Strict parsing: unknown keys anywhere are configuration errors.
ExperimentConfig parse_experiment_config(const nlohmann::json& j);
ExperimentConfig load_experiment_config(const std::string& path);
nlohmann::json experiment_config_to_json(const ExperimentConfig& c);

AnomalyDataset load_dataset(const DatasetSpec& spec);

// Test-set AUC of the current models under the experiment's score settings.
double evaluate_auc(const Generator& g, const Discriminator& d,
                    const AnomalyDataset& dataset, const ScoreConfig& score_cfg, int batch_size);

// Trains once per seed; each run writes checkpoint.bin, history.json and
// config.json under <output_dir>/seed-<seed>/. Returns per-seed best AUCs
// (-1 when a run never evaluated).
std::vector<double> run_train(const ExperimentConfig& config);

void run_score(const std::string& checkpoint_path, const DatasetSpec& dataset,
               const ScoreConfig& score_cfg, const std::string& out_path, int batch_size = 64);

struct EvalSummary {
    std::vector<double> aucs;  // one per scores file
    double mean = 0.0;
    double min = 0.0;
    double max = 0.0;
};
EvalSummary run_eval(const std::vector<std::string>& scores_paths, const std::string& out_dir,
                     int histogram_bins);

}  // namespace skipgan
