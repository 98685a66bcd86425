#include "skipgan/experiment.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>

#include "skipgan/config_json.hpp"
#include "skipgan/errors.hpp"
#include "skipgan/evaluation.hpp"
#include "skipgan/image_folder.hpp"
#include "skipgan/cifar10.hpp"
#include "skipgan/patches.hpp"

namespace skipgan {

namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kGeneratorInitStream = 0xF001;
constexpr std::uint64_t kDiscriminatorInitStream = 0xF002;

void write_text_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << text;
    if (!out) throw IoError("failed while writing '" + path.string() + "'");
}

nlohmann::json history_to_json(const TrainHistory& history, double best_auc) {
    nlohmann::json epochs = nlohmann::json::array();
    for (const auto& e : history.epochs)
        epochs.push_back({{"adv_g", e.adv_g},
                          {"adv_d", e.adv_d},
                          {"con", e.con},
                          {"lat", e.lat},
                          {"total_g", e.total_g}});
    return nlohmann::json{{"epochs", epochs},
                          {"eval_epochs", history.eval_epochs},
                          {"eval_aucs", history.eval_aucs},
                          {"best_eval", history.best_eval},
                          {"best_auc", best_auc}};
}

std::string resolve_data_path(const DatasetSpec& spec) {
    if (!spec.path.empty()) return spec.path;
    if (const char* root = std::getenv("SKIPGAN_DATA_ROOT")) {
        if (*root != '\0') return root;
    }
    throw ConfigError("dataset path is empty and SKIPGAN_DATA_ROOT is not set");
}

std::vector<LabeledImage> patch_split(const std::vector<LabeledImage>& images, int window,
                                      int stride) {
    std::vector<LabeledImage> out;
    for (const auto& image : images) {
        std::vector<LabeledImage> patches = extract_patches(image, window, stride);
        out.insert(out.end(), std::make_move_iterator(patches.begin()),
                   std::make_move_iterator(patches.end()));
    }
    return out;
}

}  // namespace

void DatasetSpec::validate() const {
    if (kind != "cifar10" && kind != "image-folder" && kind != "synthetic")
        throw ConfigError("dataset kind must be 'cifar10', 'image-folder' or 'synthetic'; got '" +
                          kind + "'");
    if (kind == "cifar10" && (anomalous_class < 0 || anomalous_class >= kCifarClassCount))
        throw ConfigError("cifar10 needs anomalous_class in 0..9");
    if (patch_window < 0 || patch_stride < 0)
        throw ConfigError("patch window and stride must be nonnegative");
    if (patch_window > 0 && kind != "image-folder")
        throw ConfigError("patching applies only to image-folder datasets");
    if (kind == "synthetic") synthetic.validate();
}

void ExperimentConfig::validate() const {
    dataset.validate();
    model.validate();
    train.validate();
    score.validate();
    if (seeds.empty()) throw ConfigError("at least one seed is required");
    if (histogram_bins < 1) throw ConfigError("histogram_bins must be at least 1");
}

int cifar10_class_from_json(const nlohmann::json& value) {
    static const std::map<std::string, int> names = {
        {"airplane", 0}, {"automobile", 1}, {"car", 1}, {"bird", 2}, {"cat", 3},
        {"deer", 4},     {"dog", 5},        {"frog", 6}, {"horse", 7}, {"ship", 8},
        {"truck", 9}};
    if (value.is_number_integer()) {
        const int c = value.get<int>();
        if (c < 0 || c >= kCifarClassCount)
            throw ConfigError("anomalous_class must lie in 0..9");
        return c;
    }
    if (value.is_string()) {
        const auto it = names.find(value.get<std::string>());
        if (it == names.end())
            throw ConfigError("unknown CIFAR-10 class name '" + value.get<std::string>() + "'");
        return it->second;
    }
    throw ConfigError("anomalous_class must be an integer or a class name");
}

ExperimentConfig parse_experiment_config(const nlohmann::json& j) {
    ExperimentConfig config;
    try {
        // active_seed appears in per-run snapshots; accepted so they reload.
        require_known_keys(j,
                           {"dataset", "model", "train", "score", "output_dir", "seeds",
                            "histogram_bins", "feature_subsample", "active_seed"},
                           "config");

        if (!j.contains("dataset")) throw ConfigError("config: missing 'dataset' section");
        {
            const auto& d = j.at("dataset");
            require_known_keys(d,
                               {"kind", "path", "anomalous_class", "patch_window", "patch_stride",
                                "split_seed", "synthetic"},
                               "dataset");
            if (!d.contains("kind")) throw ConfigError("dataset: missing 'kind'");
            d.at("kind").get_to(config.dataset.kind);
            if (d.contains("path")) d.at("path").get_to(config.dataset.path);
            if (d.contains("anomalous_class"))
                config.dataset.anomalous_class = cifar10_class_from_json(d.at("anomalous_class"));
            if (d.contains("patch_window")) d.at("patch_window").get_to(config.dataset.patch_window);
            if (d.contains("patch_stride")) d.at("patch_stride").get_to(config.dataset.patch_stride);
            if (d.contains("split_seed")) d.at("split_seed").get_to(config.dataset.split_seed);
            if (d.contains("synthetic")) {
                const auto& s = d.at("synthetic");
                require_known_keys(s,
                                   {"image_size", "channels", "n_train", "n_test_normal",
                                    "n_test_abnormal", "n_blobs", "rect_min", "rect_max", "seed"},
                                   "dataset.synthetic");
                auto& spec = config.dataset.synthetic;
                if (s.contains("image_size")) s.at("image_size").get_to(spec.image_size);
                if (s.contains("channels")) s.at("channels").get_to(spec.channels);
                if (s.contains("n_train")) s.at("n_train").get_to(spec.n_train);
                if (s.contains("n_test_normal")) s.at("n_test_normal").get_to(spec.n_test_normal);
                if (s.contains("n_test_abnormal"))
                    s.at("n_test_abnormal").get_to(spec.n_test_abnormal);
                if (s.contains("n_blobs")) s.at("n_blobs").get_to(spec.n_blobs);
                if (s.contains("rect_min")) s.at("rect_min").get_to(spec.rect_min);
                if (s.contains("rect_max")) s.at("rect_max").get_to(spec.rect_max);
                if (s.contains("seed")) s.at("seed").get_to(spec.seed);
            }
        }

        if (j.contains("model")) {
            const auto& m = j.at("model");
            require_known_keys(m, {"input_size", "in_channels", "nz", "base_filters", "n_blocks"},
                               "model");
            m.get_to(config.model);
        }

        if (j.contains("train")) {
            const auto& t = j.at("train");
            require_known_keys(t,
                               {"learning_rate", "beta1", "beta2", "max_epochs", "batch_size",
                                "weights", "seed", "lr_decay", "eval_every", "patience",
                                "latent_norm"},
                               "train");
            if (t.contains("weights"))
                require_known_keys(t.at("weights"), {"lambda_adv", "lambda_con", "lambda_lat"},
                                   "train.weights");
            t.get_to(config.train);
        }

        if (j.contains("score")) {
            const auto& s = j.at("score");
            require_known_keys(s, {"lambda_score"}, "score");
            if (s.contains("lambda_score")) s.at("lambda_score").get_to(config.score.lambda_score);
        }

        if (j.contains("output_dir")) j.at("output_dir").get_to(config.output_dir);
        if (j.contains("seeds")) {
            config.seeds.clear();
            j.at("seeds").get_to(config.seeds);
        }
        if (j.contains("histogram_bins")) j.at("histogram_bins").get_to(config.histogram_bins);
        if (j.contains("feature_subsample"))
            j.at("feature_subsample").get_to(config.feature_subsample);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    config.validate();
    return config;
}

ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
    }
    return parse_experiment_config(j);
}

nlohmann::json experiment_config_to_json(const ExperimentConfig& c) {
    nlohmann::json dataset{{"kind", c.dataset.kind},
                           {"path", c.dataset.path},
                           {"patch_window", c.dataset.patch_window},
                           {"patch_stride", c.dataset.patch_stride},
                           {"split_seed", c.dataset.split_seed}};
    if (c.dataset.kind == "cifar10") dataset["anomalous_class"] = c.dataset.anomalous_class;
    if (c.dataset.kind == "synthetic") {
        const auto& s = c.dataset.synthetic;
        dataset["synthetic"] = {{"image_size", s.image_size},
                                {"channels", s.channels},
                                {"n_train", s.n_train},
                                {"n_test_normal", s.n_test_normal},
                                {"n_test_abnormal", s.n_test_abnormal},
                                {"n_blobs", s.n_blobs},
                                {"rect_min", s.rect_min},
                                {"rect_max", s.rect_max},
                                {"seed", s.seed}};
    }
    return nlohmann::json{{"dataset", dataset},
                          {"model", c.model},
                          {"train", c.train},
                          {"score", nlohmann::json{{"lambda_score", c.score.lambda_score}}},
                          {"output_dir", c.output_dir},
                          {"seeds", c.seeds},
                          {"histogram_bins", c.histogram_bins},
                          {"feature_subsample", c.feature_subsample}};
}

AnomalyDataset load_dataset(const DatasetSpec& spec) {
    spec.validate();
    if (spec.kind == "synthetic") return generate_synthetic_dataset(spec.synthetic);

    if (spec.kind == "image-folder") {
        AnomalyDataset dataset = load_image_folder(resolve_data_path(spec));
        if (spec.patch_window > 0) {
            const int stride =
                spec.patch_stride > 0 ? spec.patch_stride : std::max(1, spec.patch_window / 2);
            AnomalyDataset patched;
            patched.train = patch_split(dataset.train, spec.patch_window, stride);
            patched.test = patch_split(dataset.test, spec.patch_window, stride);
            patched.validate();
            return patched;
        }
        return dataset;
    }

    Cifar10Archive archive = load_cifar10_archive(resolve_data_path(spec));
    SplitSpec split;
    split.anomalous_class = spec.anomalous_class;
    split.seed = spec.split_seed;
    AnomalyDataset dataset = make_one_class_out_split(archive.train, archive.test, split);
    dataset.validate_imbalance();
    return dataset;
}

double evaluate_auc(const Generator& g, const Discriminator& d, const AnomalyDataset& dataset,
                    const ScoreConfig& score_cfg, int batch_size) {
    const std::vector<ScoredSample> scored =
        score_dataset(g, d, dataset.test, score_cfg, batch_size);
    std::vector<double> scores(scored.size());
    std::vector<int> labels(scored.size());
    for (std::size_t i = 0; i < scored.size(); ++i) {
        scores[i] = scored[i].A;
        labels[i] = scored[i].label;
    }
    return auc(scores, labels);
}

std::vector<double> run_train(const ExperimentConfig& config) {
    config.validate();
    const AnomalyDataset dataset = load_dataset(config.dataset);

    std::error_code ec;
    fs::create_directories(config.output_dir, ec);
    if (ec) throw IoError("cannot create output directory '" + config.output_dir + "'");

    std::vector<double> best_aucs;
    for (const std::uint64_t seed : config.seeds) {
        const fs::path run_dir = fs::path(config.output_dir) / ("seed-" + std::to_string(seed));
        fs::create_directories(run_dir, ec);
        if (ec) throw IoError("cannot create run directory '" + run_dir.string() + "'");

        Generator g = build_generator(config.model, mix_seed(seed, kGeneratorInitStream));
        Discriminator d = build_discriminator(config.model, mix_seed(seed, kDiscriminatorInitStream));

        TrainConfig train_cfg = config.train;
        train_cfg.seed = seed;
        ScoreConfig score_cfg = config.score;
        score_cfg.latent_norm = train_cfg.latent_norm;

        const EvalHook hook = [&](const Generator& gg, const Discriminator& dd) {
            return evaluate_auc(gg, dd, dataset, score_cfg, train_cfg.batch_size);
        };

        Trainer trainer(g, d, train_cfg);
        FitResult result = trainer.fit(dataset, hook);

        save_checkpoint(result.checkpoint, (run_dir / "checkpoint.bin").string());
        write_text_file(run_dir / "history.json",
                        history_to_json(result.history, result.checkpoint.best_metric).dump(2) +
                            "\n");
        nlohmann::json snapshot = experiment_config_to_json(config);
        snapshot["active_seed"] = seed;
        write_text_file(run_dir / "config.json", snapshot.dump(2) + "\n");

        best_aucs.push_back(result.checkpoint.best_metric);
        std::cout << "seed " << seed << ": best AUC "
                  << (result.checkpoint.best_metric < 0 ? std::string("n/a")
                                                        : std::to_string(result.checkpoint.best_metric))
                  << " (epoch " << result.checkpoint.epoch << ")\n";
    }
    return best_aucs;
}

void run_score(const std::string& checkpoint_path, const DatasetSpec& dataset_spec,
               const ScoreConfig& score_cfg, const std::string& out_path, int batch_size) {
    const Checkpoint checkpoint = load_checkpoint(checkpoint_path);
    Generator g(checkpoint.gen_config);
    Discriminator d(checkpoint.gen_config);
    restore_checkpoint(checkpoint, g, d);

    const AnomalyDataset dataset = load_dataset(dataset_spec);
    ScoreConfig cfg = score_cfg;
    cfg.latent_norm = checkpoint.train_config.latent_norm;

    const std::vector<ScoredSample> samples = score_dataset(g, d, dataset.test, cfg, batch_size);
    write_scores_csv(samples, out_path);
    std::cout << "wrote " << samples.size() << " scores to " << out_path << "\n";
}

EvalSummary run_eval(const std::vector<std::string>& scores_paths, const std::string& out_dir,
                     int histogram_bins) {
    if (scores_paths.empty()) throw ConfigError("no scores files given");
    if (histogram_bins < 1) throw ConfigError("histogram_bins must be at least 1");

    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create output directory '" + out_dir + "'");

    EvalSummary summary;
    for (const std::string& path : scores_paths) {
        const std::vector<ScoredSample> samples = read_scores_csv(path);
        std::vector<double> raw(samples.size()), scaled(samples.size());
        std::vector<int> labels(samples.size());
        for (std::size_t i = 0; i < samples.size(); ++i) {
            raw[i] = samples[i].A;
            scaled[i] = samples[i].A_hat;
            labels[i] = samples[i].label;
        }

        EvalReport report = make_eval_report(scaled, labels, histogram_bins, "");
        report.auc = auc(raw, labels);
        summary.aucs.push_back(report.auc);

        const std::string stem = fs::path(path).stem().string();
        write_text_file(fs::path(out_dir) / (stem + "_report.json"),
                        eval_report_to_json(report) + "\n");
        write_roc_csv((fs::path(out_dir) / (stem + "_roc.csv")).string(), roc_curve(raw, labels));
        write_histogram_csv((fs::path(out_dir) / (stem + "_hist.csv")).string(), report.hist);
        std::cout << path << ": AUC " << report.auc << "\n";
    }

    summary.mean = std::accumulate(summary.aucs.begin(), summary.aucs.end(), 0.0) /
                   static_cast<double>(summary.aucs.size());
    const auto [lo, hi] = std::minmax_element(summary.aucs.begin(), summary.aucs.end());
    summary.min = *lo;
    summary.max = *hi;

    if (summary.aucs.size() > 1) {
        nlohmann::json j{{"aucs", summary.aucs},
                         {"mean", summary.mean},
                         {"min", summary.min},
                         {"max", summary.max}};
        write_text_file(fs::path(out_dir) / "eval_summary.json", j.dump(2) + "\n");
        std::cout << "mean AUC " << summary.mean << " (min " << summary.min << ", max "
                  << summary.max << ") over " << summary.aucs.size() << " files\n";
    }
    return summary;
}

}  // namespace skipgan
