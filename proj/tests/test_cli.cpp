#include <doctest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "skipgan/errors.hpp"
#include "skipgan/experiment.hpp"
#include "skipgan/image_folder.hpp"
#include "skipgan/synthetic.hpp"
#include "test_util.hpp"

using namespace skipgan;

namespace {

struct CliResult {
    int exit_code = -1;
    std::string output;  // stdout and stderr combined
};

CliResult run_cli(const std::string& args) {
    const char* bin = std::getenv("SKIPGAN_CLI");
    REQUIRE_MESSAGE(bin != nullptr, "SKIPGAN_CLI must point at the command line binary");
    const std::string cmd = std::string(bin) + " " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    CliResult result;
    char buf[512];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) result.output.append(buf, n);
    const int status = pclose(pipe);
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return result;
}

SyntheticSpec small_spec(int channels = 1) {
    SyntheticSpec spec;
    spec.image_size = 16;
    spec.channels = channels;
    spec.n_train = 6;
    spec.n_test_normal = 3;
    spec.n_test_abnormal = 3;
    spec.n_blobs = 3;
    spec.rect_min = 4;
    spec.rect_max = 6;
    spec.seed = 5;
    return spec;
}

nlohmann::json tiny_train_json(const std::string& out_dir) {
    return nlohmann::json{
        {"dataset",
         {{"kind", "synthetic"},
          {"synthetic", {{"n_train", 16}, {"n_test_normal", 6}, {"n_test_abnormal", 6}}}}},
        {"model", {{"input_size", 32}, {"in_channels", 1}, {"nz", 8}, {"base_filters", 4}}},
        {"train", {{"max_epochs", 1}, {"batch_size", 8}}},
        {"output_dir", out_dir},
        {"seeds", {0}}};
}

}  // namespace

TEST_CASE("cli: synthetic dataset cardinalities and labels") {
    for (int channels : {1, 3}) {
        const SyntheticSpec spec = small_spec(channels);
        const AnomalyDataset ds = generate_synthetic_dataset(spec);
        CHECK(ds.train.size() == 6);
        CHECK(ds.test.size() == 6);
        CHECK(ds.test_normal_count() == 3);
        CHECK(ds.test_abnormal_count() == 3);
        CHECK_NOTHROW(ds.validate());
        CHECK(ds.train[0].origin == "train-normal-0");
        CHECK(ds.test[0].origin == "test-normal-0");
        CHECK(ds.test[3].origin == "test-abnormal-0");
        for (const auto& im : ds.train) {
            CHECK(im.channels == channels);
            CHECK(im.height == 16);
            for (std::size_t i = 0; i < im.pixel_count(); ++i) {
                CHECK((*im.pixels)[i] >= -1.0f);
                CHECK((*im.pixels)[i] <= 1.0f);
            }
        }
    }
}

TEST_CASE("cli: synthetic generation is bitwise deterministic") {
    const SyntheticSpec spec = small_spec();
    CHECK(synthetic_image(spec, SyntheticKind::TestAbnormal, 2) ==
          synthetic_image(spec, SyntheticKind::TestAbnormal, 2));
    CHECK(synthetic_image(spec, SyntheticKind::TrainNormal, 0) !=
          synthetic_image(spec, SyntheticKind::TrainNormal, 1));

    SyntheticSpec other = spec;
    other.seed = 6;
    CHECK(synthetic_image(spec, SyntheticKind::TrainNormal, 0) !=
          synthetic_image(other, SyntheticKind::TrainNormal, 0));

    const AnomalyDataset a = generate_synthetic_dataset(spec);
    const AnomalyDataset b = generate_synthetic_dataset(spec);
    CHECK(*a.train[3].pixels == *b.train[3].pixels);
    CHECK(*a.test[4].pixels == *b.test[4].pixels);
}

TEST_CASE("cli: synthetic anomalies differ only inside one rectangle") {
    const SyntheticSpec spec = small_spec();
    for (int index = 0; index < 3; ++index) {
        const auto field = synthetic_field(spec, SyntheticKind::TestAbnormal, index);
        const auto image = synthetic_image(spec, SyntheticKind::TestAbnormal, index);
        REQUIRE(field.size() == image.size());

        int y_min = spec.image_size, y_max = -1, x_min = spec.image_size, x_max = -1;
        std::size_t diff_count = 0;
        for (int c = 0; c < spec.channels; ++c)
            for (int y = 0; y < spec.image_size; ++y)
                for (int x = 0; x < spec.image_size; ++x) {
                    const std::size_t k =
                        (static_cast<std::size_t>(c) * spec.image_size + y) * spec.image_size + x;
                    if (field[k] != image[k]) {
                        ++diff_count;
                        y_min = std::min(y_min, y);
                        y_max = std::max(y_max, y);
                        x_min = std::min(x_min, x);
                        x_max = std::max(x_max, x);
                    }
                }
        REQUIRE(diff_count > 0);
        const int h = y_max - y_min + 1;
        const int w = x_max - x_min + 1;
        CHECK(h >= spec.rect_min);
        CHECK(h <= spec.rect_max);
        CHECK(w >= spec.rect_min);
        CHECK(w <= spec.rect_max);
        // Every pixel of the bounding box differs in every channel.
        CHECK(diff_count == static_cast<std::size_t>(spec.channels) * h * w);
        // The rectangle stays away from the border.
        CHECK(y_min >= 1);
        CHECK(x_min >= 1);
        CHECK(y_max <= spec.image_size - 2);
        CHECK(x_max <= spec.image_size - 2);
    }

    // Normal test images carry no anomaly.
    CHECK(synthetic_image(spec, SyntheticKind::TestNormal, 0) ==
          synthetic_field(spec, SyntheticKind::TestNormal, 0));
}

TEST_CASE("cli: synthetic spec validation") {
    SyntheticSpec spec = small_spec();
    spec.rect_max = 15;  // > size - 2
    CHECK_THROWS_AS(spec.validate(), ConfigError);
    spec = small_spec();
    spec.channels = 2;
    CHECK_THROWS_AS(spec.validate(), ConfigError);
    spec = small_spec();
    spec.n_train = 0;
    CHECK_THROWS_AS(spec.validate(), ConfigError);
    spec = small_spec();
    spec.rect_min = 1;
    CHECK_THROWS_AS(spec.validate(), ConfigError);
}

TEST_CASE("cli: synthetic folder output matches the in-memory dataset") {
    TempDir dir("synthfolder");
    const SyntheticSpec spec = small_spec();
    generate_synthetic(spec, dir.str());
    const AnomalyDataset from_disk = load_image_folder(dir.str());
    const AnomalyDataset in_memory = generate_synthetic_dataset(spec);
    REQUIRE(from_disk.train.size() == in_memory.train.size());
    REQUIRE(from_disk.test.size() == in_memory.test.size());
    CHECK(*from_disk.train[0].pixels == *in_memory.train[0].pixels);
    CHECK(*from_disk.test[5].pixels == *in_memory.test[5].pixels);
}

TEST_CASE("cli: config parsing covers the full schema") {
    nlohmann::json j = {
        {"dataset",
         {{"kind", "synthetic"},
          {"split_seed", 3},
          {"synthetic", {{"image_size", 16}, {"rect_min", 4}, {"rect_max", 6}}}}},
        {"model", {{"input_size", 16}, {"in_channels", 1}, {"nz", 12}, {"base_filters", 8}}},
        {"train",
         {{"learning_rate", 1e-3},
          {"max_epochs", 2},
          {"batch_size", 16},
          {"latent_norm", "l2"},
          {"weights", {{"lambda_adv", 1.0}, {"lambda_con", 50.0}, {"lambda_lat", 2.0}}}}},
        {"score", {{"lambda_score", 0.8}}},
        {"output_dir", "out"},
        {"seeds", {1, 2, 3}},
        {"histogram_bins", 12},
        {"feature_subsample", 500}};
    const ExperimentConfig c = parse_experiment_config(j);
    CHECK(c.dataset.kind == "synthetic");
    CHECK(c.dataset.synthetic.image_size == 16);
    CHECK(c.model.nz == 12);
    CHECK(c.train.latent_norm == LatentNorm::L2);
    CHECK(c.train.weights.lambda_con == 50.0);
    CHECK(c.score.lambda_score == 0.8);
    CHECK(c.seeds == std::vector<std::uint64_t>{1, 2, 3});
    CHECK(c.histogram_bins == 12);
    CHECK(c.feature_subsample == 500);

    // Round trip through the snapshot writer.
    const ExperimentConfig back = parse_experiment_config(experiment_config_to_json(c));
    CHECK(back.model == c.model);
    CHECK(back.train == c.train);
    CHECK(back.dataset.synthetic == c.dataset.synthetic);
}

TEST_CASE("cli: config parsing names unknown keys") {
    auto expect_mention = [](nlohmann::json j, const std::string& key) {
        try {
            parse_experiment_config(j);
            FAIL_CHECK("expected ConfigError for key " << key);
        } catch (const ConfigError& e) {
            CHECK(std::string(e.what()).find(key) != std::string::npos);
        }
    };

    nlohmann::json base = {{"dataset", {{"kind", "synthetic"}}}};

    nlohmann::json top = base;
    top["color_scheme"] = "dark";
    expect_mention(top, "color_scheme");

    nlohmann::json ds = base;
    ds["dataset"]["pth"] = "/tmp";
    expect_mention(ds, "pth");

    nlohmann::json model = base;
    model["model"] = {{"nzz", 10}};
    expect_mention(model, "nzz");

    nlohmann::json train = base;
    train["train"] = {{"learning_rat", 0.1}};
    expect_mention(train, "learning_rat");

    nlohmann::json weights = base;
    weights["train"] = {{"weights", {{"lambda_advv", 1.0}}}};
    expect_mention(weights, "lambda_advv");

    nlohmann::json synth = base;
    synth["dataset"]["synthetic"] = {{"sides", 32}};
    expect_mention(synth, "sides");

    nlohmann::json score = base;
    score["score"] = {{"lambda", 0.9}};
    expect_mention(score, "lambda");
}

TEST_CASE("cli: config parsing rejects structural mistakes") {
    CHECK_THROWS_AS(parse_experiment_config(nlohmann::json::object()), ConfigError);
    CHECK_THROWS_AS(parse_experiment_config({{"dataset", {{"kind", "mnist"}}}}), ConfigError);
    // cifar10 without a class selection.
    CHECK_THROWS_AS(parse_experiment_config({{"dataset", {{"kind", "cifar10"}}}}), ConfigError);
    // Wrong JSON type for a numeric field.
    CHECK_THROWS_AS(
        parse_experiment_config(
            {{"dataset", {{"kind", "synthetic"}}}, {"train", {{"max_epochs", "five"}}}}),
        ConfigError);
}

TEST_CASE("cli: cifar class names map to indices") {
    CHECK(cifar10_class_from_json(nlohmann::json("airplane")) == 0);
    CHECK(cifar10_class_from_json(nlohmann::json("automobile")) == 1);
    CHECK(cifar10_class_from_json(nlohmann::json("car")) == 1);
    CHECK(cifar10_class_from_json(nlohmann::json("truck")) == 9);
    CHECK(cifar10_class_from_json(nlohmann::json(4)) == 4);
    CHECK_THROWS_AS(cifar10_class_from_json(nlohmann::json("boat")), ConfigError);
    CHECK_THROWS_AS(cifar10_class_from_json(nlohmann::json(10)), ConfigError);
    CHECK_THROWS_AS(cifar10_class_from_json(nlohmann::json(-1)), ConfigError);
}

TEST_CASE("cli: dataset spec validation") {
    DatasetSpec spec;
    spec.kind = "parquet";
    CHECK_THROWS_AS(spec.validate(), ConfigError);
    spec.kind = "cifar10";
    spec.anomalous_class = -1;
    CHECK_THROWS_AS(spec.validate(), ConfigError);
    spec.anomalous_class = 3;
    CHECK_NOTHROW(spec.validate());
    spec.patch_window = 32;
    CHECK_THROWS_AS(spec.validate(), ConfigError);  // patching is image-folder only
}

TEST_CASE("cli: missing dataset path falls back to the environment") {
    DatasetSpec spec;
    spec.kind = "image-folder";
    spec.path = "";
    unsetenv("SKIPGAN_DATA_ROOT");
    CHECK_THROWS_AS(load_dataset(spec), ConfigError);
}

TEST_CASE("cli: synth subcommand writes a loadable dataset") {
    TempDir dir("clisynth");
    const std::string flags = "--size 16 --train 4 --test-normal 2 --test-abnormal 2 "
                              "--blobs 3 --rect-min 4 --rect-max 6 --seed 9";
    const CliResult r1 = run_cli("synth --out " + dir.str("d1") + " " + flags);
    CHECK(r1.exit_code == 0);
    CHECK(r1.output.find("4/2/2") != std::string::npos);

    const AnomalyDataset ds = load_image_folder(dir.str("d1"));
    CHECK(ds.train.size() == 4);
    CHECK(ds.test_normal_count() == 2);
    CHECK(ds.test_abnormal_count() == 2);

    const CliResult r2 = run_cli("synth --out " + dir.str("d2") + " " + flags);
    CHECK(r2.exit_code == 0);
    CHECK(read_file(dir.path / "d1" / "train" / "normal" / "img_00000.pgm") ==
          read_file(dir.path / "d2" / "train" / "normal" / "img_00000.pgm"));
    CHECK(read_file(dir.path / "d1" / "test" / "abnormal" / "img_00001.pgm") ==
          read_file(dir.path / "d2" / "test" / "abnormal" / "img_00001.pgm"));
}

TEST_CASE("cli: train subcommand writes per-seed artifacts") {
    TempDir dir("clitrain");
    const std::string cfg_path = dir.str("config.json");
    {
        std::ofstream out(cfg_path);
        out << tiny_train_json(dir.str("runs")).dump(2);
    }
    const CliResult r = run_cli("train --config " + cfg_path);
    CAPTURE(r.output);
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("seed 0:") != std::string::npos);

    const auto seed_dir = dir.path / "runs" / "seed-0";
    CHECK(std::filesystem::exists(seed_dir / "checkpoint.bin"));
    CHECK(std::filesystem::exists(seed_dir / "history.json"));
    CHECK(std::filesystem::exists(seed_dir / "config.json"));

    const auto history = nlohmann::json::parse(read_file(seed_dir / "history.json"));
    CHECK(history.at("epochs").size() == 1);
    CHECK(history.at("eval_aucs").size() == 1);
    const auto snapshot = nlohmann::json::parse(read_file(seed_dir / "config.json"));
    CHECK(snapshot.at("active_seed").get<int>() == 0);
    CHECK(snapshot.at("model").at("input_size").get<int>() == 32);
}

TEST_CASE("cli: train rejects configs with unknown keys") {
    TempDir dir("clibad");
    nlohmann::json j = tiny_train_json(dir.str("runs"));
    j["train"]["learning_rat"] = 0.1;
    const std::string cfg_path = dir.str("config.json");
    {
        std::ofstream out(cfg_path);
        out << j.dump(2);
    }
    const CliResult r = run_cli("train --config " + cfg_path);
    CHECK(r.exit_code == 1);
    CHECK(r.output.find("learning_rat") != std::string::npos);
}

TEST_CASE("cli: score subcommand is deterministic and validates inputs") {
    TempDir dir("cliscore");
    const std::string cfg_path = dir.str("config.json");
    {
        std::ofstream out(cfg_path);
        out << tiny_train_json(dir.str("runs")).dump(2);
    }
    REQUIRE(run_cli("train --config " + cfg_path).exit_code == 0);
    const std::string ckpt = (dir.path / "runs" / "seed-0" / "checkpoint.bin").string();

    // The default synthetic spec matches the trained 32x32 single-channel model.
    const std::string base = "score --checkpoint " + ckpt + " --dataset synthetic --batch-size 32";
    const CliResult s1 = run_cli(base + " --out " + dir.str("s1.csv"));
    CAPTURE(s1.output);
    CHECK(s1.exit_code == 0);
    const CliResult s2 = run_cli(base + " --out " + dir.str("s2.csv"));
    CHECK(s2.exit_code == 0);
    CHECK(read_file(dir.path / "s1.csv") == read_file(dir.path / "s2.csv"));

    const auto rows = read_scores_csv(dir.str("s1.csv"));
    CHECK(rows.size() == 128);  // default synthetic test split

    const CliResult missing =
        run_cli("score --checkpoint " + dir.str("absent.bin") + " --dataset synthetic");
    CHECK(missing.exit_code == 2);

    const CliResult bad_kind =
        run_cli("score --checkpoint " + ckpt + " --dataset parquet:/tmp/x");
    CHECK(bad_kind.exit_code == 1);
}

TEST_CASE("cli: eval subcommand reports areas and writes artifacts") {
    TempDir dir("clieval");
    write_file(dir.path / "perfect.csv",
               std::string("id,label,R,L,A,A_hat\n"
                           "a,0,0.1,0.1,0.1,0\n"
                           "b,0,0.2,0.2,0.2,0.25\n"
                           "c,1,0.4,0.4,0.4,0.75\n"
                           "d,1,0.5,0.5,0.5,1\n"));
    const CliResult r =
        run_cli("eval " + dir.str("perfect.csv") + " --out " + dir.str("report") + " --bins 4");
    CAPTURE(r.output);
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("AUC 1") != std::string::npos);

    const auto report =
        nlohmann::json::parse(read_file(dir.path / "report" / "perfect_report.json"));
    CHECK(report.at("auc").get<double>() == 1.0);
    CHECK(std::filesystem::exists(dir.path / "report" / "perfect_roc.csv"));
    CHECK(std::filesystem::exists(dir.path / "report" / "perfect_hist.csv"));
    // Single input: no cross-run summary.
    CHECK_FALSE(std::filesystem::exists(dir.path / "report" / "eval_summary.json"));
}

TEST_CASE("cli: eval aggregates several runs") {
    TempDir dir("clievalsum");
    write_file(dir.path / "one.csv",
               std::string("id,label,R,L,A,A_hat\n"
                           "a,0,0.1,0.1,0.1,0\n"
                           "b,1,0.9,0.9,0.9,1\n"));
    write_file(dir.path / "two.csv",
               std::string("id,label,R,L,A,A_hat\n"
                           "a,0,0.5,0.5,0.5,0\n"
                           "b,1,0.5,0.5,0.5,0\n"));
    const CliResult r = run_cli("eval " + dir.str("one.csv") + " " + dir.str("two.csv") +
                                " --out " + dir.str("report"));
    CAPTURE(r.output);
    CHECK(r.exit_code == 0);
    const auto summary =
        nlohmann::json::parse(read_file(dir.path / "report" / "eval_summary.json"));
    CHECK(summary.at("aucs").size() == 2);
    CHECK(summary.at("mean").get<double>() == doctest::Approx(0.75));
    CHECK(summary.at("min").get<double>() == doctest::Approx(0.5));
    CHECK(summary.at("max").get<double>() == doctest::Approx(1.0));
}

TEST_CASE("cli: eval rejects single-class score files") {
    TempDir dir("clievalbad");
    write_file(dir.path / "flat.csv",
               std::string("id,label,R,L,A,A_hat\n"
                           "a,0,0.1,0.1,0.1,0\n"
                           "b,0,0.9,0.9,0.9,1\n"));
    const CliResult r = run_cli("eval " + dir.str("flat.csv") + " --out " + dir.str("report"));
    CHECK(r.exit_code == 2);
    CHECK(r.output.find("both labels") != std::string::npos);
}

TEST_CASE("cli: usage errors exit with status one") {
    CHECK(run_cli("train").exit_code == 1);           // missing --config
    CHECK(run_cli("transmogrify").exit_code == 1);    // unknown subcommand
    CHECK(run_cli("").exit_code == 1);                // missing subcommand
    CHECK(run_cli("--help").exit_code == 0);
    CHECK(run_cli("synth --out /tmp/x --channels 2").exit_code == 1);  // invalid spec
}
