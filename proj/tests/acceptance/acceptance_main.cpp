// Acceptance gate: one self-contained check per release criterion, each
// printing a single [PASS]/[FAIL]/[SKIP] line with the measured values and
// the tolerance pinned next to the check. Run everything, or one criterion
// with --only N. Exit status is zero only when nothing failed.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "skipgan/dataset.hpp"
#include "skipgan/discriminator.hpp"
#include "skipgan/errors.hpp"
#include "skipgan/evaluation.hpp"
#include "skipgan/experiment.hpp"
#include "skipgan/generator.hpp"
#include "skipgan/losses.hpp"
#include "skipgan/rng.hpp"
#include "skipgan/scoring.hpp"
#include "skipgan/synthetic.hpp"
#include "skipgan/trainer.hpp"

using namespace skipgan;

namespace {

struct Outcome {
    bool pass = false;
    bool skipped = false;
    std::string detail;
};

std::string fmt(double v) {
    std::ostringstream out;
    out.precision(4);
    out << v;
    return out.str();
}

// ---------------------------------------------------------------------------
// 1. Trapezoidal AUC equals the O(n^2) pairwise Mann-Whitney oracle.

double pairwise_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
    double wins = 0.0;
    std::int64_t pairs = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (labels[i] != 1) continue;
        for (std::size_t j = 0; j < scores.size(); ++j) {
            if (labels[j] != 0) continue;
            ++pairs;
            if (scores[i] > scores[j]) wins += 1.0;
            else if (scores[i] == scores[j]) wins += 0.5;
        }
    }
    return wins / static_cast<double>(pairs);
}

Outcome criterion_1() {
    constexpr int kInstances = 1000;
    constexpr double kTolerance = 1e-9;
    Rng rng(1001);
    double worst = 0.0;
    for (int t = 0; t < kInstances; ++t) {
        const int n = 2 + static_cast<int>(rng.below(199));  // n <= 200
        std::vector<double> scores(static_cast<std::size_t>(n));
        std::vector<int> labels(static_cast<std::size_t>(n));
        const bool discrete = rng.uniform() < 0.5;  // coarse draws force ties
        for (auto& s : scores)
            s = discrete ? static_cast<double>(rng.below(8)) : rng.uniform(-2.0, 2.0);
        for (auto& l : labels) l = rng.uniform() < 0.5 ? 1 : 0;
        labels[0] = 0;
        labels[static_cast<std::size_t>(n) - 1] = 1;
        worst = std::max(worst, std::abs(auc(scores, labels) - pairwise_auc(scores, labels)));
    }
    Outcome out;
    out.pass = worst <= kTolerance;
    out.detail = std::to_string(kInstances) + " instances, max |area - pairwise| = " +
                 fmt(worst) + " (tolerance 1e-9)";
    return out;
}

// ---------------------------------------------------------------------------
// 2. Min-max scaling: exact endpoints, rank preservation, identical area.

std::vector<std::size_t> sort_order(const std::vector<double>& v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    return idx;
}

Outcome criterion_2() {
    constexpr int kVectors = 100;
    Rng rng(2002);
    for (int t = 0; t < kVectors; ++t) {
        const int n = 10 + static_cast<int>(rng.below(120));
        std::vector<double> raw(static_cast<std::size_t>(n));
        std::vector<int> labels(static_cast<std::size_t>(n));
        for (auto& v : raw) v = rng.uniform(-6.0, 6.0);
        for (auto& l : labels) l = rng.uniform() < 0.5 ? 1 : 0;
        labels[0] = 0;
        labels[1] = 1;

        const std::vector<double> scaled = scale_scores(raw);
        const auto lo = std::min_element(raw.begin(), raw.end()) - raw.begin();
        const auto hi = std::max_element(raw.begin(), raw.end()) - raw.begin();
        if (scaled[static_cast<std::size_t>(lo)] != 0.0 ||
            scaled[static_cast<std::size_t>(hi)] != 1.0)
            return {false, false, "endpoint mapping not exact on vector " + std::to_string(t)};
        if (sort_order(raw) != sort_order(scaled))
            return {false, false, "rank order changed on vector " + std::to_string(t)};
        if (auc(raw, labels) != auc(scaled, labels))
            return {false, false, "area changed under scaling on vector " + std::to_string(t)};
    }
    return {true, false,
            std::to_string(kVectors) +
                " random vectors: exact 0/1 endpoints, ranks and areas unchanged"};
}

// ---------------------------------------------------------------------------
// 3. Analytic gradients of every training objective against central finite
//    differences on a network small enough to probe densely.

GeneratorConfig probe_config() {
    GeneratorConfig c;
    c.input_size = 8;
    c.in_channels = 1;
    c.nz = 2;
    c.base_filters = 1;  // both nets together stay under 500 parameters
    c.n_blocks = 2;
    return c;
}

std::size_t parameter_count(std::vector<ParamRef> params) {
    std::size_t total = 0;
    for (const auto& p : params) total += p.value->size();
    return total;
}

void randomize(const std::vector<ParamRef>& params, std::uint64_t seed) {
    Rng rng(seed);
    for (const auto& p : params) {
        for (std::size_t i = 0; i < p.value->size(); ++i) (*p.value)[i] = rng.uniform(-0.4, 0.4);
        p.grad->zero();
    }
}

void zero_grads(const std::vector<ParamRef>& params) {
    for (const auto& p : params) p.grad->zero();
}

// Largest relative finite-difference mismatch over `probes` sampled entries.
double fd_worst(const std::vector<ParamRef>& params, const std::function<double()>& loss,
                int probes, Rng& picker) {
    const double h = 1e-5;
    std::vector<std::pair<Tensor*, Tensor*>> slots;
    for (const auto& p : params) slots.push_back({p.value, p.grad});
    double worst = 0.0;
    for (int t = 0; t < probes; ++t) {
        auto& [value, grad] = slots[picker.below(slots.size())];
        const std::size_t idx = picker.below(value->size());
        const double saved = (*value)[idx];
        (*value)[idx] = saved + h;
        const double up = loss();
        (*value)[idx] = saved - h;
        const double down = loss();
        (*value)[idx] = saved;
        const double fd = (up - down) / (2.0 * h);
        const double analytic = (*grad)[idx];
        const double rel = std::abs(fd - analytic) /
                           std::max({1e-3, std::abs(fd), std::abs(analytic)});
        worst = std::max(worst, rel);
    }
    return worst;
}

Outcome criterion_3() {
    constexpr double kTolerance = 1e-4;
    constexpr int kProbes = 50;  // per objective
    const GeneratorConfig cfg = probe_config();
    Generator g = build_generator(cfg, 301);
    Discriminator d = build_discriminator(cfg, 302);
    auto gp = g.parameters();
    auto dp = d.parameters();
    randomize(gp, 303);
    randomize(dp, 304);

    const std::size_t n_params = parameter_count(gp) + parameter_count(dp);
    if (n_params > 500)
        return {false, false, "probe network has " + std::to_string(n_params) + " parameters"};

    Tensor x({2, 1, 8, 8});
    {
        Rng rng(305);
        for (std::size_t i = 0; i < x.size(); ++i) x[i] = rng.uniform(-1.0, 1.0);
    }
    const LossWeights weights;  // 1, 40, 1
    const int n = x.dim(0);
    Rng picker(306);
    double worst = 0.0;

    // (a) discriminator objective, probed through the discriminator.
    {
        zero_grads(dp);
        GeneratorCache gc;
        const Tensor x_hat = g.forward(x, gc);
        DiscriminatorCache cr, cf;
        const DiscOutput o_real = d.forward(x, cr);
        const DiscOutput o_fake = d.forward(x_hat, cf);
        Tensor d_real, d_fake;
        adversarial_loss_d_grad(o_real.prob, o_fake.prob, d_real, d_fake);
        const Tensor no_feat = Tensor::zeros({n, d.feature_length()});
        d.backward(d_real, no_feat, cr);
        d.backward(d_fake, no_feat, cf);
        auto loss = [&] {
            GeneratorCache scratch;
            const Tensor xh = g.forward(x, scratch);
            return adversarial_loss_d(d.forward_detached(x).prob,
                                      d.forward_detached(xh).prob);
        };
        worst = std::max(worst, fd_worst(dp, loss, kProbes, picker));
    }

    // Shared analytic pass for the generator-side objectives.
    auto generator_case = [&](double lambda_adv, double lambda_con, double lambda_lat) {
        zero_grads(gp);
        zero_grads(dp);
        GeneratorCache gc;
        const Tensor x_hat = g.forward(x, gc);
        const DiscOutput target = d.forward_detached(x);
        DiscriminatorCache cx;
        const DiscOutput judged = d.forward(x_hat, cx);

        Tensor d_prob = adversarial_loss_g_grad(judged.prob);
        for (auto& v : d_prob.vec()) v *= lambda_adv;
        Tensor d_feat = latent_loss_grad_xhat(target.features, judged.features);
        for (auto& v : d_feat.vec()) v *= lambda_lat;
        Tensor d_xhat = d.backward(d_prob, d_feat, cx);
        Tensor d_con = contextual_loss_grad_xhat(x, x_hat);
        for (auto& v : d_con.vec()) v *= lambda_con;
        add_inplace(d_xhat, d_con);
        g.backward(d_xhat, gc);

        auto loss = [&, lambda_adv, lambda_con, lambda_lat] {
            GeneratorCache scratch;
            const Tensor xh = g.forward(x, scratch);
            const DiscOutput t = d.forward_detached(x);
            const DiscOutput j = d.forward_detached(xh);
            return lambda_adv * adversarial_loss_g(j.prob) +
                   lambda_con * contextual_loss(x, xh) +
                   lambda_lat * latent_loss(t.features, j.features);
        };
        return fd_worst(gp, loss, kProbes, picker);
    };

    worst = std::max(worst, generator_case(1.0, 0.0, 0.0));  // (b) adversarial, generator side
    worst = std::max(worst, generator_case(0.0, 1.0, 0.0));  // (c) reconstruction fidelity
    worst = std::max(worst, generator_case(0.0, 0.0, 1.0));  // (d) feature discrepancy
    worst = std::max(worst, generator_case(weights.lambda_adv, weights.lambda_con,
                                           weights.lambda_lat));  // (e) weighted total

    Outcome out;
    out.pass = worst < kTolerance;
    out.detail = "max relative error " + fmt(worst) + " over 5x" + std::to_string(kProbes) +
                 " probes on " + std::to_string(n_params) + " parameters (tolerance 1e-4)";
    return out;
}

// ---------------------------------------------------------------------------
// 4. Architecture invariants across input sizes and channel counts.

Outcome criterion_4() {
    for (const int size : {32, 64}) {
        for (const int channels : {1, 3}) {
            GeneratorConfig c;
            c.input_size = size;
            c.in_channels = channels;
            c.nz = 16;
            c.base_filters = 8;
            Generator g = build_generator(c, 401);
            Tensor x({2, channels, size, size});
            Rng rng(402);
            for (std::size_t i = 0; i < x.size(); ++i) x[i] = rng.uniform(-1.0, 1.0);
            const Tensor y = g.reconstruct(x);
            if (y.shape() != x.shape())
                return {false, false,
                        "reconstruction shape mismatch at size " + std::to_string(size) + ", " +
                            std::to_string(channels) + " channels"};
            for (const DecoderWiring& w : g.decoder_wiring())
                if (w.tconv_in_channels != w.upsampled_channels + w.skip_channels)
                    return {false, false,
                            "skip accounting broken at level " + std::to_string(w.level)};

            Discriminator d = build_discriminator(c, 403);
            const DiscOutput out = d.forward_eval(x);
            if (out.prob.min_value() <= 0.0 || out.prob.max_value() >= 1.0)
                return {false, false, "discriminator probability out of range"};
            if (out.features.dim(1) != d.feature_length())
                return {false, false, "feature width mismatch"};
        }
    }

    if (GeneratorConfig{}.nz != 100) return {false, false, "default latent width is not 100"};
    GeneratorConfig c;
    c.input_size = 32;
    c.base_filters = 8;  // latent width left at its default
    Generator g = build_generator(c, 404);
    Tensor x({1, 3, 32, 32});
    x.fill(0.1);
    if (g.encode(x).z.shape() != std::vector<int>{1, 100})
        return {false, false, "encoder does not honor the default latent width"};

    return {true, false,
            "sizes {32, 64} x channels {1, 3}: shapes preserved, skip channels account, "
            "default latent width 100"};
}

// ---------------------------------------------------------------------------
// 5 & 6. Overfit a fixed 8-image batch; skips ablation.

struct OverfitRun {
    double first_con = 0.0;
    double final_con = 0.0;
};

OverfitRun run_overfit(bool skips_enabled, int steps) {
    SyntheticSpec spec;
    spec.image_size = 32;
    spec.channels = 1;
    spec.n_train = 8;
    spec.n_test_normal = 1;
    spec.n_test_abnormal = 1;
    spec.seed = 11;
    const AnomalyDataset ds = generate_synthetic_dataset(spec);
    Tensor batch({8, 1, 32, 32});
    for (int i = 0; i < 8; ++i) copy_image_into(ds.train[static_cast<std::size_t>(i)], batch, i);

    GeneratorConfig mc;
    mc.input_size = 32;
    mc.in_channels = 1;
    mc.nz = 64;
    mc.base_filters = 16;
    Generator g = build_generator(mc, mix_seed(3, 0xF001));
    Discriminator d = build_discriminator(mc, mix_seed(3, 0xF002));
    g.set_skips_enabled(skips_enabled);

    TrainConfig tc;  // weights default to (1, 40, 1)
    tc.learning_rate = 2e-3;
    tc.batch_size = 8;
    tc.seed = 3;
    tc.lr_decay = false;
    Trainer trainer(g, d, tc);

    OverfitRun run;
    for (int step = 1; step <= steps; ++step) {
        const LossReport r = trainer.train_step(batch);
        if (step == 1) run.first_con = r.con;
        run.final_con = r.con;
    }
    return run;
}

Outcome criterion_5() {
    constexpr int kSteps = 200;
    const OverfitRun run = run_overfit(true, kSteps);
    Outcome out;
    out.pass = run.final_con <= 0.5 * run.first_con;
    out.detail = "pixel loss " + fmt(run.first_con) + " -> " + fmt(run.final_con) + " after " +
                 std::to_string(kSteps) + " steps (required drop >= 50%)";
    return out;
}

Outcome criterion_6() {
    constexpr int kSteps = 200;
    const OverfitRun with_skips = run_overfit(true, kSteps);
    const OverfitRun without = run_overfit(false, kSteps);
    Outcome out;
    out.pass = without.final_con > with_skips.final_con;
    out.detail = "final pixel loss with skips " + fmt(with_skips.final_con) + " vs without " +
                 fmt(without.final_con) + " (without must be strictly higher)";
    return out;
}

// ---------------------------------------------------------------------------
// 7. Desk-scale end-to-end run on the synthetic dataset.

Outcome criterion_7() {
    constexpr double kMinAuc = 0.80;
    SyntheticSpec spec;  // 256 train normals, 64/64 test
    spec.seed = 7;
    const AnomalyDataset ds = generate_synthetic_dataset(spec);

    GeneratorConfig mc;
    mc.input_size = 32;
    mc.in_channels = 1;
    mc.base_filters = 16;  // latent width stays at the default 100
    Generator g = build_generator(mc, mix_seed(1, 0xF001));
    Discriminator d = build_discriminator(mc, mix_seed(1, 0xF002));

    TrainConfig tc;
    tc.max_epochs = 5;
    tc.batch_size = 64;
    tc.seed = 1;
    ScoreConfig sc;

    Trainer trainer(g, d, tc);
    const EvalHook hook = [&](const Generator& gg, const Discriminator& dd) {
        return evaluate_auc(gg, dd, ds, sc, tc.batch_size);
    };
    const FitResult result = trainer.fit(ds, hook);

    // Score the test set with the retained best model.
    Generator best_g(mc);
    Discriminator best_d(mc);
    restore_checkpoint(result.checkpoint, best_g, best_d);
    const std::vector<ScoredSample> scored = score_dataset(best_g, best_d, ds.test, sc);
    std::vector<double> scaled(scored.size());
    std::vector<int> labels(scored.size());
    for (std::size_t i = 0; i < scored.size(); ++i) {
        scaled[i] = scored[i].A_hat;
        labels[i] = scored[i].label;
    }
    const double area = auc(scaled, labels);

    Outcome out;
    out.pass = area >= kMinAuc;
    out.detail = "scaled test AUC " + fmt(area) + " after <= 5 epochs (required >= 0.80)";
    return out;
}

// ---------------------------------------------------------------------------
// 8. One-class-out split counts for every class choice.

Outcome criterion_8() {
    // Class-balanced stand-in corpus with the standard cardinalities:
    // 50,000 train-source and 10,000 test-source images, 10 classes.
    std::vector<LabeledImage> train_source, test_source;
    train_source.reserve(50000);
    test_source.reserve(10000);
    const auto stub = std::make_shared<const std::vector<float>>(1, 0.0f);
    for (int i = 0; i < 50000; ++i) {
        LabeledImage im;
        im.pixels = stub;
        im.channels = 1;
        im.height = 1;
        im.width = 1;
        im.label = i % 10;
        train_source.push_back(std::move(im));
    }
    for (int i = 0; i < 10000; ++i) {
        LabeledImage im;
        im.pixels = stub;
        im.channels = 1;
        im.height = 1;
        im.width = 1;
        im.label = i % 10;
        test_source.push_back(std::move(im));
    }

    for (int anomalous = 0; anomalous < 10; ++anomalous) {
        SplitSpec split;
        split.anomalous_class = anomalous;
        const AnomalyDataset ds = make_one_class_out_split(train_source, test_source, split);
        if (ds.train.size() != 45000 || ds.test_normal_count() != 9000 ||
            ds.test_abnormal_count() != 6000)
            return {false, false,
                    "class " + std::to_string(anomalous) + ": got " +
                        std::to_string(ds.train.size()) + " train, " +
                        std::to_string(ds.test_normal_count()) + ":" +
                        std::to_string(ds.test_abnormal_count()) + " test"};
        ds.validate();
        ds.validate_imbalance();
    }
    return {true, false, "all 10 class choices: 45000 train and 9000:6000 test"};
}

// ---------------------------------------------------------------------------
// 9. Full training run on CIFAR-10 class "car" (opt-in; needs the archive).

Outcome criterion_9() {
    const char* dir = std::getenv("SKIPGAN_CIFAR10_DIR");
    if (dir == nullptr || *dir == '\0')
        return {false, true, "set SKIPGAN_CIFAR10_DIR to the binary archive directory to run"};

    DatasetSpec spec;
    spec.kind = "cifar10";
    spec.path = dir;
    spec.anomalous_class = 1;  // automobile
    const AnomalyDataset ds = load_dataset(spec);

    GeneratorConfig mc;  // 32x32 RGB, latent 100, 64 base filters
    TrainConfig tc;      // lr 2e-3, betas (0.5, 0.999), <= 15 epochs, weights (1, 40, 1)
    mc.input_size = 32;
    ScoreConfig sc;

    std::vector<double> best;
    for (const std::uint64_t seed : {0ULL, 1ULL, 2ULL}) {
        Generator g = build_generator(mc, mix_seed(seed, 0xF001));
        Discriminator d = build_discriminator(mc, mix_seed(seed, 0xF002));
        TrainConfig seeded = tc;
        seeded.seed = seed;
        Trainer trainer(g, d, seeded);
        const EvalHook hook = [&](const Generator& gg, const Discriminator& dd) {
            return evaluate_auc(gg, dd, ds, sc, seeded.batch_size);
        };
        const FitResult result = trainer.fit(ds, hook);
        best.push_back(result.checkpoint.best_metric);
        std::cout << "  seed " << seed << ": best AUC " << result.checkpoint.best_metric
                  << std::endl;
    }
    const double mean = std::accumulate(best.begin(), best.end(), 0.0) /
                        static_cast<double>(best.size());
    Outcome out;
    out.pass = mean >= 0.80;
    out.detail = "mean AUC over 3 seeds " + fmt(mean) + " (required >= 0.80)";
    return out;
}

struct Criterion {
    int number;
    const char* title;
    Outcome (*run)();
    double time_limit_s;  // 0 disables the runtime check
};

const Criterion kCriteria[] = {
    {1, "area under the curve matches the pairwise oracle", criterion_1, 10.0},
    {2, "score scaling keeps endpoints, ranks and areas", criterion_2, 5.0},
    {3, "objective gradients match finite differences", criterion_3, 60.0},
    {4, "architecture invariants hold across shapes", criterion_4, 30.0},
    {5, "fixed batch overfits within 200 steps", criterion_5, 300.0},
    {6, "skip connections improve reconstruction", criterion_6, 600.0},
    {7, "desk-scale training separates the test set", criterion_7, 900.0},
    {8, "one-class-out split counts are exact", criterion_8, 30.0},
    {9, "benchmark training reaches the target range", criterion_9, 0.0},
};

}  // namespace

int main(int argc, char** argv) {
    int only = 0;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--only") == 0 && i + 1 < argc) {
            only = std::atoi(argv[++i]);
            if (only < 1 || only > 9) {
                std::cerr << "usage: " << argv[0] << " [--only N]  (N in 1..9)\n";
                return 2;
            }
        } else {
            std::cerr << "usage: " << argv[0] << " [--only N]  (N in 1..9)\n";
            return 2;
        }
    }

    int failures = 0;
    for (const Criterion& c : kCriteria) {
        if (only != 0 && c.number != only) continue;
        Outcome outcome;
        const auto start = std::chrono::steady_clock::now();
        try {
            outcome = c.run();
        } catch (const std::exception& e) {
            outcome.pass = false;
            outcome.detail = std::string("unexpected error: ") + e.what();
        }
        const double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

        std::string status = outcome.pass ? "PASS" : "FAIL";
        if (outcome.skipped) status = "SKIP";
        std::string timing = " [" + fmt(elapsed) + " s";
        if (c.time_limit_s > 0.0) {
            timing += " / limit " + fmt(c.time_limit_s) + " s";
            if (!outcome.skipped && elapsed > c.time_limit_s) {
                status = "FAIL";
                outcome.detail += "; exceeded the runtime limit";
            }
        }
        timing += "]";

        if (status == "FAIL") ++failures;
        std::cout << "[" << status << "] criterion " << c.number << ": " << c.title << " — "
                  << outcome.detail << timing << std::endl;
    }
    return failures == 0 ? 0 : 1;
}
