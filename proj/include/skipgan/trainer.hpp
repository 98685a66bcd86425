#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "skipgan/adam.hpp"
#include "skipgan/dataset.hpp"
#include "skipgan/discriminator.hpp"
#include "skipgan/errors.hpp"
#include "skipgan/generator.hpp"
#include "skipgan/losses.hpp"
#include "skipgan/rng.hpp"

namespace skipgan {

struct TrainConfig {
    double learning_rate = 2e-3;
    double beta1 = 0.5;
    double beta2 = 0.999;
    int max_epochs = 15;
    int batch_size = 64;
    LossWeights weights;
    std::uint64_t seed = 0;
    bool lr_decay = true;   // linear decay to zero across max_epochs
    int eval_every = 1;     // epochs between evaluations
    int patience = 3;       // evaluations without improvement before stopping
    LatentNorm latent_norm = LatentNorm::Mse;

    void validate() const;
    bool operator==(const TrainConfig&) const = default;
};

struct TrainHistory {
    std::vector<LossReport> epochs;  // per-epoch step means
    std::vector<int> eval_epochs;    // epoch index of each evaluation
    std::vector<double> eval_aucs;
    int best_eval = -1;              // index into eval_aucs, -1 if none
};

// Snapshot of everything needed to resume or score: parameters, running
// statistics, optimizer moments, and bookkeeping. Arrays are keyed by the
// qualified names the layers report.
struct Checkpoint {
    int format_version = 1;
    GeneratorConfig gen_config;
    TrainConfig train_config;
    int epoch = -1;
    double best_metric = -1.0;  // -1 when no evaluation has been recorded
    std::string rng_state;
    std::vector<std::pair<std::string, std::vector<double>>> arrays;
};

class FitDivergence : public DivergenceError {
public:
    FitDivergence(const std::string& what, TrainHistory history)
        : DivergenceError(what), history_(std::move(history)) {}
    const TrainHistory& history() const { return history_; }

private:
    TrainHistory history_;
};

void init_parameters(Generator& g, std::uint64_t seed);
void init_parameters(Discriminator& d, std::uint64_t seed);

// Metric callback; higher is better. Receives the live models read-only.
using EvalHook = std::function<double(const Generator&, const Discriminator&)>;

struct FitResult {
    Checkpoint checkpoint;  // best evaluation seen, or final state if none
    TrainHistory history;
};

class Trainer {
public:
    // The trainer aliases the models; they must outlive it.
    Trainer(Generator& g, Discriminator& d, TrainConfig config);

    // One discriminator update on (real, detached reconstruction), then one
    // generator update on the weighted objective. The latent target f(x) is
    // taken from the just-updated discriminator and treated as a constant.
    LossReport train_step(const Tensor& images);

    FitResult fit(const AnomalyDataset& dataset, const EvalHook& eval_hook);

    const TrainConfig& config() const { return config_; }
    Adam& generator_optimizer() { return opt_g_; }
    Adam& discriminator_optimizer() { return opt_d_; }
    Rng& rng() { return rng_; }

private:
    Generator& g_;
    Discriminator& d_;
    TrainConfig config_;
    Adam opt_g_, opt_d_;
    Rng rng_;
    GeneratorCache gen_cache_;
};

Checkpoint capture_checkpoint(Generator& g, Discriminator& d, const Adam& opt_g,
                              const Adam& opt_d, const TrainConfig& train_config, int epoch,
                              double best_metric, const Rng& rng);

// Copies a checkpoint back into freshly built models (and optionally
// optimizers and the random source). Array names and sizes must match the
// models exactly; a checkpoint from a different configuration is rejected.
void restore_checkpoint(const Checkpoint& c, Generator& g, Discriminator& d,
                        Adam* opt_g = nullptr, Adam* opt_d = nullptr, Rng* rng = nullptr);

void save_checkpoint(const Checkpoint& c, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace skipgan
