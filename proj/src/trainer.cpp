#include "skipgan/trainer.hpp"

#include <cmath>
#include <limits>

namespace skipgan {

void TrainConfig::validate() const {
    if (learning_rate <= 0) throw ConfigError("learning_rate must be positive");
    if (beta1 < 0 || beta1 >= 1 || beta2 < 0 || beta2 >= 1)
        throw ConfigError("betas must lie in [0, 1)");
    if (max_epochs < 1) throw ConfigError("max_epochs must be at least 1");
    if (batch_size < 1) throw ConfigError("batch_size must be at least 1");
    if (eval_every < 1) throw ConfigError("eval_every must be at least 1");
    if (patience < 1) throw ConfigError("patience must be at least 1");
    weights.validate();
}

void init_parameters(Generator& g, std::uint64_t seed) {
    Rng rng(seed);
    dcgan_init(g.parameters(), rng);
}

void init_parameters(Discriminator& d, std::uint64_t seed) {
    Rng rng(seed);
    dcgan_init(d.parameters(), rng);
}

namespace {

AdamConfig adam_config(const TrainConfig& c) {
    AdamConfig a;
    a.learning_rate = c.learning_rate;
    a.beta1 = c.beta1;
    a.beta2 = c.beta2;
    return a;
}

}  // namespace

Trainer::Trainer(Generator& g, Discriminator& d, TrainConfig config)
    : g_(g),
      d_(d),
      config_(config),
      opt_g_(g.parameters(), adam_config(config)),
      opt_d_(d.parameters(), adam_config(config)),
      rng_(mix_seed(config.seed, 0xA11CE)) {
    config_.validate();
    if (g.config() != d.config())
        throw ConfigError("generator and discriminator were built from different configurations");
}

LossReport Trainer::train_step(const Tensor& images) {
    const int n = images.dim(0);

    Tensor x_hat = g_.forward(images, gen_cache_);

    // Discriminator half-step; the reconstruction enters as a fixed input.
    opt_d_.zero_grad();
    DiscriminatorCache dc_real, dc_fake;
    DiscOutput out_real = d_.forward(images, dc_real);
    DiscOutput out_fake = d_.forward(x_hat, dc_fake);
    const double adv_d = adversarial_loss_d(out_real.prob, out_fake.prob);
    if (!std::isfinite(adv_d)) throw DivergenceError("discriminator loss is not finite");
    Tensor d_real, d_fake;
    adversarial_loss_d_grad(out_real.prob, out_fake.prob, d_real, d_fake);
    const Tensor no_feat_grad = Tensor::zeros({n, d_.feature_length()});
    d_.backward(d_real, no_feat_grad, dc_real);
    d_.backward(d_fake, no_feat_grad, dc_fake);
    opt_d_.step();

    // Generator half-step against the updated discriminator. f(images) is
    // the latent target and contributes no gradient.
    opt_g_.zero_grad();
    opt_d_.zero_grad();
    DiscOutput target = d_.forward_detached(images);
    DiscriminatorCache dc_xhat;
    DiscOutput judged = d_.forward(x_hat, dc_xhat);
    const double adv_g = adversarial_loss_g(judged.prob);
    const double con = contextual_loss(images, x_hat);
    const double lat = latent_loss(target.features, judged.features, config_.latent_norm);
    const double total = total_generator_loss(adv_g, con, lat, config_.weights);

    Tensor d_prob = adversarial_loss_g_grad(judged.prob);
    for (auto& v : d_prob.vec()) v *= config_.weights.lambda_adv;
    Tensor d_feat = latent_loss_grad_xhat(target.features, judged.features, config_.latent_norm);
    for (auto& v : d_feat.vec()) v *= config_.weights.lambda_lat;
    Tensor d_xhat = d_.backward(d_prob, d_feat, dc_xhat);
    {
        Tensor d_con = contextual_loss_grad_xhat(images, x_hat);
        for (auto& v : d_con.vec()) v *= config_.weights.lambda_con;
        add_inplace(d_xhat, d_con);
    }
    g_.backward(d_xhat, gen_cache_);
    opt_g_.step();
    // The generator pass above also pushed gradients into the discriminator;
    // drop them so they cannot leak into its next update.
    opt_d_.zero_grad();

    LossReport report;
    report.adv_g = adv_g;
    report.adv_d = adv_d;
    report.con = con;
    report.lat = lat;
    report.total_g = total;
    return report;
}

FitResult Trainer::fit(const AnomalyDataset& dataset, const EvalHook& eval_hook) {
    if (dataset.train.empty()) throw DataError("training split is empty");
    dataset.validate();

    TrainHistory history;
    FitResult result;
    bool have_best = false;
    double best_auc = -std::numeric_limits<double>::infinity();
    int stale = 0;
    int last_epoch = 0;
    const int batch_size =
        std::min<int>(config_.batch_size, static_cast<int>(dataset.train.size()));

    try {
        for (int epoch = 0; epoch < config_.max_epochs; ++epoch) {
            last_epoch = epoch;
            if (config_.lr_decay) {
                const double lr = config_.learning_rate *
                                  (1.0 - static_cast<double>(epoch) /
                                             static_cast<double>(config_.max_epochs));
                opt_g_.set_learning_rate(lr);
                opt_d_.set_learning_rate(lr);
            }

            BatchIterator batches(dataset.train, batch_size, BatchMode::Training, rng_.next());
            LossReport sum;
            int steps = 0;
            Batch batch;
            while (batches.next(batch)) {
                LossReport r = train_step(batch.images);
                sum.adv_g += r.adv_g;
                sum.adv_d += r.adv_d;
                sum.con += r.con;
                sum.lat += r.lat;
                sum.total_g += r.total_g;
                ++steps;
            }
            if (steps > 0) {
                sum.adv_g /= steps;
                sum.adv_d /= steps;
                sum.con /= steps;
                sum.lat /= steps;
                sum.total_g /= steps;
            }
            history.epochs.push_back(sum);

            if (eval_hook && (epoch + 1) % config_.eval_every == 0) {
                const double auc = eval_hook(g_, d_);
                history.eval_epochs.push_back(epoch);
                history.eval_aucs.push_back(auc);
                if (auc > best_auc) {
                    best_auc = auc;
                    stale = 0;
                    history.best_eval = static_cast<int>(history.eval_aucs.size()) - 1;
                    result.checkpoint =
                        capture_checkpoint(g_, d_, opt_g_, opt_d_, config_, epoch, auc, rng_);
                    have_best = true;
                } else if (++stale >= config_.patience) {
                    break;
                }
            }
        }
    } catch (const DivergenceError& e) {
        throw FitDivergence(e.what(), std::move(history));
    }

    if (!have_best)
        result.checkpoint =
            capture_checkpoint(g_, d_, opt_g_, opt_d_, config_, last_epoch, -1.0, rng_);
    result.history = std::move(history);
    return result;
}

}  // namespace skipgan
