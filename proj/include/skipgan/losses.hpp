#pragma once

#include <string>

#include "skipgan/tensor.hpp"

namespace skipgan {

// Probabilities are clamped to [kProbEps, 1 - kProbEps] inside the logs;
// gradients are zero where the clamp is active.
inline constexpr double kProbEps = 1e-7;

enum class LatentNorm {
    Mse,  // mean of squared elementwise differences
    L2,   // per-sample Euclidean norm, averaged over the batch
};

LatentNorm latent_norm_from_string(const std::string& s);
std::string to_string(LatentNorm norm);

struct LossWeights {
    double lambda_adv = 1.0;
    double lambda_con = 40.0;
    double lambda_lat = 1.0;
    void validate() const;  // nonnegative, not all zero
    bool operator==(const LossWeights&) const = default;
};

struct LossReport {
    double adv_g = 0.0;
    double adv_d = 0.0;
    double con = 0.0;
    double lat = 0.0;
    double total_g = 0.0;
};

// Discriminator objective: -mean[log p_real] - mean[log(1 - p_fake)].
double adversarial_loss_d(const Tensor& p_real, const Tensor& p_fake);
void adversarial_loss_d_grad(const Tensor& p_real, const Tensor& p_fake, Tensor& d_real,
                             Tensor& d_fake);

// Non-saturating generator objective: -mean[log p_fake].
double adversarial_loss_g(const Tensor& p_fake);
Tensor adversarial_loss_g_grad(const Tensor& p_fake);

// Mean absolute elementwise difference.
double contextual_loss(const Tensor& x, const Tensor& x_hat);
Tensor contextual_loss_grad_xhat(const Tensor& x, const Tensor& x_hat);

// Feature discrepancy between f(x) and f(x_hat).
double latent_loss(const Tensor& f_x, const Tensor& f_xhat, LatentNorm norm = LatentNorm::Mse);
Tensor latent_loss_grad_xhat(const Tensor& f_x, const Tensor& f_xhat,
                             LatentNorm norm = LatentNorm::Mse);

// lambda_adv * adv_g + lambda_con * con + lambda_lat * lat; raises a
// divergence error when any part is non-finite.
double total_generator_loss(double adv_g, double con, double lat, const LossWeights& w);

}  // namespace skipgan
