#include "skipgan/losses.hpp"

#include <cmath>

#include "skipgan/errors.hpp"

namespace skipgan {

namespace {

double clamp_prob(double p) {
    if (p < kProbEps) return kProbEps;
    if (p > 1.0 - kProbEps) return 1.0 - kProbEps;
    return p;
}

bool clamp_active(double p) { return p <= kProbEps || p >= 1.0 - kProbEps; }

}  // namespace

LatentNorm latent_norm_from_string(const std::string& s) {
    if (s == "mse") return LatentNorm::Mse;
    if (s == "l2") return LatentNorm::L2;
    throw ConfigError("unknown latent_norm '" + s + "' (expected 'mse' or 'l2')");
}

std::string to_string(LatentNorm norm) {
    return norm == LatentNorm::Mse ? "mse" : "l2";
}

void LossWeights::validate() const {
    if (lambda_adv < 0 || lambda_con < 0 || lambda_lat < 0)
        throw ConfigError("loss weights must be nonnegative");
    if (lambda_adv == 0 && lambda_con == 0 && lambda_lat == 0)
        throw ConfigError("loss weights must not all be zero");
}

double adversarial_loss_d(const Tensor& p_real, const Tensor& p_fake) {
    if (p_real.size() == 0 || p_fake.size() == 0)
        throw ShapeError("adversarial_loss_d: empty probability batch");
    double loss = 0.0;
    for (double p : p_real.vec()) loss -= std::log(clamp_prob(p));
    loss /= static_cast<double>(p_real.size());
    double fake = 0.0;
    for (double p : p_fake.vec()) fake -= std::log(1.0 - clamp_prob(p));
    return loss + fake / static_cast<double>(p_fake.size());
}

void adversarial_loss_d_grad(const Tensor& p_real, const Tensor& p_fake, Tensor& d_real,
                             Tensor& d_fake) {
    d_real = Tensor(p_real.shape());
    d_fake = Tensor(p_fake.shape());
    const double nr = static_cast<double>(p_real.size());
    const double nf = static_cast<double>(p_fake.size());
    for (std::size_t i = 0; i < p_real.size(); ++i) {
        double p = p_real.vec()[i];
        d_real.vec()[i] = clamp_active(p) ? 0.0 : -1.0 / (nr * p);
    }
    for (std::size_t i = 0; i < p_fake.size(); ++i) {
        double p = p_fake.vec()[i];
        d_fake.vec()[i] = clamp_active(p) ? 0.0 : 1.0 / (nf * (1.0 - p));
    }
}

double adversarial_loss_g(const Tensor& p_fake) {
    if (p_fake.size() == 0) throw ShapeError("adversarial_loss_g: empty probability batch");
    double loss = 0.0;
    for (double p : p_fake.vec()) loss -= std::log(clamp_prob(p));
    return loss / static_cast<double>(p_fake.size());
}

Tensor adversarial_loss_g_grad(const Tensor& p_fake) {
    Tensor grad(p_fake.shape());
    const double n = static_cast<double>(p_fake.size());
    for (std::size_t i = 0; i < p_fake.size(); ++i) {
        double p = p_fake.vec()[i];
        grad.vec()[i] = clamp_active(p) ? 0.0 : -1.0 / (n * p);
    }
    return grad;
}

double contextual_loss(const Tensor& x, const Tensor& x_hat) {
    require_same_shape(x, x_hat, "contextual_loss");
    if (x.size() == 0) throw ShapeError("contextual_loss: empty input");
    double sum = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) sum += std::abs(x.vec()[i] - x_hat.vec()[i]);
    return sum / static_cast<double>(x.size());
}

Tensor contextual_loss_grad_xhat(const Tensor& x, const Tensor& x_hat) {
    require_same_shape(x, x_hat, "contextual_loss");
    Tensor grad(x.shape());
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        double d = x_hat.vec()[i] - x.vec()[i];
        grad.vec()[i] = (d > 0 ? 1.0 : (d < 0 ? -1.0 : 0.0)) / n;
    }
    return grad;
}

double latent_loss(const Tensor& f_x, const Tensor& f_xhat, LatentNorm norm) {
    require_same_shape(f_x, f_xhat, "latent_loss");
    if (f_x.size() == 0) throw ShapeError("latent_loss: empty input");
    if (norm == LatentNorm::Mse) {
        double sum = 0.0;
        for (std::size_t i = 0; i < f_x.size(); ++i) {
            double d = f_x.vec()[i] - f_xhat.vec()[i];
            sum += d * d;
        }
        return sum / static_cast<double>(f_x.size());
    }
    const int n = f_x.dim(0);
    const std::size_t per = f_x.size() / static_cast<std::size_t>(n);
    double sum = 0.0;
    for (int s = 0; s < n; ++s) {
        double sq = 0.0;
        for (std::size_t j = 0; j < per; ++j) {
            double d = f_x.vec()[s * per + j] - f_xhat.vec()[s * per + j];
            sq += d * d;
        }
        sum += std::sqrt(sq);
    }
    return sum / static_cast<double>(n);
}

Tensor latent_loss_grad_xhat(const Tensor& f_x, const Tensor& f_xhat, LatentNorm norm) {
    require_same_shape(f_x, f_xhat, "latent_loss");
    Tensor grad(f_x.shape());
    if (norm == LatentNorm::Mse) {
        const double n = static_cast<double>(f_x.size());
        for (std::size_t i = 0; i < f_x.size(); ++i)
            grad.vec()[i] = 2.0 * (f_xhat.vec()[i] - f_x.vec()[i]) / n;
        return grad;
    }
    const int n = f_x.dim(0);
    const std::size_t per = f_x.size() / static_cast<std::size_t>(n);
    for (int s = 0; s < n; ++s) {
        double sq = 0.0;
        for (std::size_t j = 0; j < per; ++j) {
            double d = f_x.vec()[s * per + j] - f_xhat.vec()[s * per + j];
            sq += d * d;
        }
        double nrm = std::sqrt(sq);
        for (std::size_t j = 0; j < per; ++j) {
            std::size_t i = s * per + j;
            grad.vec()[i] =
                nrm > 0 ? (f_xhat.vec()[i] - f_x.vec()[i]) / (nrm * static_cast<double>(n)) : 0.0;
        }
    }
    return grad;
}

double total_generator_loss(double adv_g, double con, double lat, const LossWeights& w) {
    w.validate();
    if (!std::isfinite(adv_g))
        throw DivergenceError("adversarial generator loss is not finite");
    if (!std::isfinite(con)) throw DivergenceError("contextual loss is not finite");
    if (!std::isfinite(lat)) throw DivergenceError("latent loss is not finite");
    return w.lambda_adv * adv_g + w.lambda_con * con + w.lambda_lat * lat;
}

}  // namespace skipgan
