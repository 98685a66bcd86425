#include "skipgan/adam.hpp"

#include <cmath>

#include "skipgan/errors.hpp"

namespace skipgan {

Adam::Adam(std::vector<ParamRef> params, AdamConfig config)
    : params_(std::move(params)), config_(config), lr_(config.learning_rate) {
    if (config_.learning_rate <= 0) throw ConfigError("learning rate must be positive");
    if (config_.beta1 < 0 || config_.beta1 >= 1 || config_.beta2 < 0 || config_.beta2 >= 1)
        throw ConfigError("Adam betas must lie in [0, 1)");
    m_.reserve(params_.size());
    v_.reserve(params_.size());
    for (const auto& p : params_) {
        m_.emplace_back(p.value->size(), 0.0);
        v_.emplace_back(p.value->size(), 0.0);
    }
}

void Adam::set_learning_rate(double lr) {
    if (lr < 0) throw ConfigError("learning rate must be nonnegative");
    lr_ = lr;
}

void Adam::zero_grad() {
    for (const auto& p : params_) p.grad->fill(0.0);
}

void Adam::step() {
    ++t_;
    const double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < params_.size(); ++i) {
        auto& value = params_[i].value->vec();
        const auto& grad = params_[i].grad->vec();
        auto& m = m_[i];
        auto& v = v_[i];
        for (std::size_t j = 0; j < value.size(); ++j) {
            const double g = grad[j];
            if (!std::isfinite(g))
                throw DivergenceError("non-finite gradient in " + params_[i].name);
            m[j] = config_.beta1 * m[j] + (1.0 - config_.beta1) * g;
            v[j] = config_.beta2 * v[j] + (1.0 - config_.beta2) * g * g;
            const double mhat = m[j] / bc1;
            const double vhat = v[j] / bc2;
            value[j] -= lr_ * mhat / (std::sqrt(vhat) + config_.eps);
        }
    }
}

}  // namespace skipgan
