#pragma once

#include <cstdint>
#include <vector>

#include "skipgan/layers.hpp"

namespace skipgan {

struct AdamConfig {
    double learning_rate = 2e-3;
    double beta1 = 0.5;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// Adam with bias correction. The optimizer aliases the parameter storage it
// was built with; the owning models must outlive it.
class Adam {
public:
    Adam(std::vector<ParamRef> params, AdamConfig config);

    void step();       // one update from the accumulated gradients
    void zero_grad();  // clears the gradient accumulators

    void set_learning_rate(double lr);
    double learning_rate() const { return lr_; }
    const AdamConfig& config() const { return config_; }

    // Serialization access for checkpoints.
    std::int64_t step_count() const { return t_; }
    void set_step_count(std::int64_t t) { t_ = t; }
    std::vector<std::vector<double>>& first_moments() { return m_; }
    std::vector<std::vector<double>>& second_moments() { return v_; }
    const std::vector<std::vector<double>>& first_moments() const { return m_; }
    const std::vector<std::vector<double>>& second_moments() const { return v_; }
    const std::vector<ParamRef>& params() const { return params_; }

private:
    std::vector<ParamRef> params_;
    AdamConfig config_;
    double lr_;
    std::int64_t t_ = 0;
    std::vector<std::vector<double>> m_, v_;
};

}  // namespace skipgan
