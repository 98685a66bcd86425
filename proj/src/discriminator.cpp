#include "skipgan/discriminator.hpp"

#include <string>
#include <utility>

#include "skipgan/errors.hpp"
#include "skipgan/rng.hpp"

namespace skipgan {

Discriminator::Discriminator(const GeneratorConfig& config)
    : config_(config),
      blocks_(config.resolved_blocks()),
      feature_length_(0),
      head_("discriminator.head", 1, 1, 1, 1, 0) {
    config_.validate();
    if (blocks_ < 1) throw ConfigError("discriminator needs at least one block");

    int side = config_.input_size;
    int channels = config_.in_channels;
    for (int i = 1; i <= blocks_; ++i) {
        int out = config_.base_filters << (i - 1);
        std::string base = "discriminator." + std::to_string(i);
        Block block{Conv2d(base + ".conv", channels, out, 4, 2, 1), std::nullopt};
        if (i > 1) block.bn.emplace(base + ".norm", out);
        blocks_list_.push_back(std::move(block));
        int next;
        try {
            next = conv_output_size(side, 4, 2, 1);
        } catch (const ShapeError&) {
            next = 0;
        }
        if (next < 1)
            throw ConfigError("input size too small: " + std::to_string(config_.input_size) +
                              " cannot support " + std::to_string(blocks_) + " blocks");
        side = next;
        channels = out;
    }
    feature_length_ = channels * side * side;
    head_ = Conv2d("discriminator.head", channels, 1, side, 1, 0);
}

DiscOutput Discriminator::run_forward(const Tensor& x, DiscriminatorCache* cache,
                                      bool training) const {
    if (x.shape().size() != 4 || x.shape()[1] != config_.in_channels ||
        x.shape()[2] != config_.input_size || x.shape()[3] != config_.input_size)
        throw ShapeError("discriminator: input must be (N, " + std::to_string(config_.in_channels) +
                         ", " + std::to_string(config_.input_size) + ", " +
                         std::to_string(config_.input_size) + ")");
    auto* self = const_cast<Discriminator*>(this);
    if (cache) {
        cache->conv_out.clear();
        cache->bn_out.clear();
        cache->act_out.clear();
        cache->input = x;
    }

    Tensor a = x;
    for (auto& block : self->blocks_list_) {
        Tensor c = block.conv.forward(a);
        if (cache) cache->conv_out.push_back(c);
        Tensor b = block.bn ? (training ? block.bn->forward_train(c) : block.bn->forward_eval(c))
                            : std::move(c);
        if (cache) cache->bn_out.push_back(block.bn ? b : Tensor());
        a = leaky_relu(b, 0.2);
        if (cache) cache->act_out.push_back(a);
    }

    Tensor logits = head_.forward(a);  // (N, 1, 1, 1)
    if (cache) cache->logits = logits;

    const int n = x.shape()[0];
    DiscOutput out;
    out.prob = Tensor({n});
    Tensor probs4 = sigmoid(logits);
    out.prob.vec() = probs4.vec();
    out.features = Tensor({n, feature_length_});
    out.features.vec() = a.vec();
    return out;
}

DiscOutput Discriminator::forward(const Tensor& x, DiscriminatorCache& cache) {
    return run_forward(x, &cache, true);
}

DiscOutput Discriminator::forward_detached(const Tensor& x) {
    return run_forward(x, nullptr, true);
}

DiscOutput Discriminator::forward_eval(const Tensor& x) const {
    return run_forward(x, nullptr, false);
}

Tensor Discriminator::backward(const Tensor& d_prob, const Tensor& d_features,
                               const DiscriminatorCache& cache) {
    const int n = cache.input.shape()[0];
    if (d_prob.shape() != std::vector<int>{n})
        throw ShapeError("discriminator backward: d_prob must be (N)");
    if (d_features.shape() != std::vector<int>{n, feature_length_})
        throw ShapeError("discriminator backward: d_features must be (N, feature_length)");

    Tensor dp4(cache.logits.shape());
    dp4.vec() = d_prob.vec();
    Tensor dlogits = sigmoid_backward(cache.logits, dp4);

    const Tensor& feat_map = cache.act_out.back();
    Tensor da = head_.backward(feat_map, dlogits);
    {
        // Feature-tap gradient joins the head gradient at the last activation.
        const auto& df = d_features.vec();
        auto& dv = da.vec();
        for (std::size_t i = 0; i < dv.size(); ++i) dv[i] += df[i];
    }

    Tensor g = std::move(da);
    for (int i = blocks_ - 1; i >= 0; --i) {
        auto idx = static_cast<std::size_t>(i);
        const Tensor& pre_act =
            blocks_list_[idx].bn ? cache.bn_out[idx] : cache.conv_out[idx];
        Tensor dpre = leaky_relu_backward(pre_act, g, 0.2);
        Tensor dconv = blocks_list_[idx].bn
                           ? blocks_list_[idx].bn->backward(cache.conv_out[idx], dpre)
                           : std::move(dpre);
        const Tensor& in = (i == 0) ? cache.input : cache.act_out[idx - 1];
        g = blocks_list_[idx].conv.backward(in, dconv);
    }
    return g;
}

std::vector<ParamRef> Discriminator::parameters() {
    std::vector<ParamRef> params;
    for (auto& block : blocks_list_) {
        block.conv.collect_params(params);
        if (block.bn) block.bn->collect_params(params);
    }
    head_.collect_params(params);
    return params;
}

std::vector<StateRef> Discriminator::state() {
    std::vector<StateRef> state;
    for (auto& block : blocks_list_)
        if (block.bn) block.bn->collect_state(state);
    return state;
}

Discriminator build_discriminator(const GeneratorConfig& config, std::uint64_t seed) {
    Discriminator d(config);
    Rng rng(seed);
    dcgan_init(d.parameters(), rng);
    return d;
}

}  // namespace skipgan
