#pragma once

#include <optional>
#include <vector>

#include "skipgan/generator.hpp"
#include "skipgan/layers.hpp"
#include "skipgan/tensor.hpp"

namespace skipgan {

struct DiscOutput {
    Tensor prob;      // (N), in (0, 1)
    Tensor features;  // (N, feature_length), tap after the last block activation
};

struct DiscriminatorCache;

// Stride-2 convolution stack mirroring the generator encoder, with a sigmoid
// classifier head. The activation entering the head doubles as the feature
// representation used for latent comparison.
class Discriminator {
public:
    explicit Discriminator(const GeneratorConfig& config);

    DiscOutput forward(const Tensor& x, DiscriminatorCache& cache);  // training mode
    DiscOutput forward_detached(const Tensor& x);  // training mode, no gradient path
    DiscOutput forward_eval(const Tensor& x) const;

    // d_prob is (N), d_features is (N, feature_length); either may be all
    // zeros. Accumulates parameter gradients and returns d(loss)/d(input).
    Tensor backward(const Tensor& d_prob, const Tensor& d_features,
                    const DiscriminatorCache& cache);

    std::vector<ParamRef> parameters();
    std::vector<StateRef> state();

    int feature_length() const { return feature_length_; }
    const GeneratorConfig& config() const { return config_; }

private:
    struct Block {
        Conv2d conv;
        std::optional<BatchNorm2d> bn;
    };

    DiscOutput run_forward(const Tensor& x, DiscriminatorCache* cache, bool training) const;

    GeneratorConfig config_;
    int blocks_;
    int feature_length_;
    std::vector<Block> blocks_list_;
    Conv2d head_;  // valid conv to a single logit
};

struct DiscriminatorCache {
    Tensor input;
    std::vector<Tensor> conv_out;  // per block, conv output (batch-norm input)
    std::vector<Tensor> bn_out;    // per block, batch-norm output (activation input)
    std::vector<Tensor> act_out;   // per block activations; back() is the feature map
    Tensor logits;                 // (N, 1, 1, 1)
};

Discriminator build_discriminator(const GeneratorConfig& config, std::uint64_t seed);

}  // namespace skipgan
