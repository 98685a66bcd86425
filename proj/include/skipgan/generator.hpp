#pragma once

#include <optional>
#include <vector>

#include "skipgan/layers.hpp"
#include "skipgan/tensor.hpp"

namespace skipgan {

struct GeneratorConfig {
    int input_size = 64;   // square images
    int in_channels = 3;
    int nz = 100;          // latent dimension
    int base_filters = 64; // channels after the first block, doubling per block
    int n_blocks = 0;      // 0 selects the depth that leaves a 2x2 pre-bottleneck map

    int resolved_blocks() const;
    void validate() const;
    bool operator==(const GeneratorConfig&) const = default;
};

// Structural record of one skip connection, checked at build time.
struct DecoderWiring {
    int level;               // encoder resolution level the block consumes
    int spatial;             // feature map side at that level
    int upsampled_channels;  // channels arriving from the decoder path
    int skip_channels;       // channels concatenated from the encoder
    int tconv_in_channels;   // declared input channels of the block
};

struct EncodeResult {
    Tensor z;                        // (N, nz)
    std::vector<Tensor> activations; // encoder outputs e_1..e_B
};

struct GeneratorCache;

// Bow-tie encoder-decoder. Encoder blocks: stride-2 conv, batch norm (absent
// on the first block), leaky rectifier. A valid convolution collapses the
// final map to the latent vector; the decoder mirrors the encoder with
// transposed convolutions, concatenating each encoder activation into the
// decoder at matching resolution. Output head squashes with tanh. The raw
// input is never skipped to the output.
class Generator {
public:
    explicit Generator(const GeneratorConfig& config);

    // Evaluation-mode passes (running batch-norm statistics, no side effects).
    EncodeResult encode(const Tensor& x) const;
    Tensor reconstruct(const Tensor& x) const;

    // Training-mode pass; the cache carries what backward() needs.
    Tensor forward(const Tensor& x, GeneratorCache& cache);
    // Accumulates parameter gradients, returns d(loss)/d(input).
    Tensor backward(const Tensor& d_output, const GeneratorCache& cache);

    // With skips disabled the concatenated encoder channels are zeros and no
    // gradient flows through them; shapes are unchanged.
    void set_skips_enabled(bool enabled) { skips_enabled_ = enabled; }
    bool skips_enabled() const { return skips_enabled_; }

    std::vector<ParamRef> parameters();
    std::vector<StateRef> state();

    const GeneratorConfig& config() const { return config_; }
    const std::vector<int>& encoder_spatial_sizes() const { return spatial_; }  // s_1..s_B
    const std::vector<DecoderWiring>& decoder_wiring() const { return wiring_; }

private:
    struct EncBlock {
        Conv2d conv;
        std::optional<BatchNorm2d> bn;
    };
    struct DecBlock {
        ConvTranspose2d tconv;
        BatchNorm2d bn;
    };

    Tensor run_forward(const Tensor& x, GeneratorCache* cache, bool training) const;

    int encoder_channels(int level) const;  // channels of e_level, level in 1..B

    GeneratorConfig config_;
    int blocks_;
    std::vector<int> spatial_;  // s_1..s_B
    std::vector<EncBlock> encoder_;
    Conv2d bottleneck_;
    DecBlock opening_;
    std::vector<DecBlock> decoder_;  // levels B..2
    ConvTranspose2d head_;           // level 1 -> output image
    std::vector<DecoderWiring> wiring_;
    bool skips_enabled_ = true;
};

struct GeneratorCache {
    Tensor input;
    std::vector<Tensor> enc_conv;  // per block, conv output (batch-norm input)
    std::vector<Tensor> enc_bn;    // per block, batch-norm output (activation input)
    std::vector<Tensor> enc_out;   // e_1..e_B
    Tensor z_pre;                  // (N, nz, 1, 1)
    Tensor open_conv, open_bn;
    std::vector<Tensor> dec_concat, dec_conv, dec_bn, dec_out;
    Tensor head_concat, head_conv;
};

Generator build_generator(const GeneratorConfig& config, std::uint64_t seed);

// In-place tensor accumulation used when merging gradient paths.
void add_inplace(Tensor& target, const Tensor& addend);

}  // namespace skipgan
