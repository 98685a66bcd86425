#include "skipgan/generator.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "skipgan/errors.hpp"
#include "skipgan/rng.hpp"

namespace skipgan {

namespace {

Tensor reshape_copy(const Tensor& t, std::vector<int> shape) {
    Tensor out(std::move(shape));
    if (out.size() != t.size())
        throw ShapeError("reshape: element count mismatch");
    out.vec() = t.vec();
    return out;
}

}  // namespace

void add_inplace(Tensor& target, const Tensor& addend) {
    require_same_shape(target, addend, "add_inplace");
    auto& a = target.vec();
    const auto& b = addend.vec();
    for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
}

int GeneratorConfig::resolved_blocks() const {
    if (n_blocks > 0) return n_blocks;
    // Deepest stack of stride-2 blocks that still leaves a map of side >= 2.
    int blocks = 0;
    int side = input_size;
    while (side / 2 >= 2) {
        side /= 2;
        ++blocks;
    }
    return blocks;
}

void GeneratorConfig::validate() const {
    if (input_size < 4)
        throw ConfigError("input size too small: " + std::to_string(input_size) +
                          " (need at least 4)");
    if (in_channels < 1) throw ConfigError("in_channels must be positive");
    if (nz < 1) throw ConfigError("nz must be positive");
    if (base_filters < 1) throw ConfigError("base_filters must be positive");
    if (n_blocks < 0) throw ConfigError("n_blocks must be non-negative");
}

int Generator::encoder_channels(int level) const {
    return config_.base_filters << (level - 1);
}

Generator::Generator(const GeneratorConfig& config)
    : config_(config),
      blocks_(config.resolved_blocks()),
      bottleneck_("generator.bottleneck", 1, 1, 1, 1, 0),
      opening_{ConvTranspose2d("generator.decoder.open", 1, 1, 1, 1, 0, 0),
               BatchNorm2d("generator.decoder.open.norm", 1)},
      head_("generator.decoder.head", 1, 1, 1, 1, 0, 0) {
    config_.validate();
    if (blocks_ < 1) throw ConfigError("generator needs at least one block");

    // Encoder trace: each block halves the map; reject inputs that collapse.
    int side = config_.input_size;
    for (int i = 1; i <= blocks_; ++i) {
        int next;
        try {
            next = conv_output_size(side, 4, 2, 1);
        } catch (const ShapeError&) {
            next = 0;
        }
        if (next < 1)
            throw ConfigError("input size too small: " + std::to_string(config_.input_size) +
                              " cannot support " + std::to_string(blocks_) + " blocks");
        spatial_.push_back(next);
        side = next;
    }
    const int m = spatial_.back();

    encoder_.reserve(blocks_);
    for (int i = 1; i <= blocks_; ++i) {
        int in = (i == 1) ? config_.in_channels : encoder_channels(i - 1);
        int out = encoder_channels(i);
        std::string base = "generator.encoder." + std::to_string(i);
        EncBlock block{Conv2d(base + ".conv", in, out, 4, 2, 1), std::nullopt};
        if (i > 1) block.bn.emplace(base + ".norm", out);
        encoder_.push_back(std::move(block));
    }

    bottleneck_ = Conv2d("generator.bottleneck", encoder_channels(blocks_), config_.nz, m, 1, 0);

    opening_ = DecBlock{
        ConvTranspose2d("generator.decoder.open", config_.nz, encoder_channels(blocks_), m, 1, 0, 0),
        BatchNorm2d("generator.decoder.open.norm", encoder_channels(blocks_))};

    auto spatial_at = [&](int level) { return level == 0 ? config_.input_size : spatial_[level - 1]; };

    decoder_.reserve(blocks_ > 1 ? blocks_ - 1 : 0);
    for (int level = blocks_; level >= 2; --level) {
        int up = encoder_channels(level);
        int skip = encoder_channels(level);
        int out = encoder_channels(level - 1);
        int op = spatial_at(level - 1) - 2 * spatial_at(level);
        std::string base = "generator.decoder." + std::to_string(level);
        decoder_.push_back(DecBlock{ConvTranspose2d(base + ".tconv", up + skip, out, 4, 2, 1, op),
                                    BatchNorm2d(base + ".norm", out)});
        wiring_.push_back(DecoderWiring{level, spatial_at(level), up, skip, up + skip});
    }

    {
        int up = encoder_channels(1);
        int skip = encoder_channels(1);
        int op = config_.input_size - 2 * spatial_at(1);
        head_ = ConvTranspose2d("generator.decoder.head", up + skip, config_.in_channels, 4, 2, 1, op);
        wiring_.push_back(DecoderWiring{1, spatial_at(1), up, skip, up + skip});
    }

    for (const auto& w : wiring_)
        if (w.tconv_in_channels != w.upsampled_channels + w.skip_channels)
            throw ShapeError("decoder wiring does not match channel budget");
}

EncodeResult Generator::encode(const Tensor& x) const {
    if (x.shape().size() != 4 || x.shape()[1] != config_.in_channels ||
        x.shape()[2] != config_.input_size || x.shape()[3] != config_.input_size)
        throw ShapeError("encode: input must be (N, " + std::to_string(config_.in_channels) + ", " +
                         std::to_string(config_.input_size) + ", " +
                         std::to_string(config_.input_size) + ")");
    EncodeResult result;
    Tensor a = x;
    for (const auto& block : encoder_) {
        Tensor c = block.conv.forward(a);
        if (block.bn) c = block.bn->forward_eval(c);
        a = leaky_relu(c, 0.2);
        result.activations.push_back(a);
    }
    Tensor zp = bottleneck_.forward(a);
    result.z = reshape_copy(zp, {zp.shape()[0], config_.nz});
    return result;
}

Tensor Generator::run_forward(const Tensor& x, GeneratorCache* cache, bool training) const {
    if (x.shape().size() != 4 || x.shape()[1] != config_.in_channels ||
        x.shape()[2] != config_.input_size || x.shape()[3] != config_.input_size)
        throw ShapeError("generator: input must be (N, " + std::to_string(config_.in_channels) +
                         ", " + std::to_string(config_.input_size) + ", " +
                         std::to_string(config_.input_size) + ")");
    auto* self = const_cast<Generator*>(this);
    if (cache) {
        cache->enc_conv.clear();
        cache->enc_bn.clear();
        cache->enc_out.clear();
        cache->dec_concat.clear();
        cache->dec_conv.clear();
        cache->dec_bn.clear();
        cache->dec_out.clear();
        cache->input = x;
    }

    std::vector<Tensor> eval_acts;
    std::vector<Tensor>& acts = cache ? cache->enc_out : eval_acts;
    auto enc_act = [&acts](int level) -> const Tensor& {
        return acts[static_cast<std::size_t>(level - 1)];
    };

    Tensor a = x;
    for (auto& block : self->encoder_) {
        Tensor c = block.conv.forward(a);
        if (cache) cache->enc_conv.push_back(c);
        Tensor b = block.bn ? (training ? block.bn->forward_train(c) : block.bn->forward_eval(c))
                            : std::move(c);
        if (cache) cache->enc_bn.push_back(block.bn ? b : Tensor());
        a = leaky_relu(b, 0.2);
        acts.push_back(a);
    }

    Tensor zp = bottleneck_.forward(a);
    if (cache) cache->z_pre = zp;

    Tensor oc = opening_.tconv.forward(zp);
    if (cache) cache->open_conv = oc;
    Tensor ob = training ? self->opening_.bn.forward_train(oc) : opening_.bn.forward_eval(oc);
    if (cache) cache->open_bn = ob;
    Tensor d = relu(ob);

    std::size_t j = 0;
    for (int level = blocks_; level >= 2; --level, ++j) {
        Tensor skip = skips_enabled_ ? enc_act(level) : Tensor::zeros(enc_act(level).shape());
        Tensor u = concat_channels(d, skip);
        if (cache) cache->dec_concat.push_back(u);
        Tensor c = decoder_[j].tconv.forward(u);
        if (cache) cache->dec_conv.push_back(c);
        Tensor b = training ? self->decoder_[j].bn.forward_train(c) : decoder_[j].bn.forward_eval(c);
        if (cache) cache->dec_bn.push_back(b);
        d = relu(b);
        if (cache) cache->dec_out.push_back(d);
    }

    Tensor skip = skips_enabled_ ? enc_act(1) : Tensor::zeros(enc_act(1).shape());
    Tensor u = concat_channels(d, skip);
    if (cache) cache->head_concat = u;
    Tensor hc = head_.forward(u);
    if (cache) cache->head_conv = hc;
    return tanh_activation(hc);
}

Tensor Generator::reconstruct(const Tensor& x) const {
    return run_forward(x, nullptr, false);
}

Tensor Generator::forward(const Tensor& x, GeneratorCache& cache) {
    return run_forward(x, &cache, true);
}

Tensor Generator::backward(const Tensor& d_output, const GeneratorCache& cache) {
    // Gradients flowing into each encoder activation via the skip paths.
    std::vector<Tensor> d_enc(static_cast<std::size_t>(blocks_) + 1);

    Tensor dh = tanh_backward(cache.head_conv, d_output);
    Tensor du = head_.backward(cache.head_concat, dh);
    int up = encoder_channels(1);
    Tensor dd = slice_channels(du, 0, up);
    if (skips_enabled_) d_enc[1] = slice_channels(du, up, encoder_channels(1));

    for (int j = blocks_ - 2; j >= 0; --j) {
        int level = blocks_ - j;
        Tensor db = relu_backward(cache.dec_bn[static_cast<std::size_t>(j)], dd);
        Tensor dc = decoder_[static_cast<std::size_t>(j)].bn.backward(
            cache.dec_conv[static_cast<std::size_t>(j)], db);
        Tensor duj = decoder_[static_cast<std::size_t>(j)].tconv.backward(
            cache.dec_concat[static_cast<std::size_t>(j)], dc);
        up = encoder_channels(level);
        dd = slice_channels(duj, 0, up);
        if (skips_enabled_) d_enc[static_cast<std::size_t>(level)] = slice_channels(duj, up, up);
    }

    Tensor db = relu_backward(cache.open_bn, dd);
    Tensor dc = opening_.bn.backward(cache.open_conv, db);
    Tensor dz = opening_.tconv.backward(cache.z_pre, dc);

    Tensor g = bottleneck_.backward(cache.enc_out[static_cast<std::size_t>(blocks_ - 1)], dz);
    if (d_enc[static_cast<std::size_t>(blocks_)].size() != 0)
        add_inplace(g, d_enc[static_cast<std::size_t>(blocks_)]);

    for (int i = blocks_ - 1; i >= 0; --i) {
        auto idx = static_cast<std::size_t>(i);
        const Tensor& pre_act = encoder_[idx].bn ? cache.enc_bn[idx] : cache.enc_conv[idx];
        Tensor da = leaky_relu_backward(pre_act, g, 0.2);
        Tensor dconv =
            encoder_[idx].bn ? encoder_[idx].bn->backward(cache.enc_conv[idx], da) : std::move(da);
        const Tensor& in = (i == 0) ? cache.input : cache.enc_out[idx - 1];
        g = encoder_[idx].conv.backward(in, dconv);
        if (i > 0 && d_enc[idx].size() != 0) add_inplace(g, d_enc[idx]);
    }
    return g;
}

std::vector<ParamRef> Generator::parameters() {
    std::vector<ParamRef> params;
    for (auto& block : encoder_) {
        block.conv.collect_params(params);
        if (block.bn) block.bn->collect_params(params);
    }
    bottleneck_.collect_params(params);
    opening_.tconv.collect_params(params);
    opening_.bn.collect_params(params);
    for (auto& block : decoder_) {
        block.tconv.collect_params(params);
        block.bn.collect_params(params);
    }
    head_.collect_params(params);
    return params;
}

std::vector<StateRef> Generator::state() {
    std::vector<StateRef> state;
    for (auto& block : encoder_)
        if (block.bn) block.bn->collect_state(state);
    opening_.bn.collect_state(state);
    for (auto& block : decoder_) block.bn.collect_state(state);
    return state;
}

Generator build_generator(const GeneratorConfig& config, std::uint64_t seed) {
    Generator g(config);
    Rng rng(seed);
    dcgan_init(g.parameters(), rng);
    return g;
}

}  // namespace skipgan
