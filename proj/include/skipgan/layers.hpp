#pragma once

#include <optional>
#include <string>
#include <vector>

#include "skipgan/tensor.hpp"

namespace skipgan {

enum class ParamKind {
    ConvWeight,  // init: Normal(0, 0.02)
    NormScale,   // init: Normal(1, 0.02)
    NormOffset,  // init: 0
    Bias,        // init: 0
};

struct ParamRef {
    std::string name;
    Tensor* value = nullptr;
    Tensor* grad = nullptr;
    ParamKind kind = ParamKind::ConvWeight;
};

// Named non-trainable state (batch-norm running statistics).
struct StateRef {
    std::string name;
    Tensor* value = nullptr;
};

int conv_output_size(int input, int kernel, int stride, int padding);

// Layers are pure in their activations: forward(x) computes outputs,
// backward(x, dy) recomputes whatever intermediates it needs from the same
// input, accumulates parameter gradients and returns the input gradient.
// The caller keeps each layer's input alive between the two calls.

class Conv2d {
public:
    Conv2d(std::string name, int in_channels, int out_channels, int kernel, int stride,
           int padding);

    Tensor forward(const Tensor& x) const;
    Tensor backward(const Tensor& x, const Tensor& dy);

    void collect_params(std::vector<ParamRef>& out);
    int output_size(int input) const { return conv_output_size(input, kernel_, stride_, padding_); }
    int in_channels() const { return in_channels_; }
    int out_channels() const { return out_channels_; }
    const Tensor& weight() const { return weight_; }
    Tensor& weight() { return weight_; }

private:
    void check_input(const Tensor& x) const;

    std::string name_;
    int in_channels_, out_channels_, kernel_, stride_, padding_;
    Tensor weight_;  // (out, in, k, k)
    Tensor bias_;    // (out)
    Tensor weight_grad_, bias_grad_;
};

class ConvTranspose2d {
public:
    // output spatial size = (input - 1) * stride - 2 * padding + kernel +
    // output_padding
    ConvTranspose2d(std::string name, int in_channels, int out_channels, int kernel, int stride,
                    int padding, int output_padding = 0);

    Tensor forward(const Tensor& x) const;
    Tensor backward(const Tensor& x, const Tensor& dy);

    void collect_params(std::vector<ParamRef>& out);
    int output_size(int input) const {
        return (input - 1) * stride_ - 2 * padding_ + kernel_ + output_padding_;
    }
    int in_channels() const { return in_channels_; }
    int out_channels() const { return out_channels_; }

private:
    void check_input(const Tensor& x) const;

    std::string name_;
    int in_channels_, out_channels_, kernel_, stride_, padding_, output_padding_;
    Tensor weight_;  // (in, out, k, k)
    Tensor bias_;    // (out)
    Tensor weight_grad_, bias_grad_;
};

class BatchNorm2d {
public:
    explicit BatchNorm2d(std::string name, int channels, double momentum = 0.1,
                         double eps = 1e-5);

    // Batch statistics; updates the running estimates.
    Tensor forward_train(const Tensor& x);
    // Running statistics; bitwise-stable across repeated calls.
    Tensor forward_eval(const Tensor& x) const;
    // Training-mode gradient; recomputes the batch statistics from x.
    Tensor backward(const Tensor& x, const Tensor& dy);

    void collect_params(std::vector<ParamRef>& out);
    void collect_state(std::vector<StateRef>& out);
    int channels() const { return channels_; }

private:
    void check_input(const Tensor& x) const;

    std::string name_;
    int channels_;
    double momentum_, eps_;
    Tensor gamma_, beta_;
    Tensor gamma_grad_, beta_grad_;
    Tensor running_mean_, running_var_;
};

// Activations; slope convention: leaky_relu(x <= 0) = alpha * x.
Tensor leaky_relu(const Tensor& x, double alpha);
Tensor leaky_relu_backward(const Tensor& x, const Tensor& dy, double alpha);
Tensor relu(const Tensor& x);
Tensor relu_backward(const Tensor& x, const Tensor& dy);
Tensor tanh_activation(const Tensor& x);
Tensor tanh_backward(const Tensor& x, const Tensor& dy);
Tensor sigmoid(const Tensor& x);
Tensor sigmoid_backward(const Tensor& x, const Tensor& dy);

// Channel concatenation [a | b] along axis 1 and its gradient split.
Tensor concat_channels(const Tensor& a, const Tensor& b);
Tensor slice_channels(const Tensor& x, int first_channel, int count);

class Rng;

// Convolution weights ~ N(0, 0.02), norm scales ~ N(1, 0.02), offsets and
// biases zero. Parameters are visited in collection order.
void dcgan_init(const std::vector<ParamRef>& params, Rng& rng);

}  // namespace skipgan
