#include "skipgan/layers.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>

#include "skipgan/errors.hpp"
#include "skipgan/rng.hpp"

namespace skipgan {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using ConstMapMat = Eigen::Map<const RowMat>;

// Gathers kernel windows into a (C*k*k, Hpos*Wpos) matrix. The image has
// spatial size (H, W); window position (oh, ow) reads pixel
// (oh*s - p + ki, ow*s - p + kj), zero outside the image.
void im2col(const double* image, int C, int H, int W, int k, int s, int p, int Hpos, int Wpos,
            double* col) {
    const int L = Hpos * Wpos;
    for (int c = 0; c < C; ++c) {
        const double* plane = image + static_cast<std::size_t>(c) * H * W;
        for (int ki = 0; ki < k; ++ki) {
            for (int kj = 0; kj < k; ++kj) {
                double* row = col + (static_cast<std::size_t>(c) * k * k + ki * k + kj) * L;
                for (int oh = 0; oh < Hpos; ++oh) {
                    const int ih = oh * s - p + ki;
                    double* dst = row + static_cast<std::size_t>(oh) * Wpos;
                    if (ih < 0 || ih >= H) {
                        std::fill(dst, dst + Wpos, 0.0);
                        continue;
                    }
                    const double* src = plane + static_cast<std::size_t>(ih) * W;
                    for (int ow = 0; ow < Wpos; ++ow) {
                        const int iw = ow * s - p + kj;
                        dst[ow] = (iw >= 0 && iw < W) ? src[iw] : 0.0;
                    }
                }
            }
        }
    }
}

// Scatter-add inverse of im2col; the destination image must be pre-zeroed
// (or hold values to accumulate into).
void col2im_add(const double* col, int C, int H, int W, int k, int s, int p, int Hpos, int Wpos,
                double* image) {
    const int L = Hpos * Wpos;
    for (int c = 0; c < C; ++c) {
        double* plane = image + static_cast<std::size_t>(c) * H * W;
        for (int ki = 0; ki < k; ++ki) {
            for (int kj = 0; kj < k; ++kj) {
                const double* row = col + (static_cast<std::size_t>(c) * k * k + ki * k + kj) * L;
                for (int oh = 0; oh < Hpos; ++oh) {
                    const int ih = oh * s - p + ki;
                    if (ih < 0 || ih >= H) continue;
                    const double* src = row + static_cast<std::size_t>(oh) * Wpos;
                    double* dst = plane + static_cast<std::size_t>(ih) * W;
                    for (int ow = 0; ow < Wpos; ++ow) {
                        const int iw = ow * s - p + kj;
                        if (iw >= 0 && iw < W) dst[iw] += src[ow];
                    }
                }
            }
        }
    }
}

void require_nchw(const Tensor& x, int channels, const std::string& name) {
    if (x.rank() != 4)
        throw ShapeError(name + ": expected a rank-4 NCHW tensor");
    if (x.dim(1) != channels)
        throw ShapeError(name + ": expected " + std::to_string(channels) + " channels, got " +
                         std::to_string(x.dim(1)));
}

}  // namespace

int conv_output_size(int input, int kernel, int stride, int padding) {
    const int padded = input + 2 * padding;
    if (padded < kernel) throw ShapeError("convolution input smaller than kernel");
    return (padded - kernel) / stride + 1;
}

// ---------------------------------------------------------------------------
// Conv2d

Conv2d::Conv2d(std::string name, int in_channels, int out_channels, int kernel, int stride,
               int padding)
    : name_(std::move(name)),
      in_channels_(in_channels),
      out_channels_(out_channels),
      kernel_(kernel),
      stride_(stride),
      padding_(padding),
      weight_({out_channels, in_channels, kernel, kernel}),
      bias_({out_channels}),
      weight_grad_({out_channels, in_channels, kernel, kernel}),
      bias_grad_({out_channels}) {}

void Conv2d::check_input(const Tensor& x) const { require_nchw(x, in_channels_, name_); }

Tensor Conv2d::forward(const Tensor& x) const {
    check_input(x);
    const int N = x.dim(0), H = x.dim(2), W = x.dim(3);
    const int Ho = output_size(H), Wo = output_size(W);
    const int L = Ho * Wo;
    const int K = in_channels_ * kernel_ * kernel_;

    Tensor y({N, out_channels_, Ho, Wo});
    std::vector<double> col(static_cast<std::size_t>(K) * L);
    ConstMapMat Wm(weight_.data(), out_channels_, K);
    for (int n = 0; n < N; ++n) {
        im2col(x.data() + static_cast<std::size_t>(n) * in_channels_ * H * W, in_channels_, H, W,
               kernel_, stride_, padding_, Ho, Wo, col.data());
        ConstMapMat Cm(col.data(), K, L);
        MapMat Ym(y.data() + static_cast<std::size_t>(n) * out_channels_ * L, out_channels_, L);
        Ym.noalias() = Wm * Cm;
        for (int c = 0; c < out_channels_; ++c) Ym.row(c).array() += bias_[static_cast<std::size_t>(c)];
    }
    return y;
}

Tensor Conv2d::backward(const Tensor& x, const Tensor& dy) {
    check_input(x);
    const int N = x.dim(0), H = x.dim(2), W = x.dim(3);
    const int Ho = output_size(H), Wo = output_size(W);
    const int L = Ho * Wo;
    const int K = in_channels_ * kernel_ * kernel_;
    if (dy.dim(0) != N || dy.dim(1) != out_channels_ || dy.dim(2) != Ho || dy.dim(3) != Wo)
        throw ShapeError(name_ + ": upstream gradient shape mismatch");

    Tensor dx({N, in_channels_, H, W});
    std::vector<double> col(static_cast<std::size_t>(K) * L);
    std::vector<double> dcol(static_cast<std::size_t>(K) * L);
    ConstMapMat Wm(weight_.data(), out_channels_, K);
    MapMat dWm(weight_grad_.data(), out_channels_, K);
    for (int n = 0; n < N; ++n) {
        im2col(x.data() + static_cast<std::size_t>(n) * in_channels_ * H * W, in_channels_, H, W,
               kernel_, stride_, padding_, Ho, Wo, col.data());
        ConstMapMat Cm(col.data(), K, L);
        ConstMapMat dYm(dy.data() + static_cast<std::size_t>(n) * out_channels_ * L, out_channels_,
                        L);
        dWm.noalias() += dYm * Cm.transpose();
        // Fixed-order accumulation; vectorized reductions vary with buffer
        // alignment and would break bitwise run-to-run reproducibility.
        for (int c = 0; c < out_channels_; ++c) {
            const double* row = dy.data() + (static_cast<std::size_t>(n) * out_channels_ + c) * L;
            double s = 0.0;
            for (int i = 0; i < L; ++i) s += row[i];
            bias_grad_[static_cast<std::size_t>(c)] += s;
        }
        MapMat dCm(dcol.data(), K, L);
        dCm.noalias() = Wm.transpose() * dYm;
        col2im_add(dcol.data(), in_channels_, H, W, kernel_, stride_, padding_, Ho, Wo,
                   dx.data() + static_cast<std::size_t>(n) * in_channels_ * H * W);
    }
    return dx;
}

void Conv2d::collect_params(std::vector<ParamRef>& out) {
    out.push_back({name_ + ".weight", &weight_, &weight_grad_, ParamKind::ConvWeight});
    out.push_back({name_ + ".bias", &bias_, &bias_grad_, ParamKind::Bias});
}

// ---------------------------------------------------------------------------
// ConvTranspose2d

ConvTranspose2d::ConvTranspose2d(std::string name, int in_channels, int out_channels, int kernel,
                                 int stride, int padding, int output_padding)
    : name_(std::move(name)),
      in_channels_(in_channels),
      out_channels_(out_channels),
      kernel_(kernel),
      stride_(stride),
      padding_(padding),
      output_padding_(output_padding),
      weight_({in_channels, out_channels, kernel, kernel}),
      bias_({out_channels}),
      weight_grad_({in_channels, out_channels, kernel, kernel}),
      bias_grad_({out_channels}) {
    if (output_padding_ < 0 || output_padding_ >= stride_)
        throw ConfigError(name_ + ": output padding must be in [0, stride)");
}

void ConvTranspose2d::check_input(const Tensor& x) const { require_nchw(x, in_channels_, name_); }

Tensor ConvTranspose2d::forward(const Tensor& x) const {
    check_input(x);
    const int N = x.dim(0), Hin = x.dim(2), Win = x.dim(3);
    const int Ho = output_size(Hin), Wo = output_size(Win);
    if (Ho < 1 || Wo < 1) throw ShapeError(name_ + ": output size would be empty");
    const int Lin = Hin * Win;
    const int K = out_channels_ * kernel_ * kernel_;

    Tensor y({N, out_channels_, Ho, Wo});
    std::vector<double> col(static_cast<std::size_t>(K) * Lin);
    ConstMapMat Wm(weight_.data(), in_channels_, K);
    for (int n = 0; n < N; ++n) {
        ConstMapMat Xm(x.data() + static_cast<std::size_t>(n) * in_channels_ * Lin, in_channels_,
                       Lin);
        MapMat Cm(col.data(), K, Lin);
        Cm.noalias() = Wm.transpose() * Xm;
        double* yn = y.data() + static_cast<std::size_t>(n) * out_channels_ * Ho * Wo;
        col2im_add(col.data(), out_channels_, Ho, Wo, kernel_, stride_, padding_, Hin, Win, yn);
        MapMat Ym(yn, out_channels_, Ho * Wo);
        for (int c = 0; c < out_channels_; ++c) Ym.row(c).array() += bias_[static_cast<std::size_t>(c)];
    }
    return y;
}

Tensor ConvTranspose2d::backward(const Tensor& x, const Tensor& dy) {
    check_input(x);
    const int N = x.dim(0), Hin = x.dim(2), Win = x.dim(3);
    const int Ho = output_size(Hin), Wo = output_size(Win);
    const int Lin = Hin * Win;
    const int K = out_channels_ * kernel_ * kernel_;
    if (dy.dim(0) != N || dy.dim(1) != out_channels_ || dy.dim(2) != Ho || dy.dim(3) != Wo)
        throw ShapeError(name_ + ": upstream gradient shape mismatch");

    Tensor dx({N, in_channels_, Hin, Win});
    std::vector<double> dycol(static_cast<std::size_t>(K) * Lin);
    ConstMapMat Wm(weight_.data(), in_channels_, K);
    MapMat dWm(weight_grad_.data(), in_channels_, K);
    for (int n = 0; n < N; ++n) {
        im2col(dy.data() + static_cast<std::size_t>(n) * out_channels_ * Ho * Wo, out_channels_,
               Ho, Wo, kernel_, stride_, padding_, Hin, Win, dycol.data());
        ConstMapMat dYc(dycol.data(), K, Lin);
        ConstMapMat Xm(x.data() + static_cast<std::size_t>(n) * in_channels_ * Lin, in_channels_,
                       Lin);
        MapMat dXm(dx.data() + static_cast<std::size_t>(n) * in_channels_ * Lin, in_channels_, Lin);
        dXm.noalias() = Wm * dYc;
        dWm.noalias() += Xm * dYc.transpose();
        // Fixed-order accumulation, as in Conv2d::backward.
        for (int c = 0; c < out_channels_; ++c) {
            const double* row =
                dy.data() + (static_cast<std::size_t>(n) * out_channels_ + c) * (Ho * Wo);
            double s = 0.0;
            for (int i = 0; i < Ho * Wo; ++i) s += row[i];
            bias_grad_[static_cast<std::size_t>(c)] += s;
        }
    }
    return dx;
}

void ConvTranspose2d::collect_params(std::vector<ParamRef>& out) {
    out.push_back({name_ + ".weight", &weight_, &weight_grad_, ParamKind::ConvWeight});
    out.push_back({name_ + ".bias", &bias_, &bias_grad_, ParamKind::Bias});
}

// ---------------------------------------------------------------------------
// BatchNorm2d

BatchNorm2d::BatchNorm2d(std::string name, int channels, double momentum, double eps)
    : name_(std::move(name)),
      channels_(channels),
      momentum_(momentum),
      eps_(eps),
      gamma_(Tensor::full({channels}, 1.0)),
      beta_({channels}),
      gamma_grad_({channels}),
      beta_grad_({channels}),
      running_mean_({channels}),
      running_var_(Tensor::full({channels}, 1.0)) {}

void BatchNorm2d::check_input(const Tensor& x) const { require_nchw(x, channels_, name_); }

Tensor BatchNorm2d::forward_train(const Tensor& x) {
    check_input(x);
    const int N = x.dim(0), H = x.dim(2), W = x.dim(3);
    const std::size_t plane = static_cast<std::size_t>(H) * W;
    const std::size_t M = static_cast<std::size_t>(N) * plane;
    if (M < 2) throw ShapeError(name_ + ": needs more than one value per channel in training");

    Tensor y(x.shape());
    for (int c = 0; c < channels_; ++c) {
        double sum = 0.0, sq_sum = 0.0;
        for (int n = 0; n < N; ++n) {
            const double* src = x.data() + (static_cast<std::size_t>(n) * channels_ + c) * plane;
            for (std::size_t i = 0; i < plane; ++i) {
                sum += src[i];
                sq_sum += src[i] * src[i];
            }
        }
        const double mean = sum / static_cast<double>(M);
        const double var = sq_sum / static_cast<double>(M) - mean * mean;
        const double inv_std = 1.0 / std::sqrt(var + eps_);
        const double g = gamma_[static_cast<std::size_t>(c)];
        const double b = beta_[static_cast<std::size_t>(c)];
        for (int n = 0; n < N; ++n) {
            const double* src = x.data() + (static_cast<std::size_t>(n) * channels_ + c) * plane;
            double* dst = y.data() + (static_cast<std::size_t>(n) * channels_ + c) * plane;
            for (std::size_t i = 0; i < plane; ++i) dst[i] = g * (src[i] - mean) * inv_std + b;
        }
        const double unbiased = var * static_cast<double>(M) / static_cast<double>(M - 1);
        running_mean_[static_cast<std::size_t>(c)] =
            (1.0 - momentum_) * running_mean_[static_cast<std::size_t>(c)] + momentum_ * mean;
        running_var_[static_cast<std::size_t>(c)] =
            (1.0 - momentum_) * running_var_[static_cast<std::size_t>(c)] + momentum_ * unbiased;
    }
    return y;
}

Tensor BatchNorm2d::forward_eval(const Tensor& x) const {
    check_input(x);
    const int N = x.dim(0), H = x.dim(2), W = x.dim(3);
    const std::size_t plane = static_cast<std::size_t>(H) * W;

    Tensor y(x.shape());
    for (int c = 0; c < channels_; ++c) {
        const double mean = running_mean_[static_cast<std::size_t>(c)];
        const double inv_std = 1.0 / std::sqrt(running_var_[static_cast<std::size_t>(c)] + eps_);
        const double g = gamma_[static_cast<std::size_t>(c)];
        const double b = beta_[static_cast<std::size_t>(c)];
        for (int n = 0; n < N; ++n) {
            const double* src = x.data() + (static_cast<std::size_t>(n) * channels_ + c) * plane;
            double* dst = y.data() + (static_cast<std::size_t>(n) * channels_ + c) * plane;
            for (std::size_t i = 0; i < plane; ++i) dst[i] = g * (src[i] - mean) * inv_std + b;
        }
    }
    return y;
}

Tensor BatchNorm2d::backward(const Tensor& x, const Tensor& dy) {
    check_input(x);
    require_same_shape(x, dy, "batch-norm backward");
    const int N = x.dim(0), H = x.dim(2), W = x.dim(3);
    const std::size_t plane = static_cast<std::size_t>(H) * W;
    const double M = static_cast<double>(static_cast<std::size_t>(N) * plane);

    Tensor dx(x.shape());
    for (int c = 0; c < channels_; ++c) {
        double sum = 0.0, sq_sum = 0.0;
        for (int n = 0; n < N; ++n) {
            const double* src = x.data() + (static_cast<std::size_t>(n) * channels_ + c) * plane;
            for (std::size_t i = 0; i < plane; ++i) {
                sum += src[i];
                sq_sum += src[i] * src[i];
            }
        }
        const double mean = sum / M;
        const double var = sq_sum / M - mean * mean;
        const double inv_std = 1.0 / std::sqrt(var + eps_);

        double dy_sum = 0.0, dy_xhat_sum = 0.0;
        for (int n = 0; n < N; ++n) {
            const double* xs = x.data() + (static_cast<std::size_t>(n) * channels_ + c) * plane;
            const double* ds = dy.data() + (static_cast<std::size_t>(n) * channels_ + c) * plane;
            for (std::size_t i = 0; i < plane; ++i) {
                dy_sum += ds[i];
                dy_xhat_sum += ds[i] * (xs[i] - mean) * inv_std;
            }
        }
        gamma_grad_[static_cast<std::size_t>(c)] += dy_xhat_sum;
        beta_grad_[static_cast<std::size_t>(c)] += dy_sum;

        const double g = gamma_[static_cast<std::size_t>(c)];
        const double mean_dy = dy_sum / M;
        const double mean_dy_xhat = dy_xhat_sum / M;
        for (int n = 0; n < N; ++n) {
            const double* xs = x.data() + (static_cast<std::size_t>(n) * channels_ + c) * plane;
            const double* ds = dy.data() + (static_cast<std::size_t>(n) * channels_ + c) * plane;
            double* dd = dx.data() + (static_cast<std::size_t>(n) * channels_ + c) * plane;
            for (std::size_t i = 0; i < plane; ++i) {
                const double xhat = (xs[i] - mean) * inv_std;
                dd[i] = g * inv_std * (ds[i] - mean_dy - xhat * mean_dy_xhat);
            }
        }
    }
    return dx;
}

void BatchNorm2d::collect_params(std::vector<ParamRef>& out) {
    out.push_back({name_ + ".scale", &gamma_, &gamma_grad_, ParamKind::NormScale});
    out.push_back({name_ + ".offset", &beta_, &beta_grad_, ParamKind::NormOffset});
}

void BatchNorm2d::collect_state(std::vector<StateRef>& out) {
    out.push_back({name_ + ".running_mean", &running_mean_});
    out.push_back({name_ + ".running_var", &running_var_});
}

// ---------------------------------------------------------------------------
// Activations

Tensor leaky_relu(const Tensor& x, double alpha) {
    Tensor y(x.shape());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] > 0.0 ? x[i] : alpha * x[i];
    return y;
}

Tensor leaky_relu_backward(const Tensor& x, const Tensor& dy, double alpha) {
    require_same_shape(x, dy, "leaky-relu backward");
    Tensor dx(x.shape());
    for (std::size_t i = 0; i < x.size(); ++i) dx[i] = x[i] > 0.0 ? dy[i] : alpha * dy[i];
    return dx;
}

Tensor relu(const Tensor& x) { return leaky_relu(x, 0.0); }

Tensor relu_backward(const Tensor& x, const Tensor& dy) { return leaky_relu_backward(x, dy, 0.0); }

Tensor tanh_activation(const Tensor& x) {
    Tensor y(x.shape());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = std::tanh(x[i]);
    return y;
}

Tensor tanh_backward(const Tensor& x, const Tensor& dy) {
    require_same_shape(x, dy, "tanh backward");
    Tensor dx(x.shape());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double t = std::tanh(x[i]);
        dx[i] = dy[i] * (1.0 - t * t);
    }
    return dx;
}

Tensor sigmoid(const Tensor& x) {
    Tensor y(x.shape());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = 1.0 / (1.0 + std::exp(-x[i]));
    return y;
}

Tensor sigmoid_backward(const Tensor& x, const Tensor& dy) {
    require_same_shape(x, dy, "sigmoid backward");
    Tensor dx(x.shape());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double s = 1.0 / (1.0 + std::exp(-x[i]));
        dx[i] = dy[i] * s * (1.0 - s);
    }
    return dx;
}

// ---------------------------------------------------------------------------
// Channel plumbing

Tensor concat_channels(const Tensor& a, const Tensor& b) {
    if (a.rank() != 4 || b.rank() != 4) throw ShapeError("concat: expected rank-4 tensors");
    if (a.dim(0) != b.dim(0) || a.dim(2) != b.dim(2) || a.dim(3) != b.dim(3))
        throw ShapeError("concat: batch or spatial dimensions differ");
    const int N = a.dim(0), Ca = a.dim(1), Cb = b.dim(1);
    const std::size_t plane = static_cast<std::size_t>(a.dim(2)) * a.dim(3);

    Tensor y({N, Ca + Cb, a.dim(2), a.dim(3)});
    for (int n = 0; n < N; ++n) {
        double* dst = y.data() + static_cast<std::size_t>(n) * (Ca + Cb) * plane;
        const double* pa = a.data() + static_cast<std::size_t>(n) * Ca * plane;
        const double* pb = b.data() + static_cast<std::size_t>(n) * Cb * plane;
        std::copy(pa, pa + static_cast<std::size_t>(Ca) * plane, dst);
        std::copy(pb, pb + static_cast<std::size_t>(Cb) * plane,
                  dst + static_cast<std::size_t>(Ca) * plane);
    }
    return y;
}

Tensor slice_channels(const Tensor& x, int first_channel, int count) {
    if (x.rank() != 4) throw ShapeError("slice: expected a rank-4 tensor");
    if (first_channel < 0 || first_channel + count > x.dim(1))
        throw ShapeError("slice: channel range out of bounds");
    const int N = x.dim(0), C = x.dim(1);
    const std::size_t plane = static_cast<std::size_t>(x.dim(2)) * x.dim(3);

    Tensor y({N, count, x.dim(2), x.dim(3)});
    for (int n = 0; n < N; ++n) {
        const double* src =
            x.data() + (static_cast<std::size_t>(n) * C + first_channel) * plane;
        double* dst = y.data() + static_cast<std::size_t>(n) * count * plane;
        std::copy(src, src + static_cast<std::size_t>(count) * plane, dst);
    }
    return y;
}

void dcgan_init(const std::vector<ParamRef>& params, Rng& rng) {
    for (const auto& p : params) {
        auto& v = p.value->vec();
        switch (p.kind) {
            case ParamKind::ConvWeight:
                for (auto& x : v) x = rng.normal() * 0.02;
                break;
            case ParamKind::NormScale:
                for (auto& x : v) x = 1.0 + rng.normal() * 0.02;
                break;
            case ParamKind::NormOffset:
            case ParamKind::Bias:
                std::fill(v.begin(), v.end(), 0.0);
                break;
        }
        p.grad->fill(0.0);
    }
}

}  // namespace skipgan
