#pragma once

#include <cstddef>
#include <vector>

namespace skipgan {

// Dense row-major tensor of doubles. Image batches use NCHW order.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(std::vector<int> shape);
    Tensor(std::vector<int> shape, std::vector<double> values);

    static Tensor zeros(std::vector<int> shape) { return Tensor(std::move(shape)); }
    static Tensor full(std::vector<int> shape, double value);

    const std::vector<int>& shape() const { return shape_; }
    int rank() const { return static_cast<int>(shape_.size()); }
    int dim(int axis) const { return shape_[static_cast<size_t>(axis)]; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }
    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    // NCHW accessors.
    double& at(int n, int c, int h, int w) {
        return data_[offset(n, c, h, w)];
    }
    double at(int n, int c, int h, int w) const {
        return data_[offset(n, c, h, w)];
    }

    void fill(double value);
    void zero() { fill(0.0); }
    bool all_finite() const;
    double min_value() const;
    double max_value() const;

    std::vector<double>& vec() { return data_; }
    const std::vector<double>& vec() const { return data_; }

private:
    std::size_t offset(int n, int c, int h, int w) const {
        const std::size_t C = static_cast<std::size_t>(shape_[1]);
        const std::size_t H = static_cast<std::size_t>(shape_[2]);
        const std::size_t W = static_cast<std::size_t>(shape_[3]);
        return ((static_cast<std::size_t>(n) * C + static_cast<std::size_t>(c)) * H +
                static_cast<std::size_t>(h)) *
                   W +
               static_cast<std::size_t>(w);
    }

    std::vector<int> shape_;
    std::vector<double> data_;
};

// Throws ShapeError unless both tensors have identical shapes.
void require_same_shape(const Tensor& a, const Tensor& b, const char* context);

}  // namespace skipgan
