#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "skipgan/tensor.hpp"

namespace skipgan {

// One image with its class label. Pixels are CHW, scaled to [-1, 1], stored
// as floats behind a shared immutable buffer so copies are cheap and whole
// datasets can be sliced without duplicating pixel data.
struct LabeledImage {
    std::shared_ptr<const std::vector<float>> pixels;
    int channels = 0;
    int height = 0;
    int width = 0;
    int label = 0;
    std::string origin;

    float pixel(int c, int h, int w) const {
        return (*pixels)[(static_cast<std::size_t>(c) * height + h) * width + w];
    }
    std::size_t pixel_count() const { return pixels ? pixels->size() : 0; }
};

LabeledImage make_image(std::vector<float> pixels, int channels, int height, int width, int label,
                        std::string origin);

// Leave-one-class-out split request. Binary labels in the produced dataset:
// 0 = normal, 1 = abnormal.
struct SplitSpec {
    int anomalous_class = 0;
    std::uint64_t seed = 0;
    static constexpr int normal_label = 0;
    static constexpr int abnormal_label = 1;
};

// Train split holds normals only; test split holds both binary labels.
struct AnomalyDataset {
    std::vector<LabeledImage> train;
    std::vector<LabeledImage> test;

    std::int64_t test_normal_count() const;
    std::int64_t test_abnormal_count() const;
    // Throws unless train has no abnormal sample and test has both labels.
    void validate() const;
    // Normal-heavy imbalance expected of the standard protocols:
    // |train| >= |test abnormal|.
    void validate_imbalance() const;
};

// One-vs-rest protocol: train keeps train-source images of the normal
// classes (relabeled 0); test keeps test-source images of the normal
// classes (label 0) plus every image of the anomalous class from both
// sources (label 1).
AnomalyDataset make_one_class_out_split(std::span<const LabeledImage> train_source,
                                        std::span<const LabeledImage> test_source,
                                        const SplitSpec& spec);

struct Batch {
    Tensor images;             // (N, C, H, W)
    std::vector<int> labels;   // per sample
    std::vector<int> indices;  // positions within the source split
};

enum class BatchMode {
    Training,  // final short batch dropped
    Scoring,   // every sample emitted exactly once
};

// Deterministic pass over one dataset split. With a shuffle seed the order
// is a pure function of the seed; without one, source order is kept.
class BatchIterator {
public:
    BatchIterator(std::span<const LabeledImage> samples, int batch_size, BatchMode mode,
                  std::optional<std::uint64_t> shuffle_seed = std::nullopt);

    // Returns false once the pass is complete.
    bool next(Batch& out);
    std::size_t batch_count() const;

private:
    std::span<const LabeledImage> samples_;
    std::vector<std::size_t> order_;
    std::size_t cursor_ = 0;
    int batch_size_;
    BatchMode mode_;
};

// Copies one image into row n of a preallocated NCHW tensor.
void copy_image_into(const LabeledImage& image, Tensor& batch, int n);

// Single image as a batch of one.
Tensor image_to_tensor(const LabeledImage& image);

}  // namespace skipgan
