#include "skipgan/dataset.hpp"

#include <algorithm>

#include "skipgan/errors.hpp"
#include "skipgan/rng.hpp"

namespace skipgan {

LabeledImage make_image(std::vector<float> pixels, int channels, int height, int width, int label,
                        std::string origin) {
    if (channels <= 0 || height <= 0 || width <= 0)
        throw DataError("image dimensions must be positive");
    if (pixels.size() !=
        static_cast<std::size_t>(channels) * static_cast<std::size_t>(height) *
            static_cast<std::size_t>(width))
        throw DataError("pixel count does not match image dimensions: " + origin);
    LabeledImage image;
    image.pixels = std::make_shared<const std::vector<float>>(std::move(pixels));
    image.channels = channels;
    image.height = height;
    image.width = width;
    image.label = label;
    image.origin = std::move(origin);
    return image;
}

std::int64_t AnomalyDataset::test_normal_count() const {
    return std::count_if(test.begin(), test.end(),
                         [](const LabeledImage& im) { return im.label == SplitSpec::normal_label; });
}

std::int64_t AnomalyDataset::test_abnormal_count() const {
    return std::count_if(test.begin(), test.end(), [](const LabeledImage& im) {
        return im.label == SplitSpec::abnormal_label;
    });
}

void AnomalyDataset::validate() const {
    for (const LabeledImage& im : train)
        if (im.label != SplitSpec::normal_label)
            throw DataError("train split contains an abnormal sample: " + im.origin);
    const std::int64_t normals = test_normal_count();
    const std::int64_t abnormals = test_abnormal_count();
    if (normals == 0 || abnormals == 0)
        throw DataError("test split must contain both normal and abnormal samples");
}

void AnomalyDataset::validate_imbalance() const {
    if (static_cast<std::int64_t>(train.size()) < test_abnormal_count())
        throw DataError("train split is smaller than the abnormal test count");
}

AnomalyDataset make_one_class_out_split(std::span<const LabeledImage> train_source,
                                        std::span<const LabeledImage> test_source,
                                        const SplitSpec& spec) {
    bool class_seen = false;
    AnomalyDataset out;
    out.train.reserve(train_source.size());
    out.test.reserve(test_source.size());

    for (const LabeledImage& im : train_source) {
        LabeledImage copy = im;
        if (im.label == spec.anomalous_class) {
            class_seen = true;
            copy.label = SplitSpec::abnormal_label;
            out.test.push_back(std::move(copy));
        } else {
            copy.label = SplitSpec::normal_label;
            out.train.push_back(std::move(copy));
        }
    }
    for (const LabeledImage& im : test_source) {
        LabeledImage copy = im;
        if (im.label == spec.anomalous_class) {
            class_seen = true;
            copy.label = SplitSpec::abnormal_label;
        } else {
            copy.label = SplitSpec::normal_label;
        }
        out.test.push_back(std::move(copy));
    }

    if (!class_seen)
        throw DataError("anomalous class " + std::to_string(spec.anomalous_class) +
                        " not present in the dataset");
    out.validate();
    return out;
}

BatchIterator::BatchIterator(std::span<const LabeledImage> samples, int batch_size, BatchMode mode,
                             std::optional<std::uint64_t> shuffle_seed)
    : samples_(samples), batch_size_(batch_size), mode_(mode) {
    if (batch_size < 1) throw ConfigError("batch size must be >= 1");
    order_.resize(samples.size());
    for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = i;
    if (shuffle_seed) {
        Rng rng(*shuffle_seed);
        rng.shuffle(order_);
    }
}

std::size_t BatchIterator::batch_count() const {
    const std::size_t n = order_.size();
    const std::size_t b = static_cast<std::size_t>(batch_size_);
    return mode_ == BatchMode::Training ? n / b : (n + b - 1) / b;
}

bool BatchIterator::next(Batch& out) {
    const std::size_t remaining = order_.size() - cursor_;
    const std::size_t b = static_cast<std::size_t>(batch_size_);
    std::size_t take = std::min(remaining, b);
    if (mode_ == BatchMode::Training && take < b) take = 0;
    if (take == 0) return false;

    const LabeledImage& first = samples_[order_[cursor_]];
    out.images = Tensor({static_cast<int>(take), first.channels, first.height, first.width});
    out.labels.resize(take);
    out.indices.resize(take);
    for (std::size_t i = 0; i < take; ++i) {
        const std::size_t idx = order_[cursor_ + i];
        const LabeledImage& im = samples_[idx];
        if (im.channels != first.channels || im.height != first.height || im.width != first.width)
            throw ShapeError("batch mixes image sizes: " + im.origin);
        copy_image_into(im, out.images, static_cast<int>(i));
        out.labels[i] = im.label;
        out.indices[i] = static_cast<int>(idx);
    }
    cursor_ += take;
    return true;
}

void copy_image_into(const LabeledImage& image, Tensor& batch, int n) {
    const std::size_t count = image.pixel_count();
    double* dst = batch.data() + static_cast<std::size_t>(n) * count;
    const std::vector<float>& src = *image.pixels;
    for (std::size_t i = 0; i < count; ++i) dst[i] = static_cast<double>(src[i]);
}

Tensor image_to_tensor(const LabeledImage& image) {
    Tensor t({1, image.channels, image.height, image.width});
    copy_image_into(image, t, 0);
    return t;
}

}  // namespace skipgan
