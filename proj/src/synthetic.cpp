#include "skipgan/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>

#include "skipgan/errors.hpp"
#include "skipgan/netpbm.hpp"
#include "skipgan/rng.hpp"

namespace skipgan {

namespace {

// Stream offsets keep the field and the anomaly placement independent, so an
// abnormal image's field is reproducible without the rectangle.
constexpr std::uint64_t kTrainStream = 0x100000;
constexpr std::uint64_t kTestNormalStream = 0x200000;
constexpr std::uint64_t kTestAbnormalStream = 0x300000;
constexpr std::uint64_t kAnomalyStream = 0x400000;

std::uint64_t field_stream(SyntheticKind kind, int index) {
    switch (kind) {
        case SyntheticKind::TrainNormal: return kTrainStream + static_cast<std::uint64_t>(index);
        case SyntheticKind::TestNormal:
            return kTestNormalStream + static_cast<std::uint64_t>(index);
        case SyntheticKind::TestAbnormal:
            return kTestAbnormalStream + static_cast<std::uint64_t>(index);
    }
    throw ConfigError("unknown synthetic kind");
}

std::uint8_t quantize(double v) {
    double q = std::lround((v + 1.0) * 127.5);
    if (q < 0) q = 0;
    if (q > 255) q = 255;
    return static_cast<std::uint8_t>(q);
}

// Smooth field: a few Gaussian bumps, rescaled so the largest magnitude is
// 0.85. The cap keeps blob pixels strictly away from the checkerboard's
// extremes, so the anomaly differs from the field at every rectangle pixel
// even after quantization.
std::vector<double> blob_field(const SyntheticSpec& spec, Rng& rng) {
    const int s = spec.image_size;
    std::vector<double> field(static_cast<std::size_t>(spec.channels) * s * s, 0.0);
    for (int c = 0; c < spec.channels; ++c) {
        double* plane = field.data() + static_cast<std::size_t>(c) * s * s;
        for (int b = 0; b < spec.n_blobs; ++b) {
            const double cx = rng.uniform(0.0, s);
            const double cy = rng.uniform(0.0, s);
            const double sigma = rng.uniform(s / 8.0, s / 4.0);
            const double amp = (rng.uniform() < 0.5 ? -1.0 : 1.0) * rng.uniform(0.5, 1.0);
            const double inv = 1.0 / (2.0 * sigma * sigma);
            for (int y = 0; y < s; ++y)
                for (int x = 0; x < s; ++x) {
                    const double dx = x - cx, dy = y - cy;
                    plane[y * s + x] += amp * std::exp(-(dx * dx + dy * dy) * inv);
                }
        }
    }
    double peak = 0.0;
    for (double v : field) peak = std::max(peak, std::abs(v));
    if (peak > 0.0)
        for (double& v : field) v *= 0.85 / peak;
    return field;
}

void burn_rectangle(const SyntheticSpec& spec, Rng& rng, std::vector<double>& field) {
    const int s = spec.image_size;
    const int w = spec.rect_min +
                  static_cast<int>(rng.below(static_cast<std::uint64_t>(
                      spec.rect_max - spec.rect_min + 1)));
    const int h = spec.rect_min +
                  static_cast<int>(rng.below(static_cast<std::uint64_t>(
                      spec.rect_max - spec.rect_min + 1)));
    // Strictly inside: at least one untouched pixel on every side.
    const int x0 = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(s - w - 1)));
    const int y0 = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(s - h - 1)));
    for (int c = 0; c < spec.channels; ++c) {
        double* plane = field.data() + static_cast<std::size_t>(c) * s * s;
        for (int y = y0; y < y0 + h; ++y)
            for (int x = x0; x < x0 + w; ++x)
                plane[y * s + x] = ((x + y) % 2 == 0) ? 1.0 : -1.0;
    }
}

std::vector<std::uint8_t> quantize_field(const std::vector<double>& field) {
    std::vector<std::uint8_t> bytes(field.size());
    for (std::size_t i = 0; i < field.size(); ++i) bytes[i] = quantize(field[i]);
    return bytes;
}

LabeledImage image_from_bytes(const SyntheticSpec& spec, const std::vector<std::uint8_t>& bytes,
                              int label, std::string origin) {
    std::vector<float> pixels(bytes.size());
    for (std::size_t i = 0; i < bytes.size(); ++i)
        pixels[i] = static_cast<float>(bytes[i]) / 127.5f - 1.0f;
    return make_image(std::move(pixels), spec.channels, spec.image_size, spec.image_size, label,
                      std::move(origin));
}

std::string index_name(const char* stem, int index, const char* ext) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%s_%05d.%s", stem, index, ext);
    return buf;
}

}  // namespace

void SyntheticSpec::validate() const {
    if (image_size < 8) throw ConfigError("synthetic image_size must be at least 8");
    if (channels != 1 && channels != 3)
        throw ConfigError("synthetic channels must be 1 or 3");
    if (n_train < 1 || n_test_normal < 1 || n_test_abnormal < 1)
        throw ConfigError("synthetic counts must be positive");
    if (n_blobs < 1) throw ConfigError("synthetic n_blobs must be positive");
    if (rect_min < 2 || rect_min > rect_max)
        throw ConfigError("synthetic rectangle range is invalid");
    if (rect_max > image_size - 2)
        throw ConfigError("synthetic rectangle must fit strictly inside the image");
}

std::vector<std::uint8_t> synthetic_field(const SyntheticSpec& spec, SyntheticKind kind,
                                          int index) {
    spec.validate();
    Rng rng(mix_seed(spec.seed, field_stream(kind, index)));
    return quantize_field(blob_field(spec, rng));
}

std::vector<std::uint8_t> synthetic_image(const SyntheticSpec& spec, SyntheticKind kind,
                                          int index) {
    spec.validate();
    Rng rng(mix_seed(spec.seed, field_stream(kind, index)));
    std::vector<double> field = blob_field(spec, rng);
    if (kind == SyntheticKind::TestAbnormal) {
        Rng anomaly_rng(mix_seed(spec.seed, kAnomalyStream + static_cast<std::uint64_t>(index)));
        burn_rectangle(spec, anomaly_rng, field);
    }
    return quantize_field(field);
}

AnomalyDataset generate_synthetic_dataset(const SyntheticSpec& spec) {
    spec.validate();
    AnomalyDataset dataset;
    dataset.train.reserve(static_cast<std::size_t>(spec.n_train));
    for (int i = 0; i < spec.n_train; ++i)
        dataset.train.push_back(image_from_bytes(
            spec, synthetic_image(spec, SyntheticKind::TrainNormal, i), 0,
            "train-normal-" + std::to_string(i)));
    for (int i = 0; i < spec.n_test_normal; ++i)
        dataset.test.push_back(image_from_bytes(
            spec, synthetic_image(spec, SyntheticKind::TestNormal, i), 0,
            "test-normal-" + std::to_string(i)));
    for (int i = 0; i < spec.n_test_abnormal; ++i)
        dataset.test.push_back(image_from_bytes(
            spec, synthetic_image(spec, SyntheticKind::TestAbnormal, i), 1,
            "test-abnormal-" + std::to_string(i)));
    dataset.validate();
    return dataset;
}

void generate_synthetic(const SyntheticSpec& spec, const std::string& out_dir) {
    spec.validate();
    namespace fs = std::filesystem;
    const char* ext = spec.channels == 1 ? "pgm" : "ppm";

    std::error_code ec;
    fs::create_directories(fs::path(out_dir) / "train" / "normal", ec);
    fs::create_directories(fs::path(out_dir) / "test" / "normal", ec);
    fs::create_directories(fs::path(out_dir) / "test" / "abnormal", ec);
    if (ec) throw IoError("cannot create output directory '" + out_dir + "': " + ec.message());

    auto write_one = [&](const fs::path& dir, const char* stem, int index,
                         std::vector<std::uint8_t> bytes) {
        PnmImage image;
        image.channels = spec.channels;
        image.height = spec.image_size;
        image.width = spec.image_size;
        image.bytes = std::move(bytes);
        write_pnm((dir / index_name(stem, index, ext)).string(), image);
    };

    for (int i = 0; i < spec.n_train; ++i)
        write_one(fs::path(out_dir) / "train" / "normal", "img", i,
                  synthetic_image(spec, SyntheticKind::TrainNormal, i));
    for (int i = 0; i < spec.n_test_normal; ++i)
        write_one(fs::path(out_dir) / "test" / "normal", "img", i,
                  synthetic_image(spec, SyntheticKind::TestNormal, i));
    for (int i = 0; i < spec.n_test_abnormal; ++i)
        write_one(fs::path(out_dir) / "test" / "abnormal", "img", i,
                  synthetic_image(spec, SyntheticKind::TestAbnormal, i));
}

}  // namespace skipgan
