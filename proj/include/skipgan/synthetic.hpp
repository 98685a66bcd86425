#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "skipgan/dataset.hpp"

namespace skipgan {

// Seeded toy data: normals are smooth random blob fields; abnormals are the
// same kind of field with a high-contrast checkerboard rectangle burned in.
// Pixels are quantized to 8 bits so the in-memory dataset is identical to
// one written to disk and read back.
struct SyntheticSpec {
    int image_size = 32;
    int channels = 1;
    int n_train = 256;
    int n_test_normal = 64;
    int n_test_abnormal = 64;
    int n_blobs = 6;       // Gaussian bumps per channel
    int rect_min = 8;      // anomaly rectangle side, inclusive range
    int rect_max = 12;
    std::uint64_t seed = 0;

    void validate() const;
    bool operator==(const SyntheticSpec&) const = default;
};

enum class SyntheticKind { TrainNormal, TestNormal, TestAbnormal };

// Quantized pixel plane(s) for one image, channel-major, values 0..255.
// For TestAbnormal, the counterpart normal image (same index, same field,
// no rectangle) is what synthetic_field would produce alone.
std::vector<std::uint8_t> synthetic_image(const SyntheticSpec& spec, SyntheticKind kind,
                                          int index);

// The blob field for (kind, index) without any anomaly, quantized.
std::vector<std::uint8_t> synthetic_field(const SyntheticSpec& spec, SyntheticKind kind,
                                          int index);

// Everything in memory; train normals plus a labeled test split.
AnomalyDataset generate_synthetic_dataset(const SyntheticSpec& spec);

// Writes the image-folder layout (train/normal, test/normal, test/abnormal)
// as binary PGM/PPM files; output is a pure function of the spec fields.
void generate_synthetic(const SyntheticSpec& spec, const std::string& out_dir);

}  // namespace skipgan
