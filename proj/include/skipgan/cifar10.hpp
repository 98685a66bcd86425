#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "skipgan/dataset.hpp"

namespace skipgan {

inline constexpr int kCifarSide = 32;
inline constexpr int kCifarChannels = 3;
inline constexpr std::size_t kCifarRecordBytes = 3073;  // 1 label + 3 * 32 * 32 pixels
inline constexpr int kCifarClassCount = 10;

// Parses concatenated 3073-byte CIFAR-10 records: one label byte followed by
// 3072 pixel bytes, plane-major R,G,B, row-major within each plane. Pixel
// byte v maps to v / 127.5 - 1. `origin_prefix` seeds per-record origins as
// "<prefix>#<index>".
std::vector<LabeledImage> parse_cifar10_binary(std::span<const std::uint8_t> raw_bytes,
                                               const std::string& origin_prefix = "cifar");

// Inverse of parse_cifar10_binary for images already in CIFAR geometry.
std::vector<std::uint8_t> encode_cifar10_binary(std::span<const LabeledImage> images);

// Reads data_batch_1..5.bin and test_batch.bin from a directory.
struct Cifar10Archive {
    std::vector<LabeledImage> train;
    std::vector<LabeledImage> test;
};
Cifar10Archive load_cifar10_archive(const std::string& directory);

}  // namespace skipgan
