#include "skipgan/cifar10.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

#include "skipgan/errors.hpp"

namespace skipgan {

namespace {

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file: " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return bytes;
}

}  // namespace

std::vector<LabeledImage> parse_cifar10_binary(std::span<const std::uint8_t> raw_bytes,
                                               const std::string& origin_prefix) {
    if (raw_bytes.size() % kCifarRecordBytes != 0)
        throw DataError("CIFAR-10 blob size " + std::to_string(raw_bytes.size()) +
                        " is not a multiple of " + std::to_string(kCifarRecordBytes));
    const std::size_t count = raw_bytes.size() / kCifarRecordBytes;
    std::vector<LabeledImage> images;
    images.reserve(count);

    constexpr std::size_t pixel_bytes = kCifarRecordBytes - 1;
    for (std::size_t r = 0; r < count; ++r) {
        const std::uint8_t* rec = raw_bytes.data() + r * kCifarRecordBytes;
        const int label = rec[0];
        if (label >= kCifarClassCount)
            throw DataError("CIFAR-10 record " + std::to_string(r) + " has invalid label " +
                            std::to_string(label));
        std::vector<float> pixels(pixel_bytes);
        for (std::size_t i = 0; i < pixel_bytes; ++i)
            pixels[i] = static_cast<float>(rec[1 + i]) / 127.5f - 1.0f;
        images.push_back(make_image(std::move(pixels), kCifarChannels, kCifarSide, kCifarSide,
                                    label, origin_prefix + "#" + std::to_string(r)));
    }
    return images;
}

std::vector<std::uint8_t> encode_cifar10_binary(std::span<const LabeledImage> images) {
    std::vector<std::uint8_t> bytes;
    bytes.reserve(images.size() * kCifarRecordBytes);
    for (const LabeledImage& im : images) {
        if (im.channels != kCifarChannels || im.height != kCifarSide || im.width != kCifarSide)
            throw DataError("image is not in CIFAR geometry: " + im.origin);
        if (im.label < 0 || im.label >= kCifarClassCount)
            throw DataError("label out of CIFAR range: " + im.origin);
        bytes.push_back(static_cast<std::uint8_t>(im.label));
        for (float v : *im.pixels) {
            const float byte = std::round((v + 1.0f) * 127.5f);
            bytes.push_back(static_cast<std::uint8_t>(std::min(255.0f, std::max(0.0f, byte))));
        }
    }
    return bytes;
}

Cifar10Archive load_cifar10_archive(const std::string& directory) {
    namespace fs = std::filesystem;
    const fs::path root(directory);
    if (!fs::is_directory(root)) throw IoError("CIFAR-10 directory not found: " + directory);

    Cifar10Archive archive;
    for (int b = 1; b <= 5; ++b) {
        const std::string name = "data_batch_" + std::to_string(b) + ".bin";
        std::vector<std::uint8_t> bytes = read_file_bytes(root / name);
        std::vector<LabeledImage> part = parse_cifar10_binary(bytes, name);
        archive.train.insert(archive.train.end(), std::make_move_iterator(part.begin()),
                             std::make_move_iterator(part.end()));
    }
    std::vector<std::uint8_t> bytes = read_file_bytes(root / "test_batch.bin");
    archive.test = parse_cifar10_binary(bytes, "test_batch.bin");
    return archive;
}

}  // namespace skipgan
