#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace skipgan {

// 8-bit binary NetPBM raster: P5 (one channel) or P6 (three channels).
struct PnmImage {
    int channels = 0;
    int height = 0;
    int width = 0;
    std::vector<std::uint8_t> bytes;  // CHW order
};

PnmImage read_pnm(const std::string& path);
void write_pnm(const std::string& path, const PnmImage& image);

}  // namespace skipgan
