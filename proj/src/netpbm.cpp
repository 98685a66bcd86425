#include "skipgan/netpbm.hpp"

#include <fstream>

#include "skipgan/errors.hpp"

namespace skipgan {

namespace {

// Reads the next header token, skipping whitespace and '#' comments.
std::string next_token(std::istream& in) {
    std::string token;
    int ch;
    while ((ch = in.get()) != EOF) {
        if (ch == '#') {
            while (ch != EOF && ch != '\n') ch = in.get();
            continue;
        }
        if (!std::isspace(ch)) {
            token.push_back(static_cast<char>(ch));
            while ((ch = in.peek()) != EOF && !std::isspace(ch)) token.push_back(static_cast<char>(in.get()));
            return token;
        }
    }
    return token;
}

int parse_positive(const std::string& token, const std::string& path, const char* field) {
    try {
        const int value = std::stoi(token);
        if (value <= 0) throw std::invalid_argument("non-positive");
        return value;
    } catch (const std::exception&) {
        throw DataError(std::string("bad ") + field + " in NetPBM header: " + path);
    }
}

}  // namespace

PnmImage read_pnm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open image file: " + path);

    const std::string magic = next_token(in);
    int channels;
    if (magic == "P5")
        channels = 1;
    else if (magic == "P6")
        channels = 3;
    else
        throw DataError("unsupported image format (want binary P5/P6): " + path);

    PnmImage image;
    image.channels = channels;
    image.width = parse_positive(next_token(in), path, "width");
    image.height = parse_positive(next_token(in), path, "height");
    const int maxval = parse_positive(next_token(in), path, "maxval");
    if (maxval != 255) throw DataError("only 8-bit NetPBM images are supported: " + path);
    in.get();  // single whitespace byte after maxval

    const std::size_t count =
        static_cast<std::size_t>(channels) * image.height * image.width;
    std::vector<std::uint8_t> interleaved(count);
    in.read(reinterpret_cast<char*>(interleaved.data()), static_cast<std::streamsize>(count));
    if (static_cast<std::size_t>(in.gcount()) != count)
        throw DataError("truncated NetPBM pixel data: " + path);

    // Interleaved rows on disk, planar channels in memory.
    image.bytes.resize(count);
    const std::size_t plane = static_cast<std::size_t>(image.height) * image.width;
    for (std::size_t p = 0; p < plane; ++p)
        for (int c = 0; c < channels; ++c)
            image.bytes[static_cast<std::size_t>(c) * plane + p] = interleaved[p * channels + c];
    return image;
}

void write_pnm(const std::string& path, const PnmImage& image) {
    if (image.channels != 1 && image.channels != 3)
        throw DataError("NetPBM writer supports 1 or 3 channels");
    const std::size_t plane = static_cast<std::size_t>(image.height) * image.width;
    if (image.bytes.size() != plane * static_cast<std::size_t>(image.channels))
        throw DataError("NetPBM byte count does not match dimensions");

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write image file: " + path);
    out << (image.channels == 1 ? "P5" : "P6") << "\n"
        << image.width << " " << image.height << "\n255\n";

    std::vector<std::uint8_t> interleaved(image.bytes.size());
    for (std::size_t p = 0; p < plane; ++p)
        for (int c = 0; c < image.channels; ++c)
            interleaved[p * image.channels + c] = image.bytes[static_cast<std::size_t>(c) * plane + p];
    out.write(reinterpret_cast<const char*>(interleaved.data()),
              static_cast<std::streamsize>(interleaved.size()));
    if (!out) throw IoError("failed writing image file: " + path);
}

}  // namespace skipgan
