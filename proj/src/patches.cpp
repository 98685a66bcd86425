#include "skipgan/patches.hpp"

#include "skipgan/errors.hpp"

namespace skipgan {

std::vector<LabeledImage> extract_patches(const LabeledImage& image, int window, int stride) {
    if (window < 1) throw ConfigError("patch window must be >= 1");
    if (stride < 1) throw ConfigError("patch stride must be >= 1");
    if (window > image.height || window > image.width)
        throw DataError("patch window " + std::to_string(window) + " exceeds image " +
                        std::to_string(image.height) + "x" + std::to_string(image.width) + ": " +
                        image.origin);

    const int rows = (image.height - window) / stride + 1;
    const int cols = (image.width - window) / stride + 1;
    std::vector<LabeledImage> patches;
    patches.reserve(static_cast<std::size_t>(rows) * cols);

    for (int py = 0; py < rows; ++py) {
        for (int px = 0; px < cols; ++px) {
            const int y0 = py * stride;
            const int x0 = px * stride;
            std::vector<float> pixels(static_cast<std::size_t>(image.channels) * window * window);
            std::size_t k = 0;
            for (int c = 0; c < image.channels; ++c)
                for (int h = 0; h < window; ++h)
                    for (int w = 0; w < window; ++w) pixels[k++] = image.pixel(c, y0 + h, x0 + w);
            patches.push_back(make_image(std::move(pixels), image.channels, window, window,
                                         image.label,
                                         image.origin + "#y" + std::to_string(y0) + "x" +
                                             std::to_string(x0)));
        }
    }
    return patches;
}

}  // namespace skipgan
