#pragma once

#include <vector>

#include "skipgan/dataset.hpp"

namespace skipgan {

// Overlapping sliding-window patches at offsets {0, stride, 2*stride, ...}
// along each axis while the window fits; row-major offset order. Each patch
// inherits the source label. Patch count per axis is
// floor((dim - window) / stride) + 1.
std::vector<LabeledImage> extract_patches(const LabeledImage& image, int window, int stride);

}  // namespace skipgan
