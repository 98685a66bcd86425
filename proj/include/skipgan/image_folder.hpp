#pragma once

#include <string>

#include "skipgan/dataset.hpp"

namespace skipgan {

// Loads root/{train/normal, test/normal, test/abnormal}/*.pgm|*.ppm with
// labels assigned by folder and deterministic lexicographic file ordering.
// Pixel byte v maps to v / 127.5 - 1.
AnomalyDataset load_image_folder(const std::string& root);

// One folder of images with a fixed label; used by the loader above and by
// the patch-based ingestion path.
std::vector<LabeledImage> load_image_directory(const std::string& directory, int label);

}  // namespace skipgan
