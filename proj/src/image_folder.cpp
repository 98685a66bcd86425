#include "skipgan/image_folder.hpp"

#include <algorithm>
#include <filesystem>

#include "skipgan/errors.hpp"
#include "skipgan/netpbm.hpp"

namespace skipgan {

namespace fs = std::filesystem;

std::vector<LabeledImage> load_image_directory(const std::string& directory, int label) {
    const fs::path dir(directory);
    if (!fs::is_directory(dir)) throw IoError("missing dataset directory: " + directory);

    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        const std::string ext = entry.path().extension().string();
        if (ext == ".pgm" || ext == ".ppm") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end(),
              [](const fs::path& a, const fs::path& b) { return a.filename() < b.filename(); });

    std::vector<LabeledImage> images;
    images.reserve(files.size());
    for (const fs::path& file : files) {
        PnmImage pnm;
        try {
            pnm = read_pnm(file.string());
        } catch (const Error& e) {
            throw DataError("undecodable image " + file.string() + ": " + e.what());
        }
        std::vector<float> pixels(pnm.bytes.size());
        for (std::size_t i = 0; i < pixels.size(); ++i)
            pixels[i] = static_cast<float>(pnm.bytes[i]) / 127.5f - 1.0f;
        // Folder-qualified origin keeps ids unique across test subfolders.
        const std::string origin =
            file.parent_path().filename().string() + "/" + file.filename().string();
        images.push_back(
            make_image(std::move(pixels), pnm.channels, pnm.height, pnm.width, label, origin));
    }
    return images;
}

AnomalyDataset load_image_folder(const std::string& root) {
    const fs::path base(root);
    AnomalyDataset dataset;
    dataset.train =
        load_image_directory((base / "train" / "normal").string(), SplitSpec::normal_label);
    dataset.test =
        load_image_directory((base / "test" / "normal").string(), SplitSpec::normal_label);
    std::vector<LabeledImage> abnormal =
        load_image_directory((base / "test" / "abnormal").string(), SplitSpec::abnormal_label);
    dataset.test.insert(dataset.test.end(), std::make_move_iterator(abnormal.begin()),
                        std::make_move_iterator(abnormal.end()));

    if (dataset.train.empty()) throw DataError("train/normal has no images under " + root);
    dataset.validate();
    return dataset;
}

}  // namespace skipgan
