#pragma once

#include <span>
#include <string>
#include <vector>

#include "skipgan/dataset.hpp"
#include "skipgan/discriminator.hpp"
#include "skipgan/generator.hpp"
#include "skipgan/losses.hpp"

namespace skipgan {

struct ScoreConfig {
    double lambda_score = 0.9;  // weight on the reconstruction score R
    LatentNorm latent_norm = LatentNorm::Mse;
    void validate() const;
    bool operator==(const ScoreConfig&) const = default;
};

struct ScoredSample {
    std::string id;
    int label = 0;       // 0 normal, 1 abnormal
    double R = 0.0;      // reconstruction score (mean absolute error)
    double L = 0.0;      // latent score (feature discrepancy)
    double A = 0.0;      // combined score
    double A_hat = 0.0;  // min-max scaled over the full test set
};

// R and L for one image, both per-element means (R over pixels, L over
// feature entries), evaluation mode.
struct SampleScore {
    double R = 0.0;
    double L = 0.0;
};
SampleScore score_sample(const Generator& g, const Discriminator& d, const LabeledImage& image,
                         const ScoreConfig& cfg = {});

double combine_score(double R, double L, const ScoreConfig& cfg);

// Min-max scaling to [0, 1]; a constant vector maps to all zeros.
std::vector<double> scale_scores(const std::vector<double>& scores);

std::vector<ScoredSample> score_dataset(const Generator& g, const Discriminator& d,
                                        std::span<const LabeledImage> test,
                                        const ScoreConfig& cfg, int batch_size = 64);

// Delimited text, header "id,label,R,L,A,A_hat", one row per sample,
// doubles rendered so they read back exactly.
void write_scores_csv(const std::vector<ScoredSample>& samples, const std::string& path);
std::vector<ScoredSample> read_scores_csv(const std::string& path);

}  // namespace skipgan
