#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "skipgan/tensor.hpp"

namespace skipgan {

class Discriminator;
struct LabeledImage;

struct RocPoint {
    double fpr = 0.0;
    double tpr = 0.0;
    double threshold = 0.0;  // samples with score >= threshold are called abnormal
};

// Curve from sweeping the decision threshold over distinct score values,
// higher score meaning more anomalous. Ties share one threshold. Both
// coordinate sequences are non-decreasing and the endpoints (0,0), (1,1)
// are always present.
struct RocCurve {
    std::vector<RocPoint> points;
};

RocCurve roc_curve(std::span<const double> scores, std::span<const int> labels);

// Trapezoidal area under the ROC curve. Equals the Mann-Whitney statistic
// P(score_abnormal > score_normal) + 0.5 * P(tie).
double auc(std::span<const double> scores, std::span<const int> labels);

// Equal-width per-label bin counts over [0, 1]. Bins are left-closed,
// right-open; the final bin also includes 1.0.
struct Histogram {
    int n_bins = 0;
    std::vector<std::int64_t> normal;    // label 0
    std::vector<std::int64_t> abnormal;  // label 1
};

Histogram histogram(std::span<const double> scores, std::span<const int> labels, int n_bins);

// Flattened last-conv-block discriminator activations for each sample,
// with the ground-truth label. Inputs for external projection tools.
struct FeatureTable {
    std::vector<std::string> ids;
    std::vector<int> labels;
    Tensor features;  // (rows, feature_length)
};

// subsample == 0 keeps every sample; otherwise exactly min(subsample, N)
// rows are drawn uniformly without replacement, deterministically per seed.
FeatureTable export_features(const Discriminator& d, std::span<const LabeledImage> test_set,
                             std::size_t subsample = 0, std::uint64_t seed = 0,
                             int batch_size = 64);

struct EvalReport {
    double auc = 0.0;
    std::int64_t n_normal = 0;
    std::int64_t n_abnormal = 0;
    Histogram hist;
    std::string config_snapshot;  // JSON text of the producing configuration
};

EvalReport make_eval_report(std::span<const double> scaled_scores, std::span<const int> labels,
                            int n_bins, std::string config_snapshot);

std::string eval_report_to_json(const EvalReport& report);

void write_roc_csv(const std::string& path, const RocCurve& curve);
void write_histogram_csv(const std::string& path, const Histogram& hist);
void write_features_csv(const std::string& path, const FeatureTable& table);

}  // namespace skipgan
