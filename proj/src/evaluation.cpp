#include "skipgan/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>

#include <json.hpp>

#include "skipgan/dataset.hpp"
#include "skipgan/discriminator.hpp"
#include "skipgan/errors.hpp"
#include "skipgan/rng.hpp"

namespace skipgan {

namespace {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void check_score_labels(std::span<const double> scores, std::span<const int> labels) {
    if (scores.size() != labels.size())
        throw DataError("scores and labels must have equal length");
    if (scores.empty()) throw DataError("cannot evaluate an empty score vector");
    std::int64_t pos = 0, neg = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] != 0 && labels[i] != 1) throw DataError("labels must be 0 or 1");
        if (!std::isfinite(scores[i])) throw DataError("scores must be finite");
        (labels[i] == 1 ? pos : neg) += 1;
    }
    if (pos == 0 || neg == 0)
        throw DataError("both labels must be present to compute a ROC curve");
}

}  // namespace

RocCurve roc_curve(std::span<const double> scores, std::span<const int> labels) {
    check_score_labels(scores, labels);
    const std::int64_t p =
        std::count(labels.begin(), labels.end(), 1);
    const std::int64_t n = static_cast<std::int64_t>(labels.size()) - p;

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0u);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return a < b;
    });

    RocCurve curve;
    curve.points.push_back({0.0, 0.0, std::numeric_limits<double>::infinity()});
    std::int64_t tp = 0, fp = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        const double value = scores[order[i]];
        while (i < order.size() && scores[order[i]] == value) {
            (labels[order[i]] == 1 ? tp : fp) += 1;
            ++i;
        }
        curve.points.push_back({static_cast<double>(fp) / static_cast<double>(n),
                                static_cast<double>(tp) / static_cast<double>(p), value});
    }
    return curve;
}

double auc(std::span<const double> scores, std::span<const int> labels) {
    const RocCurve curve = roc_curve(scores, labels);
    double area = 0.0;
    for (std::size_t k = 1; k < curve.points.size(); ++k) {
        const auto& a = curve.points[k - 1];
        const auto& b = curve.points[k];
        area += (b.fpr - a.fpr) * (b.tpr + a.tpr) * 0.5;
    }
    return area;
}

Histogram histogram(std::span<const double> scores, std::span<const int> labels, int n_bins) {
    if (n_bins < 1) throw ConfigError("histogram needs at least one bin");
    if (scores.size() != labels.size())
        throw DataError("scores and labels must have equal length");
    Histogram hist;
    hist.n_bins = n_bins;
    hist.normal.assign(static_cast<std::size_t>(n_bins), 0);
    hist.abnormal.assign(static_cast<std::size_t>(n_bins), 0);
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (labels[i] != 0 && labels[i] != 1) throw DataError("labels must be 0 or 1");
        const double s = scores[i];
        if (!(s >= 0.0 && s <= 1.0))
            throw DataError("histogram scores must lie in [0, 1]; got " + format_double(s));
        int bin = static_cast<int>(s * n_bins);
        if (bin >= n_bins) bin = n_bins - 1;  // score exactly 1.0
        auto& counts = labels[i] == 1 ? hist.abnormal : hist.normal;
        counts[static_cast<std::size_t>(bin)] += 1;
    }
    return hist;
}

FeatureTable export_features(const Discriminator& d, std::span<const LabeledImage> test_set,
                             std::size_t subsample, std::uint64_t seed, int batch_size) {
    std::vector<LabeledImage> subset;
    if (subsample > 0 && subsample < test_set.size()) {
        std::vector<std::size_t> indices(test_set.size());
        std::iota(indices.begin(), indices.end(), 0u);
        Rng rng(seed);
        rng.shuffle(indices);
        indices.resize(subsample);
        std::sort(indices.begin(), indices.end());
        subset.reserve(subsample);
        for (std::size_t idx : indices) subset.push_back(test_set[idx]);
    } else {
        subset.assign(test_set.begin(), test_set.end());
    }

    FeatureTable table;
    const std::size_t rows = subset.size();
    table.ids.reserve(rows);
    table.labels.reserve(rows);
    table.features = Tensor({static_cast<int>(rows), d.feature_length()});

    BatchIterator batches(subset, batch_size, BatchMode::Scoring, std::nullopt);
    Batch batch;
    std::size_t row = 0;
    while (batches.next(batch)) {
        DiscOutput out = d.forward_eval(batch.images);
        const std::size_t width = static_cast<std::size_t>(d.feature_length());
        for (std::size_t s = 0; s < batch.indices.size(); ++s, ++row) {
            const auto& src = subset[batch.indices[s]];
            table.ids.push_back(src.origin.empty() ? "sample-" + std::to_string(batch.indices[s])
                                                   : src.origin);
            table.labels.push_back(src.label);
            std::copy(out.features.vec().begin() + static_cast<std::ptrdiff_t>(s * width),
                      out.features.vec().begin() + static_cast<std::ptrdiff_t>((s + 1) * width),
                      table.features.vec().begin() + static_cast<std::ptrdiff_t>(row * width));
        }
    }
    return table;
}

EvalReport make_eval_report(std::span<const double> scaled_scores, std::span<const int> labels,
                            int n_bins, std::string config_snapshot) {
    EvalReport report;
    report.auc = auc(scaled_scores, labels);
    report.n_normal = std::count(labels.begin(), labels.end(), 0);
    report.n_abnormal = std::count(labels.begin(), labels.end(), 1);
    report.hist = histogram(scaled_scores, labels, n_bins);
    report.config_snapshot = std::move(config_snapshot);
    return report;
}

std::string eval_report_to_json(const EvalReport& report) {
    nlohmann::json j;
    j["auc"] = report.auc;
    j["n_normal"] = report.n_normal;
    j["n_abnormal"] = report.n_abnormal;
    j["histogram"] = {{"n_bins", report.hist.n_bins},
                      {"normal", report.hist.normal},
                      {"abnormal", report.hist.abnormal}};
    if (!report.config_snapshot.empty()) {
        nlohmann::json cfg = nlohmann::json::parse(report.config_snapshot, nullptr, false);
        j["config"] = cfg.is_discarded() ? nlohmann::json(report.config_snapshot) : cfg;
    }
    return j.dump(2);
}

void write_roc_csv(const std::string& path, const RocCurve& curve) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write ROC file '" + path + "'");
    out << "fpr,tpr,threshold\n";
    for (const auto& p : curve.points)
        out << format_double(p.fpr) << ',' << format_double(p.tpr) << ','
            << format_double(p.threshold) << '\n';
    if (!out) throw IoError("failed while writing ROC file '" + path + "'");
}

void write_histogram_csv(const std::string& path, const Histogram& hist) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write histogram file '" + path + "'");
    out << "bin_lo,bin_hi,normal,abnormal\n";
    for (int b = 0; b < hist.n_bins; ++b) {
        const double lo = static_cast<double>(b) / hist.n_bins;
        const double hi = static_cast<double>(b + 1) / hist.n_bins;
        out << format_double(lo) << ',' << format_double(hi) << ','
            << hist.normal[static_cast<std::size_t>(b)] << ','
            << hist.abnormal[static_cast<std::size_t>(b)] << '\n';
    }
    if (!out) throw IoError("failed while writing histogram file '" + path + "'");
}

void write_features_csv(const std::string& path, const FeatureTable& table) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write features file '" + path + "'");
    const int width = table.features.rank() == 2 ? table.features.dim(1) : 0;
    out << "id,label";
    for (int f = 0; f < width; ++f) out << ",f" << f;
    out << '\n';
    for (std::size_t r = 0; r < table.ids.size(); ++r) {
        out << table.ids[r] << ',' << table.labels[r];
        for (int f = 0; f < width; ++f)
            out << ',' << format_double(table.features.vec()[r * static_cast<std::size_t>(width) +
                                                             static_cast<std::size_t>(f)]);
        out << '\n';
    }
    if (!out) throw IoError("failed while writing features file '" + path + "'");
}

}  // namespace skipgan
