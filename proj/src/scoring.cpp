#include "skipgan/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "skipgan/errors.hpp"

namespace skipgan {

namespace {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// Per-sample scores for an aligned (x, x_hat, f_x, f_xhat) batch.
void batch_scores(const Tensor& x, const Tensor& x_hat, const Tensor& f_x, const Tensor& f_xhat,
                  LatentNorm norm, std::vector<SampleScore>& out) {
    const int n = x.dim(0);
    const std::size_t pixels = x.size() / static_cast<std::size_t>(n);
    const std::size_t feats = f_x.size() / static_cast<std::size_t>(n);
    out.resize(static_cast<std::size_t>(n));
    for (int s = 0; s < n; ++s) {
        double r = 0.0;
        for (std::size_t i = 0; i < pixels; ++i) {
            const std::size_t k = s * pixels + i;
            r += std::abs(x.vec()[k] - x_hat.vec()[k]);
        }
        double l = 0.0;
        for (std::size_t i = 0; i < feats; ++i) {
            const std::size_t k = s * feats + i;
            const double d = f_x.vec()[k] - f_xhat.vec()[k];
            l += d * d;
        }
        out[static_cast<std::size_t>(s)].R = r / static_cast<double>(pixels);
        out[static_cast<std::size_t>(s)].L =
            norm == LatentNorm::Mse ? l / static_cast<double>(feats) : std::sqrt(l);
    }
}

}  // namespace

void ScoreConfig::validate() const {
    if (lambda_score < 0.0 || lambda_score > 1.0)
        throw ConfigError("lambda_score must lie in [0, 1]");
}

SampleScore score_sample(const Generator& g, const Discriminator& d, const LabeledImage& image,
                         const ScoreConfig& cfg) {
    cfg.validate();
    Tensor x = image_to_tensor(image);
    Tensor x_hat = g.reconstruct(x);
    DiscOutput fx = d.forward_eval(x);
    DiscOutput fxh = d.forward_eval(x_hat);
    std::vector<SampleScore> scores;
    batch_scores(x, x_hat, fx.features, fxh.features, cfg.latent_norm, scores);
    return scores.front();
}

double combine_score(double R, double L, const ScoreConfig& cfg) {
    cfg.validate();
    return cfg.lambda_score * R + (1.0 - cfg.lambda_score) * L;
}

std::vector<double> scale_scores(const std::vector<double>& scores) {
    if (scores.empty()) throw DataError("cannot scale an empty score vector");
    const auto [lo_it, hi_it] = std::minmax_element(scores.begin(), scores.end());
    const double lo = *lo_it, hi = *hi_it;
    std::vector<double> scaled(scores.size(), 0.0);
    if (hi == lo) return scaled;  // degenerate: every score identical
    for (std::size_t i = 0; i < scores.size(); ++i) scaled[i] = (scores[i] - lo) / (hi - lo);
    return scaled;
}

std::vector<ScoredSample> score_dataset(const Generator& g, const Discriminator& d,
                                        std::span<const LabeledImage> test,
                                        const ScoreConfig& cfg, int batch_size) {
    cfg.validate();
    if (test.empty()) throw DataError("cannot score an empty test set");

    std::vector<ScoredSample> samples;
    samples.reserve(test.size());

    BatchIterator batches(test, batch_size, BatchMode::Scoring, std::nullopt);
    Batch batch;
    std::vector<SampleScore> scores;
    while (batches.next(batch)) {
        Tensor x_hat = g.reconstruct(batch.images);
        DiscOutput fx = d.forward_eval(batch.images);
        DiscOutput fxh = d.forward_eval(x_hat);
        batch_scores(batch.images, x_hat, fx.features, fxh.features, cfg.latent_norm, scores);
        for (std::size_t s = 0; s < scores.size(); ++s) {
            const auto& src = test[batch.indices[s]];
            ScoredSample record;
            record.id = src.origin.empty() ? "sample-" + std::to_string(batch.indices[s])
                                           : src.origin;
            record.label = src.label;
            record.R = scores[s].R;
            record.L = scores[s].L;
            record.A = combine_score(record.R, record.L, cfg);
            samples.push_back(std::move(record));
        }
    }

    std::vector<double> raw(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) raw[i] = samples[i].A;
    const std::vector<double> scaled = scale_scores(raw);
    for (std::size_t i = 0; i < samples.size(); ++i) samples[i].A_hat = scaled[i];
    return samples;
}

void write_scores_csv(const std::vector<ScoredSample>& samples, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write scores file '" + path + "'");
    out << "id,label,R,L,A,A_hat\n";
    for (const auto& s : samples) {
        out << s.id << ',' << s.label << ',' << format_double(s.R) << ',' << format_double(s.L)
            << ',' << format_double(s.A) << ',' << format_double(s.A_hat) << '\n';
    }
    if (!out) throw IoError("failed while writing scores file '" + path + "'");
}

std::vector<ScoredSample> read_scores_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open scores file '" + path + "'");

    std::string line;
    if (!std::getline(in, line)) throw DataError("scores file '" + path + "' is empty");
    if (line == "id,label,R,L,A,A_hat\r") line.pop_back();
    if (line != "id,label,R,L,A,A_hat")
        throw DataError("scores file '" + path + "' line 1: unexpected header '" + line + "'");

    std::vector<ScoredSample> samples;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        const std::string where = "scores file '" + path + "' line " + std::to_string(line_no);
        if (fields.size() != 6) throw DataError(where + ": expected 6 fields");
        ScoredSample s;
        s.id = fields[0];
        try {
            std::size_t pos = 0;
            s.label = std::stoi(fields[1], &pos);
            if (pos != fields[1].size()) throw std::invalid_argument("label");
            s.R = std::stod(fields[2]);
            s.L = std::stod(fields[3]);
            s.A = std::stod(fields[4]);
            s.A_hat = std::stod(fields[5]);
        } catch (const std::exception&) {
            throw DataError(where + ": malformed numeric field");
        }
        if (s.label != 0 && s.label != 1) throw DataError(where + ": label must be 0 or 1");
        samples.push_back(std::move(s));
    }
    return samples;
}

}  // namespace skipgan
