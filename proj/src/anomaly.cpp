#include "aelab/anomaly.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace aelab {

std::vector<double> score(const MlpModel& model, const Matrix& images, std::optional<std::uint64_t> seed) {
    if (images.cols() != model.pixels())
        throw ShapeError("score: images " + images.shape_string() + " vs model input " +
                         std::to_string(model.pixels()));
    const Matrix recon = reconstruct(model, images, OutputMode::sigmoid, seed);
    std::vector<double> errors(images.rows());
    for (std::size_t r = 0; r < images.rows(); ++r) {
        double acc = 0.0;
        for (std::size_t c = 0; c < images.cols(); ++c) {
            const double d = recon(r, c) - images(r, c);
            acc += d * d;
        }
        errors[r] = acc / static_cast<double>(images.cols());
    }
    return errors;
}

double calibrate(std::span<const double> clean_errors, double quantile) {
    if (clean_errors.empty()) throw std::invalid_argument("calibrate: no clean errors");
    if (!(quantile > 0.0 && quantile < 1.0)) throw std::invalid_argument("calibrate: quantile must be in (0, 1)");
    std::vector<double> sorted(clean_errors.begin(), clean_errors.end());
    std::sort(sorted.begin(), sorted.end());
    const double pos = quantile * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

double roc_auc(std::span<const double> clean_scores, std::span<const double> anomalous_scores) {
    if (clean_scores.empty() || anomalous_scores.empty()) throw std::invalid_argument("roc_auc: empty score set");
    struct Entry {
        double score;
        bool anomalous;
    };
    std::vector<Entry> all;
    all.reserve(clean_scores.size() + anomalous_scores.size());
    for (double s : clean_scores) all.push_back({s, false});
    for (double s : anomalous_scores) all.push_back({s, true});
    std::sort(all.begin(), all.end(), [](const Entry& a, const Entry& b) { return a.score < b.score; });

    // Mann-Whitney U from average ranks (1-based).
    double rank_sum = 0.0;
    for (std::size_t i = 0; i < all.size();) {
        std::size_t j = i;
        while (j < all.size() && all[j].score == all[i].score) ++j;
        const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);
        for (std::size_t k = i; k < j; ++k)
            if (all[k].anomalous) rank_sum += avg_rank;
        i = j;
    }
    const double n_pos = static_cast<double>(anomalous_scores.size());
    const double n_neg = static_cast<double>(clean_scores.size());
    return (rank_sum - n_pos * (n_pos + 1.0) / 2.0) / (n_pos * n_neg);
}

AnomalyScorecard evaluate(const MlpModel& model, const Dataset& clean, const Dataset& anomalous, double quantile) {
    if (clean.pixels() != model.pixels() || anomalous.pixels() != model.pixels())
        throw ShapeError("evaluate: dataset image shape does not match the model");
    const auto clean_errors = score(model, clean.images);
    const auto anomalous_errors = score(model, anomalous.images);

    AnomalyScorecard card;
    card.quantile = quantile;
    card.threshold = calibrate(clean_errors, quantile);
    card.auc = roc_auc(clean_errors, anomalous_errors);
    card.errors = clean_errors;
    card.errors.insert(card.errors.end(), anomalous_errors.begin(), anomalous_errors.end());
    card.truth.assign(clean_errors.size(), false);
    card.truth.resize(card.errors.size(), true);
    for (std::size_t i = 0; i < card.errors.size(); ++i) {
        const bool flagged = card.errors[i] > card.threshold;
        card.verdicts.push_back(flagged);
        if (card.truth[i]) (flagged ? card.true_positives : card.false_negatives)++;
        else (flagged ? card.false_positives : card.true_negatives)++;
    }
    return card;
}

void write_scorecard_csv(const AnomalyScorecard& card, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "sample_id,error,truth,verdict\n";
    for (std::size_t i = 0; i < card.errors.size(); ++i) {
        out << i << ',' << format_real(card.errors[i]) << ',' << (card.truth[i] ? 1 : 0) << ','
            << (card.verdicts[i] ? 1 : 0) << '\n';
    }
}

std::string scorecard_summary(const AnomalyScorecard& card) {
    std::ostringstream out;
    out << "quantile: " << format_real(card.quantile) << '\n'
        << "threshold: " << format_real(card.threshold) << '\n'
        << "auc: " << format_real(card.auc) << '\n'
        << "true_positives: " << card.true_positives << '\n'
        << "false_positives: " << card.false_positives << '\n'
        << "true_negatives: " << card.true_negatives << '\n'
        << "false_negatives: " << card.false_negatives << '\n';
    return out.str();
}

}  // namespace aelab
