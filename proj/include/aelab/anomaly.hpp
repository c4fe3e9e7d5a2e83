#pragma once

#include "aelab/datasets.hpp"
#include "aelab/models.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace aelab {

/// Per-sample mean squared pixel error between input and reconstruction.
/// A VA is scored through its mean bottleneck unless a seed is given.
std::vector<double> score(const MlpModel& model, const Matrix& images,
                          std::optional<std::uint64_t> seed = std::nullopt);

/// Empirical quantile with linear interpolation between order statistics
/// (position q * (n - 1) in the sorted sample).
double calibrate(std::span<const double> clean_errors, double quantile = 0.99);

/// Probability that a random anomalous score exceeds a random clean one,
/// ties counting one half. Computed from average ranks.
double roc_auc(std::span<const double> clean_scores, std::span<const double> anomalous_scores);

struct AnomalyScorecard {
    std::vector<double> errors;   // clean samples first, then anomalous
    std::vector<bool> truth;      // true = anomalous
    std::vector<bool> verdicts;   // error > threshold
    double threshold = 0.0;
    double quantile = 0.0;
    std::size_t true_positives = 0;
    std::size_t false_positives = 0;
    std::size_t true_negatives = 0;
    std::size_t false_negatives = 0;
    double auc = 0.0;
};

AnomalyScorecard evaluate(const MlpModel& model, const Dataset& clean, const Dataset& anomalous,
                          double quantile = 0.99);

/// sample_id,error,truth,verdict
void write_scorecard_csv(const AnomalyScorecard& card, const std::filesystem::path& path);
/// key: value lines
std::string scorecard_summary(const AnomalyScorecard& card);

}  // namespace aelab
