#include "aelab/anomaly.hpp"

#include <gtest/gtest.h>

#include <algorithm>

using namespace aelab;

namespace {

// Brute-force P(anomalous > clean) + P(tie)/2 over all pairs.
double pairwise_auc(const std::vector<double>& clean, const std::vector<double>& anomalous) {
    double wins = 0.0;
    for (double a : anomalous)
        for (double c : clean) wins += a > c ? 1.0 : (a == c ? 0.5 : 0.0);
    return wins / static_cast<double>(clean.size() * anomalous.size());
}

}  // namespace

TEST(Auc, MatchesPairwiseCountingWithTies) {
    RngStream rng(1);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<double> clean(1 + rng.uniform_index(40)), anomalous(1 + rng.uniform_index(40));
        // Coarse values force ties.
        for (double& v : clean) v = static_cast<double>(rng.uniform_index(8));
        for (double& v : anomalous) v = static_cast<double>(rng.uniform_index(10));
        EXPECT_NEAR(roc_auc(clean, anomalous), pairwise_auc(clean, anomalous), 1e-12);
    }
}

TEST(Auc, PerfectAndIdenticalSeparation) {
    EXPECT_EQ(roc_auc(std::vector<double>{0, 0, 0}, std::vector<double>{1, 1}), 1.0);
    EXPECT_EQ(roc_auc(std::vector<double>{1, 1}, std::vector<double>{0, 0, 0}), 0.0);
    const std::vector<double> same{0.3, 0.1, 0.7, 0.7};
    EXPECT_EQ(roc_auc(same, same), 0.5);
    EXPECT_THROW(roc_auc(std::vector<double>{}, same), std::invalid_argument);
}

TEST(Calibrate, InterpolatesOrderStatistics) {
    const std::vector<double> e{4, 1, 3, 2, 5};
    EXPECT_DOUBLE_EQ(calibrate(e, 0.5), 3.0);
    EXPECT_DOUBLE_EQ(calibrate(e, 0.25), 2.0);
    EXPECT_DOUBLE_EQ(calibrate(e, 0.875), 4.5);
    EXPECT_THROW(calibrate(e, 1.0), std::invalid_argument);
    EXPECT_THROW(calibrate(std::vector<double>{}, 0.5), std::invalid_argument);
}

TEST(Calibrate, MonotoneInQuantileAndBoundedByData) {
    RngStream rng(2);
    std::vector<double> e(57);
    for (double& v : e) v = rng.uniform(0.0, 3.0);
    const auto [lo, hi] = std::minmax_element(e.begin(), e.end());
    double prev = -1.0;
    for (double q = 0.01; q < 1.0; q += 0.01) {
        const double t = calibrate(e, q);
        EXPECT_GE(t, prev);
        EXPECT_GE(t, *lo);
        EXPECT_LE(t, *hi);
        prev = t;
    }
}

TEST(Score, IsPerSampleMeanSquaredError) {
    const MlpModel m = construct_reference_optimal_ca();
    const Dataset q = gen_quad_dataset();
    const std::vector<double> s = score(m, q.images);
    const Matrix recon = reconstruct(m, q.images);
    ASSERT_EQ(s.size(), 4u);
    for (std::size_t i = 0; i < 4; ++i) {
        double e = 0.0;
        for (std::size_t j = 0; j < 4; ++j) e += (recon(i, j) - q.images(i, j)) * (recon(i, j) - q.images(i, j));
        EXPECT_DOUBLE_EQ(s[i], e / 4);
    }
}

TEST(Evaluate, CleanAgainstItselfIsChance) {
    RngStream rng(3);
    const Dataset clean = gen_line_dataset(60, 8, rng);
    RngStream mrng(4);
    const MlpModel m = build_ca(8, 8, mrng);
    Dataset copy = clean;
    copy.anomalous.assign(copy.size(), true);
    const AnomalyScorecard card = evaluate(m, clean, copy, 0.9);
    EXPECT_EQ(card.auc, 0.5);
    EXPECT_EQ(card.errors.size(), 120u);
    EXPECT_EQ(card.true_positives + card.false_negatives, 60u);
    EXPECT_EQ(card.false_positives + card.true_negatives, 60u);
    // Calibration at 0.9 flags at most the top tenth of the clean set.
    EXPECT_LE(card.false_positives, 6u);
}

TEST(Evaluate, CountsAgreeWithVerdicts) {
    RngStream rng(5);
    const Dataset clean = gen_line_dataset(30, 6, rng);
    const Dataset noise = gen_anomaly_dataset(20, 6, rng, AnomalyKind::noise);
    RngStream mrng(6);
    const MlpModel m = build_va(6, 6, mrng);
    const AnomalyScorecard card = evaluate(m, clean, noise, 0.95);
    std::size_t tp = 0, fp = 0;
    for (std::size_t i = 0; i < card.errors.size(); ++i) {
        EXPECT_EQ(card.verdicts[i], card.errors[i] > card.threshold);
        tp += card.truth[i] && card.verdicts[i];
        fp += !card.truth[i] && card.verdicts[i];
    }
    EXPECT_EQ(tp, card.true_positives);
    EXPECT_EQ(fp, card.false_positives);
    const std::string summary = scorecard_summary(card);
    EXPECT_NE(summary.find("auc: "), std::string::npos);
}

TEST(Evaluate, ShapeMismatchThrows) {
    RngStream rng(7);
    const MlpModel m = build_ca(4, 4, rng);
    EXPECT_THROW(evaluate(m, gen_quad_dataset(), gen_quad_dataset()), ShapeError);
}
