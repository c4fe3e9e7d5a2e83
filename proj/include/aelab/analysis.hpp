#pragma once

#include "aelab/datasets.hpp"
#include "aelab/models.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <string_view>
#include <vector>

namespace aelab {

// ---------------------------------------------------------------------------
// Decoder thresholds
// ---------------------------------------------------------------------------

/// Output value of a single step unit
/// H(relu(10x) * (-1) + relu(-10x) * (-1) + b), which is 1 exactly on
/// [-b/10, b/10] for b > 0.
double step_unit_output(double bottleneck, double bias);

struct NeuronThresholds {
    std::vector<double> thresholds;  // strictly increasing
    std::vector<int> values;         // values.size() == thresholds.size() + 1
};

struct ThresholdTable {
    double bn_min = 0.0;
    double bn_max = 0.0;
    std::size_t resolution = 0;
    std::vector<NeuronThresholds> neurons;

    double step() const { return (bn_max - bn_min) / static_cast<double>(resolution - 1); }
    /// Sorted union of every neuron's thresholds.
    std::vector<double> all_thresholds() const;
};

/// Sweeps a scalar bottleneck over [bn_min, bn_max] at `resolution` points,
/// decodes with a heaviside output, and records where each output neuron
/// flips. Each flip is refined by bisection between the two sweep points.
/// Throws std::invalid_argument for a bottleneck wider than one unit.
ThresholdTable extract_thresholds(const MlpModel& model, double bn_min = -20.0, double bn_max = 20.0,
                                  std::size_t resolution = 4001);

/// Decoder outputs along a bottleneck sweep: one row per step.
struct BlurSweep {
    std::vector<double> bottlenecks;
    Matrix outputs;  // steps x pixels
};

BlurSweep blur_sweep(const MlpModel& model, double window_lo, double window_hi, std::size_t steps,
                     OutputMode mode = OutputMode::sigmoid);

// ---------------------------------------------------------------------------
// Bottleneck statistics
// ---------------------------------------------------------------------------

struct BottleneckStats {
    std::vector<double> means;    // a per sample
    std::vector<double> stddevs;  // sqrt(e^b) per sample
    double mean_of_means = 0.0;
    double variance_of_means = 0.0;
    double fraction_within_3 = 0.0;  // fraction of a in [-3, 3]
    double histogram_lo = -4.0;
    double histogram_hi = 4.0;
    std::vector<std::size_t> histogram;  // of a; out-of-range values land in the end bins
};

/// Throws std::invalid_argument for a classical model.
BottleneckStats bottleneck_stats(const MlpModel& model, const Dataset& data, std::size_t bins = 16);

void write_bottleneck_csv(const BottleneckStats& stats, const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Convergence outcomes on the quad dataset
// ---------------------------------------------------------------------------

enum class Outcome { optimal, pair_collapse, double_pair_collapse, all_gray, other };

inline constexpr std::array<Outcome, 5> kAllOutcomes = {Outcome::optimal, Outcome::pair_collapse,
                                                        Outcome::double_pair_collapse, Outcome::all_gray,
                                                        Outcome::other};

std::string_view to_string(Outcome outcome);

struct OutcomeTolerances {
    double gray_tol = 0.15;
    double match_tol = 0.05;
};

/// Labels the sigmoid reconstructions of the quad inputs:
///   optimal              every reconstruction within match_tol of its input
///   all_gray             every output pixel within gray_tol of 0.5
///   pair_collapse        two inputs correct, the other two share one reconstruction
///   double_pair_collapse no input correct, inputs form two collapsed pairs
///   other                anything else
Outcome classify_outcome(const MlpModel& model, const Dataset& quad, const OutcomeTolerances& tol = {});

/// Indices of the collapsed pair for a pair_collapse model, else empty.
std::vector<std::size_t> collapsed_inputs(const MlpModel& model, const Dataset& quad,
                                          const OutcomeTolerances& tol = {});

/// First encoder layer activations.
Matrix first_layer_activations(const MlpModel& model, const Matrix& images);

/// First decoder layer activations from the deterministic bottleneck.
Matrix third_layer_activations(const MlpModel& model, const Matrix& images);

/// 1 or 3 if every listed input is all-zero at L1 or L3 (checked in that
/// order), else 0.
std::size_t shared_dead_layer(const MlpModel& model, const Matrix& images, const std::vector<std::size_t>& inputs);

struct SeedOutcome {
    std::uint64_t seed = 0;
    Outcome outcome = Outcome::other;
    double final_loss = 0.0;
    bool diverged = false;
    /// pair_collapse only: the first relu layer (1 = L1, 3 = L3) where both
    /// collapsed inputs have all-zero activations; 0 if there is none.
    std::size_t dead_layer = 0;
    bool dead_layer_mechanism = false;  // dead_layer != 0
};

struct OutcomeReport {
    std::string architecture;  // "ca" or "va"
    std::vector<SeedOutcome> runs;  // in seed order
    std::array<double, 5> frequencies{};  // indexed like kAllOutcomes
    std::array<std::vector<std::uint64_t>, 5> seeds_by_outcome;

    double frequency(Outcome outcome) const;
};

struct SweepOptions {
    std::size_t n_seeds = 200;
    std::uint64_t first_seed = 0;
    TrainConfig train;  // seed and loss are overridden per run
    ArchitectureOptions architecture;
    OutcomeTolerances tolerances;
    std::size_t threads = 0;  // 0: hardware concurrency
};

/// Trains a fresh quad model per seed (seed drives both init and training)
/// and classifies it. Seeds are first_seed, first_seed + 1, ...; results are
/// merged in seed order regardless of thread count.
OutcomeReport seed_sweep(const SweepOptions& options, bool variational = false);

void write_outcomes_csv(const OutcomeReport& report, const std::filesystem::path& path);
void write_frequencies_csv(const OutcomeReport& report, const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Initialisation probabilities
// ---------------------------------------------------------------------------

struct InitProbabilities {
    std::size_t trials = 0;
    /// A fixed quad input (0011) drives both first-layer units negative.
    double p_input_dead = 0.0;
    /// At least two of the four quad inputs are dead in the same network.
    double p_two_inputs_dead = 0.0;
    /// Both bottleneck weights negative and both next-layer weights positive, or the reverse.
    double p_decoder_blocked = 0.0;
    /// p_two_inputs_dead when each input gets its own independent network,
    /// i.e. the binomial model 1 - (3/4)^4 - 4 (3/4)^3 (1/4).
    double p_two_inputs_dead_independent = 0.0;
};

/// Monte-Carlo over fresh quad CA initialisations (zero biases).
InitProbabilities init_probability_oracle(std::size_t trials, RngStream& rng,
                                          const InitScheme& scheme = InitScheme::glorot());

}  // namespace aelab
