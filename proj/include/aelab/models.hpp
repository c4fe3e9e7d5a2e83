#pragma once

#include "aelab/datasets.hpp"
#include "aelab/nn.hpp"
#include "aelab/optim.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string_view>
#include <vector>

namespace aelab {

/// An autoencoder over height x width images.
///
/// Classical:   in -> hidden(relu) -> bottleneck(none) -> hidden(relu) -> in(sigmoid)
/// Variational: in -> hidden(relu) -> {mean, logvar}(none) -> sampled z -> hidden(relu) -> in(sigmoid)
struct MlpModel {
    Network network;
    std::size_t input_height = 0;
    std::size_t input_width = 0;

    bool is_variational() const noexcept { return network.is_variational(); }
    std::size_t pixels() const noexcept { return input_height * input_width; }

    friend bool operator==(const MlpModel&, const MlpModel&) = default;
};

struct ArchitectureOptions {
    std::size_t hidden = 2;
    std::size_t bottleneck = 1;
    InitScheme init = InitScheme::glorot();
};

MlpModel build_ca(std::size_t height, std::size_t width, RngStream& rng, const ArchitectureOptions& options = {});
MlpModel build_va(std::size_t height, std::size_t width, RngStream& rng, const ArchitectureOptions& options = {});

/// Hand-built 4-2-1-2-4 classical autoencoder that solves the quad dataset.
///
/// The encoder sends 0011, 1010, 1100, 0101 to bottlenecks -10, -1, 1, 10.
/// The decoder's hidden units are relu(10x) and relu(-10x); output neurons:
///   1: weights (-1, -1), bias 15   -> 1 on [-1.5, 1.5]
///   2: weights ( 1, -1), bias 0    -> 1 for x >= 0
///   3: weights (-1,  1), bias -0.05 -> 1 for x <= -0.005 (complement of 2)
///   4: weights ( 1,  1), bias -15  -> 1 outside (-1.5, 1.5)
/// Output 3 carries a small negative bias so that under H(0) = 1 it is never
/// on together with output 2 at x = 0.
MlpModel construct_reference_optimal_ca();

enum class LossKind { mse, variational };

std::string_view to_string(LossKind kind);
LossKind parse_loss_kind(std::string_view name);

struct TrainConfig {
    std::size_t epochs = 5000;
    double learning_rate = 0.1;
    double momentum = 0.9;
    std::size_t batch_size = 0;  // 0 or >= n: full batch
    std::uint64_t seed = 0;
    LossKind loss = LossKind::mse;
    std::size_t log_every = 1;
    /// Multiplier on kl_term in the training loss; ignored for mse.
    double kl_weight = 1e-3;
    /// kl_weight ramps linearly from 0 over this many epochs (0: constant).
    std::size_t kl_warmup_epochs = 0;
    OptimizerKind optimizer = OptimizerKind::sgd;

    /// Throws std::invalid_argument on an invalid combination for n_samples.
    void validate(std::size_t n_samples) const;
};

/// Defaults for the two reference datasets: full-batch SGD for 5000 epochs on
/// the quad set; otherwise Adam, mini-batch 32, 800 epochs, KL weight 3e-3
/// reached after a 300-epoch ramp.
TrainConfig default_train_config(const Dataset& data, bool variational, std::uint64_t seed = 0);

struct EpochStats {
    std::size_t epoch = 0;
    double loss = 0.0;
    double mse = 0.0;
    double kl = 0.0;
};

struct TrainReport {
    std::vector<EpochStats> history;  // every log_every-th epoch plus the last
    double final_loss = 0.0;
    double wall_seconds = 0.0;
    std::uint64_t seed = 0;
    TrainConfig config;
};

/// Mini-batch or full-batch gradient descent, updating model in place.
/// Deterministic in (model, data, cfg). Throws DivergenceError when the loss
/// or a gradient becomes non-finite.
TrainReport train(MlpModel& model, const Dataset& data, const TrainConfig& cfg);

struct RestartResult {
    MlpModel model;
    TrainReport report;  // of the selected run
    std::size_t selected = 0;
    std::vector<double> scores;  // inference loss per restart
};

/// Builds and trains `restarts` models with seeds cfg.seed, cfg.seed + 1, ...
/// (seed drives init and training) and keeps the one with the lowest
/// inference loss on the training data.
RestartResult train_with_restarts(const Dataset& data, const TrainConfig& cfg, std::size_t restarts,
                                  const ArchitectureOptions& arch = {});

/// Loss of the model on the whole dataset in inference mode (mean bottleneck).
LossBreakdown evaluate_loss(const MlpModel& model, const Dataset& data, double kl_weight = 1.0);

enum class OutputMode { sigmoid, heaviside };

std::string_view to_string(OutputMode mode);
OutputMode parse_output_mode(std::string_view name);

/// Copy of the network whose final activation is replaced by heaviside.
Network with_heaviside_output(const Network& net);

/// Deterministic bottleneck: encoder output, or the mean a for a VA.
Matrix encode(const MlpModel& model, const Matrix& images);
Matrix decode(const MlpModel& model, const Matrix& bottleneck, OutputMode mode = OutputMode::sigmoid);

/// Reconstructions in the chosen output mode. A VA uses its mean bottleneck
/// unless a seed is given, in which case z is sampled.
Matrix reconstruct(const MlpModel& model, const Matrix& images, OutputMode mode = OutputMode::sigmoid,
                   std::optional<std::uint64_t> seed = std::nullopt);

// Plain-text model files; see README for the layout.
void save_model(const MlpModel& model, std::ostream& out);
void save_model(const MlpModel& model, const std::filesystem::path& path);
/// Throws ParseError (with line number) on malformed input.
MlpModel load_model(std::istream& in);
MlpModel load_model(const std::filesystem::path& path);

void write_report_csv(const TrainReport& report, const std::filesystem::path& path);

}  // namespace aelab
