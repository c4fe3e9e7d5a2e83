#pragma once

#include "aelab/rng.hpp"
#include "aelab/tensor.hpp"

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace aelab {

// ---------------------------------------------------------------------------
// Activations
// ---------------------------------------------------------------------------

enum class Activation { none, relu, sigmoid, heaviside };

std::string_view to_string(Activation act);
/// Throws std::invalid_argument on an unknown name.
Activation parse_activation(std::string_view name);

/// max(0, x)
double relu(double x);
/// e^x / (e^x + 1), evaluated without overflow for large |x|.
double sigmoid(double x);
/// Step function with H(0) = 1.
double heaviside(double x);

double apply(Activation act, double x);
Matrix activate(Activation act, const Matrix& pre);

// ---------------------------------------------------------------------------
// Layers
// ---------------------------------------------------------------------------

/// Fully connected layer: out = act(in * weights + biases).
/// weights is in_dim x out_dim, biases is 1 x out_dim.
struct DenseLayer {
    Matrix weights;
    Matrix biases;
    Activation activation = Activation::none;

    DenseLayer() = default;
    DenseLayer(Matrix w, Matrix b, Activation act);
    static DenseLayer zeros(std::size_t in_dim, std::size_t out_dim, Activation act);

    std::size_t in_dim() const noexcept { return weights.rows(); }
    std::size_t out_dim() const noexcept { return weights.cols(); }
    std::size_t parameter_count() const noexcept { return weights.size() + biases.size(); }

    Matrix pre_activation(const Matrix& input) const;
    Matrix forward(const Matrix& input) const { return activate(activation, pre_activation(input)); }

    friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

/// The two parallel layers that produce the mean (a) and the log-variance (b)
/// of the sampled bottleneck z = a + sqrt(e^b) * eps.
struct VariationalHead {
    DenseLayer mean_layer;
    DenseLayer logvar_layer;

    /// Throws ShapeError unless both layers share in/out dimensions and are linear.
    void validate() const;
    std::size_t in_dim() const noexcept { return mean_layer.in_dim(); }
    std::size_t out_dim() const noexcept { return mean_layer.out_dim(); }

    friend bool operator==(const VariationalHead&, const VariationalHead&) = default;
};

/// Encoder, optional variational head, decoder. The bottleneck is the output
/// of the last encoder layer (classical) or the sampled z (variational).
struct Network {
    std::vector<DenseLayer> encoder;
    std::optional<VariationalHead> head;
    std::vector<DenseLayer> decoder;

    bool is_variational() const noexcept { return head.has_value(); }
    std::size_t in_dim() const;
    std::size_t out_dim() const;
    std::size_t bottleneck_dim() const;
    std::size_t parameter_count() const;
    /// Checks that consecutive layers chain; throws ShapeError otherwise.
    void validate() const;

    friend bool operator==(const Network&, const Network&) = default;
};

/// Named pointer to one parameter matrix. Ordering is fixed: encoder layers
/// (weights, biases), head mean then logvar, decoder layers.
struct ParamRef {
    std::string name;
    Matrix* value;
};

std::vector<ParamRef> parameter_refs(Network& net);

// ---------------------------------------------------------------------------
// Forward pass
// ---------------------------------------------------------------------------

enum class Mode { training, inference };

/// Use the mean a as the bottleneck (no sampling).
struct UseMean {};
/// Fixed eps matrix (batch x bottleneck), used for gradient checks.
struct PinnedNoise {
    Matrix eps;
};
using NoiseSource = std::variant<UseMean, std::reference_wrapper<RngStream>, PinnedNoise>;

struct ForwardOptions {
    Mode mode = Mode::inference;
    NoiseSource noise = UseMean{};
};

struct LayerTrace {
    Matrix pre;
    Matrix post;
};

struct HeadTrace {
    Matrix mean;    // a
    Matrix logvar;  // b
    Matrix eps;     // zero when the mean is used
    Matrix z;
};

struct ForwardTrace {
    Mode mode = Mode::inference;
    Matrix input;
    std::vector<LayerTrace> encoder;
    std::optional<HeadTrace> head;
    std::vector<LayerTrace> decoder;

    const Matrix& output() const { return decoder.back().post; }
    const Matrix& bottleneck() const { return head ? head->z : encoder.back().post; }
};

/// Runs the network and records every pre-activation and activation.
///
/// Training mode rejects heaviside layers. For a variational network the
/// bottleneck is drawn with one eps per input row from the noise source;
/// UseMean makes the pass deterministic.
ForwardTrace forward(const Network& net, const Matrix& input, const ForwardOptions& options = {});

/// Applies a stack of layers to a batch, inference only.
Matrix run_layers(std::span<const DenseLayer> layers, Matrix input);

// ---------------------------------------------------------------------------
// Losses
// ---------------------------------------------------------------------------

/// Mean over all entries (samples x pixels) of the squared difference.
double mse_loss(const Matrix& output, const Matrix& target);

/// -(1/(2n)) * sum(1 + b - a^2 - e^b), n = number of rows. This is the mean
/// KL divergence between N(a, e^b) and N(0, 1) per sample.
double kl_term(const Matrix& mean, const Matrix& logvar);

/// mse_loss + kl_weight * kl_term.
double variational_loss(const Matrix& output, const Matrix& target, const Matrix& mean,
                        const Matrix& logvar, double kl_weight = 1.0);

struct LossBreakdown {
    double total = 0.0;
    double mse = 0.0;
    double kl = 0.0;  // unweighted kl_term; 0 for a classical network
};

LossBreakdown evaluate_loss(const ForwardTrace& trace, const Matrix& target, double kl_weight = 1.0);

// ---------------------------------------------------------------------------
// Backward pass
// ---------------------------------------------------------------------------

struct LayerGradient {
    Matrix weights;
    Matrix biases;
};

struct Gradients {
    std::vector<LayerGradient> encoder;
    std::vector<LayerGradient> head;  // empty, or {mean, logvar}
    std::vector<LayerGradient> decoder;

    /// Same ordering as parameter_refs().
    std::vector<const Matrix*> refs() const;
};

/// Gradients of evaluate_loss(trace, target, kl_weight).total with respect to
/// every weight and bias. The trace must come from a training-mode pass.
Gradients backward(const Network& net, const ForwardTrace& trace, const Matrix& target,
                   double kl_weight = 1.0);

// ---------------------------------------------------------------------------
// Initialisation
// ---------------------------------------------------------------------------

struct InitScheme {
    enum class Kind { glorot_uniform, uniform_symmetric, normal };
    Kind kind = Kind::glorot_uniform;
    double scale = 0.0;  // limit for uniform_symmetric, std for normal; unused for glorot

    static InitScheme glorot() { return {Kind::glorot_uniform, 0.0}; }
    static InitScheme uniform(double limit) { return {Kind::uniform_symmetric, limit}; }
    static InitScheme gaussian(double stddev) { return {Kind::normal, stddev}; }
};

/// i.i.d. draws for a rows x cols weight matrix. Glorot uses
/// limit = sqrt(6 / (rows + cols)).
Matrix init_weights(std::size_t rows, std::size_t cols, const InitScheme& scheme, RngStream& rng);

/// Dense layer with initialised weights and all-zero biases.
DenseLayer make_layer(std::size_t in_dim, std::size_t out_dim, Activation act,
                      const InitScheme& scheme, RngStream& rng);

}  // namespace aelab
