#include "aelab/nn.hpp"

#include <cmath>
#include <stdexcept>

namespace aelab {

std::string_view to_string(Activation act) {
    switch (act) {
        case Activation::none: return "none";
        case Activation::relu: return "relu";
        case Activation::sigmoid: return "sigmoid";
        case Activation::heaviside: return "heaviside";
    }
    return "none";
}

Activation parse_activation(std::string_view name) {
    if (name == "none") return Activation::none;
    if (name == "relu") return Activation::relu;
    if (name == "sigmoid") return Activation::sigmoid;
    if (name == "heaviside") return Activation::heaviside;
    throw std::invalid_argument("unknown activation '" + std::string(name) + "'");
}

double relu(double x) { return x > 0.0 ? x : 0.0; }

double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (e + 1.0);
}

double heaviside(double x) { return x >= 0.0 ? 1.0 : 0.0; }

double apply(Activation act, double x) {
    switch (act) {
        case Activation::none: return x;
        case Activation::relu: return relu(x);
        case Activation::sigmoid: return sigmoid(x);
        case Activation::heaviside: return heaviside(x);
    }
    return x;
}

Matrix activate(Activation act, const Matrix& pre) {
    if (act == Activation::none) return pre;
    Matrix out(pre.rows(), pre.cols());
    auto src = pre.data();
    auto dst = out.data();
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] = apply(act, src[i]);
    return out;
}

// ---------------------------------------------------------------------------

DenseLayer::DenseLayer(Matrix w, Matrix b, Activation act)
    : weights(std::move(w)), biases(std::move(b)), activation(act) {
    if (biases.rows() != 1 || biases.cols() != weights.cols()) {
        throw ShapeError("DenseLayer: bias " + biases.shape_string() + " does not match weights " +
                         weights.shape_string());
    }
}

DenseLayer DenseLayer::zeros(std::size_t in_dim, std::size_t out_dim, Activation act) {
    return DenseLayer(Matrix(in_dim, out_dim), Matrix(1, out_dim), act);
}

Matrix DenseLayer::pre_activation(const Matrix& input) const {
    return add_row_vector(matmul(input, weights), biases);
}

void VariationalHead::validate() const {
    if (mean_layer.in_dim() != logvar_layer.in_dim() || mean_layer.out_dim() != logvar_layer.out_dim()) {
        throw ShapeError("VariationalHead: mean layer " + mean_layer.weights.shape_string() +
                         " vs logvar layer " + logvar_layer.weights.shape_string());
    }
    if (mean_layer.activation != Activation::none || logvar_layer.activation != Activation::none) {
        throw std::invalid_argument("VariationalHead: head layers must be linear");
    }
}

std::size_t Network::in_dim() const {
    if (encoder.empty()) throw std::logic_error("Network: empty encoder");
    return encoder.front().in_dim();
}

std::size_t Network::out_dim() const {
    if (decoder.empty()) throw std::logic_error("Network: empty decoder");
    return decoder.back().out_dim();
}

std::size_t Network::bottleneck_dim() const {
    return head ? head->out_dim() : encoder.back().out_dim();
}

std::size_t Network::parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : encoder) n += l.parameter_count();
    if (head) n += head->mean_layer.parameter_count() + head->logvar_layer.parameter_count();
    for (const auto& l : decoder) n += l.parameter_count();
    return n;
}

void Network::validate() const {
    if (encoder.empty() || decoder.empty()) throw ShapeError("Network: encoder and decoder must be non-empty");
    auto chain = [](const DenseLayer& from, const DenseLayer& to) {
        if (from.out_dim() != to.in_dim()) {
            throw ShapeError("Network: layer " + from.weights.shape_string() + " does not feed " +
                             to.weights.shape_string());
        }
    };
    for (std::size_t i = 1; i < encoder.size(); ++i) chain(encoder[i - 1], encoder[i]);
    if (head) {
        head->validate();
        chain(encoder.back(), head->mean_layer);
        chain(head->mean_layer, decoder.front());
    } else {
        chain(encoder.back(), decoder.front());
    }
    for (std::size_t i = 1; i < decoder.size(); ++i) chain(decoder[i - 1], decoder[i]);
}

std::vector<ParamRef> parameter_refs(Network& net) {
    std::vector<ParamRef> refs;
    auto push = [&refs](const std::string& prefix, DenseLayer& layer) {
        refs.push_back({prefix + ".weights", &layer.weights});
        refs.push_back({prefix + ".biases", &layer.biases});
    };
    for (std::size_t i = 0; i < net.encoder.size(); ++i) push("encoder[" + std::to_string(i) + "]", net.encoder[i]);
    if (net.head) {
        push("head.mean", net.head->mean_layer);
        push("head.logvar", net.head->logvar_layer);
    }
    for (std::size_t i = 0; i < net.decoder.size(); ++i) push("decoder[" + std::to_string(i) + "]", net.decoder[i]);
    return refs;
}

std::vector<const Matrix*> Gradients::refs() const {
    std::vector<const Matrix*> out;
    for (const auto* group : {&encoder, &head, &decoder}) {
        for (const auto& g : *group) {
            out.push_back(&g.weights);
            out.push_back(&g.biases);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------

namespace {

LayerTrace run_traced(const DenseLayer& layer, const Matrix& input, Mode mode) {
    if (mode == Mode::training && layer.activation == Activation::heaviside) {
        throw std::logic_error("heaviside activation is inference-only");
    }
    LayerTrace t;
    t.pre = layer.pre_activation(input);
    t.post = activate(layer.activation, t.pre);
    return t;
}

Matrix draw_noise(const NoiseSource& noise, std::size_t rows, std::size_t cols) {
    if (std::holds_alternative<UseMean>(noise)) return Matrix(rows, cols);
    if (const auto* pinned = std::get_if<PinnedNoise>(&noise)) {
        if (pinned->eps.rows() != rows || pinned->eps.cols() != cols) {
            throw ShapeError("pinned noise " + pinned->eps.shape_string() + " vs bottleneck (" +
                             std::to_string(rows) + "x" + std::to_string(cols) + ")");
        }
        return pinned->eps;
    }
    RngStream& rng = std::get<std::reference_wrapper<RngStream>>(noise).get();
    Matrix eps(rows, cols);
    for (double& v : eps.data()) v = rng.normal();
    return eps;
}

double activation_derivative(Activation act, double pre, double post) {
    switch (act) {
        case Activation::none: return 1.0;
        case Activation::relu: return pre > 0.0 ? 1.0 : 0.0;
        case Activation::sigmoid: return post * (1.0 - post);
        case Activation::heaviside: break;
    }
    throw std::logic_error("heaviside has no usable gradient");
}

// Given dL/d(post), returns dL/d(input) and fills the layer gradient.
Matrix backprop_layer(const DenseLayer& layer, const LayerTrace& trace, const Matrix& input,
                      const Matrix& grad_post, LayerGradient& grad) {
    Matrix grad_pre(grad_post.rows(), grad_post.cols());
    for (std::size_t i = 0; i < grad_pre.size(); ++i) {
        grad_pre.data()[i] = grad_post.data()[i] *
                             activation_derivative(layer.activation, trace.pre.data()[i], trace.post.data()[i]);
    }
    grad.weights = matmul_tn(input, grad_pre);
    grad.biases = row_sum(grad_pre);
    return matmul_nt(grad_pre, layer.weights);
}

}  // namespace

ForwardTrace forward(const Network& net, const Matrix& input, const ForwardOptions& options) {
    if (input.cols() != net.in_dim()) {
        throw ShapeError("forward: input " + input.shape_string() + " vs network input dim " +
                         std::to_string(net.in_dim()));
    }
    ForwardTrace trace;
    trace.mode = options.mode;
    trace.input = input;
    const Matrix* current = &trace.input;
    trace.encoder.reserve(net.encoder.size());
    for (const auto& layer : net.encoder) {
        trace.encoder.push_back(run_traced(layer, *current, options.mode));
        current = &trace.encoder.back().post;
    }
    if (net.head) {
        HeadTrace h;
        h.mean = net.head->mean_layer.pre_activation(*current);
        h.logvar = net.head->logvar_layer.pre_activation(*current);
        h.eps = draw_noise(options.noise, h.mean.rows(), h.mean.cols());
        h.z = Matrix(h.mean.rows(), h.mean.cols());
        for (std::size_t i = 0; i < h.z.size(); ++i) {
            h.z.data()[i] = h.mean.data()[i] + std::exp(0.5 * h.logvar.data()[i]) * h.eps.data()[i];
        }
        trace.head = std::move(h);
        current = &trace.head->z;
    }
    trace.decoder.reserve(net.decoder.size());
    for (const auto& layer : net.decoder) {
        trace.decoder.push_back(run_traced(layer, *current, options.mode));
        current = &trace.decoder.back().post;
    }
    return trace;
}

Matrix run_layers(std::span<const DenseLayer> layers, Matrix input) {
    for (const auto& layer : layers) input = layer.forward(input);
    return input;
}

double mse_loss(const Matrix& output, const Matrix& target) {
    require_same_shape(output, target, "mse_loss");
    if (output.empty()) return 0.0;
    double acc = 0.0;
    for (std::size_t i = 0; i < output.size(); ++i) {
        const double d = output.data()[i] - target.data()[i];
        acc += d * d;
    }
    return acc / static_cast<double>(output.size());
}

double kl_term(const Matrix& mean, const Matrix& logvar) {
    require_same_shape(mean, logvar, "kl_term");
    if (mean.rows() == 0) return 0.0;
    double acc = 0.0;
    for (std::size_t i = 0; i < mean.size(); ++i) {
        const double a = mean.data()[i];
        const double b = logvar.data()[i];
        acc += 1.0 + b - a * a - std::exp(b);
    }
    // + 0.0 folds -0 into +0
    return -acc / (2.0 * static_cast<double>(mean.rows())) + 0.0;
}

double variational_loss(const Matrix& output, const Matrix& target, const Matrix& mean,
                        const Matrix& logvar, double kl_weight) {
    return mse_loss(output, target) + kl_weight * kl_term(mean, logvar);
}

LossBreakdown evaluate_loss(const ForwardTrace& trace, const Matrix& target, double kl_weight) {
    LossBreakdown loss;
    loss.mse = mse_loss(trace.output(), target);
    if (trace.head) loss.kl = kl_term(trace.head->mean, trace.head->logvar);
    loss.total = loss.mse + kl_weight * loss.kl;
    return loss;
}

Gradients backward(const Network& net, const ForwardTrace& trace, const Matrix& target, double kl_weight) {
    if (trace.mode != Mode::training) throw std::logic_error("backward: trace was not recorded in training mode");
    if (trace.encoder.size() != net.encoder.size() || trace.decoder.size() != net.decoder.size() ||
        trace.head.has_value() != net.head.has_value()) {
        throw std::logic_error("backward: trace does not belong to this network");
    }
    const Matrix& output = trace.output();
    require_same_shape(output, target, "backward");

    Gradients grads;
    grads.encoder.resize(net.encoder.size());
    grads.decoder.resize(net.decoder.size());

    // d(mse)/d(output)
    Matrix grad = sub(output, target);
    grad = scale(grad, 2.0 / static_cast<double>(output.size()));

    for (std::size_t i = net.decoder.size(); i-- > 0;) {
        const Matrix& input = i == 0 ? trace.bottleneck() : trace.decoder[i - 1].post;
        grad = backprop_layer(net.decoder[i], trace.decoder[i], input, grad, grads.decoder[i]);
    }

    if (net.head) {
        const HeadTrace& h = *trace.head;
        const double n = static_cast<double>(h.mean.rows());
        Matrix grad_mean(h.mean.rows(), h.mean.cols());
        Matrix grad_logvar(h.mean.rows(), h.mean.cols());
        for (std::size_t i = 0; i < grad_mean.size(); ++i) {
            const double a = h.mean.data()[i];
            const double b = h.logvar.data()[i];
            const double dz = grad.data()[i];
            // z = a + exp(b/2) * eps
            grad_mean.data()[i] = dz + kl_weight * a / n;
            grad_logvar.data()[i] = dz * h.eps.data()[i] * 0.5 * std::exp(0.5 * b) +
                                    kl_weight * (std::exp(b) - 1.0) / (2.0 * n);
        }
        const Matrix& head_input = trace.encoder.back().post;
        grads.head.resize(2);
        grads.head[0].weights = matmul_tn(head_input, grad_mean);
        grads.head[0].biases = row_sum(grad_mean);
        grads.head[1].weights = matmul_tn(head_input, grad_logvar);
        grads.head[1].biases = row_sum(grad_logvar);
        grad = add(matmul_nt(grad_mean, net.head->mean_layer.weights),
                   matmul_nt(grad_logvar, net.head->logvar_layer.weights));
    }

    for (std::size_t i = net.encoder.size(); i-- > 0;) {
        const Matrix& input = i == 0 ? trace.input : trace.encoder[i - 1].post;
        grad = backprop_layer(net.encoder[i], trace.encoder[i], input, grad, grads.encoder[i]);
    }
    return grads;
}

// ---------------------------------------------------------------------------

Matrix init_weights(std::size_t rows, std::size_t cols, const InitScheme& scheme, RngStream& rng) {
    Matrix w(rows, cols);
    switch (scheme.kind) {
        case InitScheme::Kind::glorot_uniform: {
            const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
            for (double& v : w.data()) v = rng.uniform(-limit, limit);
            break;
        }
        case InitScheme::Kind::uniform_symmetric:
            if (!(scheme.scale > 0.0)) throw std::invalid_argument("init_weights: limit must be positive");
            for (double& v : w.data()) v = rng.uniform(-scheme.scale, scheme.scale);
            break;
        case InitScheme::Kind::normal:
            if (!(scheme.scale > 0.0)) throw std::invalid_argument("init_weights: std must be positive");
            for (double& v : w.data()) v = rng.normal(0.0, scheme.scale);
            break;
    }
    return w;
}

DenseLayer make_layer(std::size_t in_dim, std::size_t out_dim, Activation act, const InitScheme& scheme,
                      RngStream& rng) {
    return DenseLayer(init_weights(in_dim, out_dim, scheme, rng), Matrix(1, out_dim), act);
}

}  // namespace aelab
