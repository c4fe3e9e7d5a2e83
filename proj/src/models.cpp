#include "aelab/models.hpp"

#include "aelab/errors.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

namespace aelab {

MlpModel build_ca(std::size_t height, std::size_t width, RngStream& rng, const ArchitectureOptions& options) {
    if (height < 1 || width < 1 || options.hidden < 1 || options.bottleneck < 1)
        throw std::invalid_argument("build_ca: dimensions must be >= 1");
    const std::size_t pixels = height * width;
    MlpModel model;
    model.input_height = height;
    model.input_width = width;
    auto& net = model.network;
    net.encoder.push_back(make_layer(pixels, options.hidden, Activation::relu, options.init, rng));
    net.encoder.push_back(make_layer(options.hidden, options.bottleneck, Activation::none, options.init, rng));
    net.decoder.push_back(make_layer(options.bottleneck, options.hidden, Activation::relu, options.init, rng));
    net.decoder.push_back(make_layer(options.hidden, pixels, Activation::sigmoid, options.init, rng));
    net.validate();
    return model;
}

MlpModel build_va(std::size_t height, std::size_t width, RngStream& rng, const ArchitectureOptions& options) {
    if (height < 1 || width < 1 || options.hidden < 1 || options.bottleneck < 1)
        throw std::invalid_argument("build_va: dimensions must be >= 1");
    const std::size_t pixels = height * width;
    MlpModel model;
    model.input_height = height;
    model.input_width = width;
    auto& net = model.network;
    net.encoder.push_back(make_layer(pixels, options.hidden, Activation::relu, options.init, rng));
    VariationalHead head;
    head.mean_layer = make_layer(options.hidden, options.bottleneck, Activation::none, options.init, rng);
    head.logvar_layer = make_layer(options.hidden, options.bottleneck, Activation::none, options.init, rng);
    net.head = std::move(head);
    net.decoder.push_back(make_layer(options.bottleneck, options.hidden, Activation::relu, options.init, rng));
    net.decoder.push_back(make_layer(options.hidden, pixels, Activation::sigmoid, options.init, rng));
    net.validate();
    return model;
}

MlpModel construct_reference_optimal_ca() {
    MlpModel model;
    model.input_height = 2;
    model.input_width = 2;
    auto& net = model.network;
    // Pixel order: upper-left, upper-right, lower-left, lower-right.
    // Hidden unit 1 fires for 1100 (value 1) and 0101 (value 10);
    // hidden unit 2 fires for 0011 (value 10) and 1010 (value 1).
    net.encoder.emplace_back(Matrix{{0.5, 0.5}, {0.5, -10.0}, {-10.0, 0.5}, {9.5, 9.5}}, Matrix(1, 2),
                             Activation::relu);
    net.encoder.emplace_back(Matrix{{1.0}, {-1.0}}, Matrix(1, 1), Activation::none);
    net.decoder.emplace_back(Matrix{{10.0, -10.0}}, Matrix(1, 2), Activation::relu);
    net.decoder.emplace_back(Matrix{{-1.0, 1.0, -1.0, 1.0}, {-1.0, -1.0, 1.0, 1.0}},
                             Matrix{{15.0, 0.0, -0.05, -15.0}}, Activation::sigmoid);
    net.validate();
    return model;
}

std::string_view to_string(LossKind kind) { return kind == LossKind::variational ? "variational" : "mse"; }

LossKind parse_loss_kind(std::string_view name) {
    if (name == "mse") return LossKind::mse;
    if (name == "variational") return LossKind::variational;
    throw std::invalid_argument("unknown loss '" + std::string(name) + "'");
}

void TrainConfig::validate(std::size_t n_samples) const {
    if (epochs < 1) throw std::invalid_argument("TrainConfig: epochs must be >= 1");
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
        throw std::invalid_argument("TrainConfig: learning_rate must be positive");
    if (!(momentum >= 0.0 && momentum < 1.0)) throw std::invalid_argument("TrainConfig: momentum must be in [0, 1)");
    if (batch_size > n_samples) throw std::invalid_argument("TrainConfig: batch_size exceeds dataset size");
    if (!(kl_weight >= 0.0)) throw std::invalid_argument("TrainConfig: kl_weight must be >= 0");
}

TrainConfig default_train_config(const Dataset& data, bool variational, std::uint64_t seed) {
    TrainConfig cfg;
    cfg.seed = seed;
    cfg.loss = variational ? LossKind::variational : LossKind::mse;
    if (data.size() > 32) {
        cfg.epochs = 800;
        cfg.batch_size = 32;
        cfg.optimizer = OptimizerKind::adam;
        cfg.learning_rate = 0.01;
        cfg.kl_weight = 3e-3;
        cfg.kl_warmup_epochs = 300;
    }
    return cfg;
}

TrainReport train(MlpModel& model, const Dataset& data, const TrainConfig& cfg) {
    const auto start = std::chrono::steady_clock::now();
    cfg.validate(data.size());
    if (data.pixels() != model.pixels() || data.images.cols() != model.network.in_dim()) {
        throw ShapeError("train: dataset images " + data.images.shape_string() + " vs model input " +
                         std::to_string(model.network.in_dim()));
    }
    if ((cfg.loss == LossKind::variational) != model.is_variational())
        throw std::invalid_argument("train: variational loss requires a variational model and vice versa");

    const std::size_t n = data.size();
    const std::size_t batch = (cfg.batch_size == 0 || cfg.batch_size >= n) ? n : cfg.batch_size;
    const double full_kl_weight = cfg.loss == LossKind::variational ? cfg.kl_weight : 0.0;

    RngStream rng(cfg.seed);
    auto optimizer = make_optimizer(cfg.optimizer, cfg.learning_rate, cfg.momentum);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});

    TrainReport report;
    report.seed = cfg.seed;
    report.config = cfg;

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        if (batch < n) {
            for (std::size_t i = n - 1; i > 0; --i) std::swap(order[i], order[rng.uniform_index(i + 1)]);
        }
        EpochStats stats;
        stats.epoch = epoch;
        const double kl_weight =
            epoch < cfg.kl_warmup_epochs
                ? full_kl_weight * static_cast<double>(epoch) / static_cast<double>(cfg.kl_warmup_epochs)
                : full_kl_weight;
        for (std::size_t begin = 0; begin < n; begin += batch) {
            const std::size_t end = std::min(begin + batch, n);
            const Matrix x = batch == n ? data.images
                                        : data.images.gather_rows(std::span(order).subspan(begin, end - begin));
            ForwardOptions options;
            options.mode = Mode::training;
            if (model.is_variational()) options.noise = std::ref(rng);
            const ForwardTrace trace = forward(model.network, x, options);
            const LossBreakdown loss = evaluate_loss(trace, x, kl_weight);
            if (!std::isfinite(loss.total)) throw DivergenceError(epoch, "non-finite loss");
            const double w = static_cast<double>(end - begin) / static_cast<double>(n);
            stats.loss += w * loss.total;
            stats.mse += w * loss.mse;
            stats.kl += w * loss.kl;
            const Gradients grads = backward(model.network, trace, x, kl_weight);
            try {
                optimizer->step(model.network, grads);
            } catch (const NumericError& e) {
                throw DivergenceError(epoch, e.what());
            }
        }
        const bool last = epoch + 1 == cfg.epochs;
        if (last || (cfg.log_every > 0 && epoch % cfg.log_every == 0)) report.history.push_back(stats);
        if (last) report.final_loss = stats.loss;
    }
    report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

RestartResult train_with_restarts(const Dataset& data, const TrainConfig& cfg, std::size_t restarts,
                                  const ArchitectureOptions& arch) {
    if (restarts < 1) throw std::invalid_argument("train_with_restarts: restarts must be >= 1");
    const bool variational = cfg.loss == LossKind::variational;
    const double kl_weight = variational ? cfg.kl_weight : 0.0;
    RestartResult best;
    for (std::size_t r = 0; r < restarts; ++r) {
        TrainConfig run = cfg;
        run.seed = cfg.seed + r;
        RngStream init_rng(run.seed);
        MlpModel model = variational ? build_va(data.height, data.width, init_rng, arch)
                                     : build_ca(data.height, data.width, init_rng, arch);
        TrainReport report = train(model, data, run);
        const double score = evaluate_loss(model, data, kl_weight).total;
        best.scores.push_back(score);
        if (r == 0 || score < best.scores[best.selected]) {
            best.selected = r;
            best.model = std::move(model);
            best.report = std::move(report);
        }
    }
    return best;
}

LossBreakdown evaluate_loss(const MlpModel& model, const Dataset& data, double kl_weight) {
    const ForwardTrace trace = forward(model.network, data.images);
    return evaluate_loss(trace, data.images, kl_weight);
}

std::string_view to_string(OutputMode mode) { return mode == OutputMode::heaviside ? "heaviside" : "sigmoid"; }

OutputMode parse_output_mode(std::string_view name) {
    if (name == "sigmoid") return OutputMode::sigmoid;
    if (name == "heaviside") return OutputMode::heaviside;
    throw std::invalid_argument("unknown output mode '" + std::string(name) + "'");
}

Network with_heaviside_output(const Network& net) {
    Network copy = net;
    auto& last = copy.decoder.back();
    if (last.activation != Activation::sigmoid && last.activation != Activation::heaviside)
        throw std::invalid_argument("heaviside post-processing expects a sigmoid output layer");
    last.activation = Activation::heaviside;
    return copy;
}

Matrix encode(const MlpModel& model, const Matrix& images) {
    if (images.cols() != model.network.in_dim())
        throw ShapeError("encode: images " + images.shape_string() + " vs model input " +
                         std::to_string(model.network.in_dim()));
    Matrix h = run_layers(model.network.encoder, images);
    if (model.network.head) return model.network.head->mean_layer.forward(h);
    return h;
}

Matrix decode(const MlpModel& model, const Matrix& bottleneck, OutputMode mode) {
    if (bottleneck.cols() != model.network.bottleneck_dim())
        throw ShapeError("decode: bottleneck " + bottleneck.shape_string() + " vs width " +
                         std::to_string(model.network.bottleneck_dim()));
    if (mode == OutputMode::heaviside) return run_layers(with_heaviside_output(model.network).decoder, bottleneck);
    return run_layers(model.network.decoder, bottleneck);
}

Matrix reconstruct(const MlpModel& model, const Matrix& images, OutputMode mode, std::optional<std::uint64_t> seed) {
    const Network heaviside_net = mode == OutputMode::heaviside ? with_heaviside_output(model.network) : Network{};
    const Network& net = mode == OutputMode::heaviside ? heaviside_net : model.network;
    ForwardOptions options;
    std::optional<RngStream> rng;
    if (seed && model.is_variational()) {
        rng.emplace(*seed);
        options.noise = std::ref(*rng);
    }
    return forward(net, images, options).output();
}

void write_report_csv(const TrainReport& report, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "epoch,loss,mse,kl\n";
    for (const auto& e : report.history) {
        out << e.epoch << ',' << format_real(e.loss) << ',' << format_real(e.mse) << ',' << format_real(e.kl) << '\n';
    }
}

}  // namespace aelab
