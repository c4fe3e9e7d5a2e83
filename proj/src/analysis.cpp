#include "aelab/analysis.hpp"

#include "aelab/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <thread>

namespace aelab {

double step_unit_output(double bottleneck, double bias) {
    return heaviside(relu(10.0 * bottleneck) * -1.0 + relu(-10.0 * bottleneck) * -1.0 + bias);
}

std::vector<double> ThresholdTable::all_thresholds() const {
    std::vector<double> out;
    for (const auto& n : neurons) out.insert(out.end(), n.thresholds.begin(), n.thresholds.end());
    std::sort(out.begin(), out.end());
    return out;
}

namespace {

void require_scalar_bottleneck(const MlpModel& model) {
    if (model.network.bottleneck_dim() != 1)
        throw std::invalid_argument("bottleneck has " + std::to_string(model.network.bottleneck_dim()) +
                                    " units; a scalar bottleneck is required");
}

Matrix column(const std::vector<double>& values) { return Matrix(values.size(), 1, values); }

}  // namespace

ThresholdTable extract_thresholds(const MlpModel& model, double bn_min, double bn_max, std::size_t resolution) {
    require_scalar_bottleneck(model);
    if (resolution < 2 || !(bn_max > bn_min)) throw std::invalid_argument("extract_thresholds: empty sweep");
    const Network step_net = with_heaviside_output(model.network);
    auto decode_at = [&step_net](double x) { return run_layers(step_net.decoder, Matrix(1, 1, x)); };

    ThresholdTable table;
    table.bn_min = bn_min;
    table.bn_max = bn_max;
    table.resolution = resolution;
    const double step = table.step();

    std::vector<double> grid(resolution);
    for (std::size_t i = 0; i < resolution; ++i) grid[i] = bn_min + static_cast<double>(i) * step;
    grid.back() = bn_max;
    const Matrix outputs = run_layers(step_net.decoder, column(grid));

    table.neurons.resize(outputs.cols());
    for (std::size_t k = 0; k < outputs.cols(); ++k) {
        auto& neuron = table.neurons[k];
        neuron.values.push_back(static_cast<int>(outputs(0, k)));
        for (std::size_t i = 1; i < resolution; ++i) {
            if (outputs(i, k) == outputs(i - 1, k)) continue;
            // Bisect: lo keeps the old value, hi the new one.
            double lo = grid[i - 1];
            double hi = grid[i];
            const double old_value = outputs(i - 1, k);
            for (int iter = 0; iter < 200 && hi - lo > 1e-12 * std::max(1.0, std::abs(hi)); ++iter) {
                const double mid = 0.5 * (lo + hi);
                if (decode_at(mid)(0, k) == old_value) lo = mid;
                else hi = mid;
            }
            neuron.thresholds.push_back(hi);
            neuron.values.push_back(static_cast<int>(outputs(i, k)));
        }
    }
    return table;
}

BlurSweep blur_sweep(const MlpModel& model, double window_lo, double window_hi, std::size_t steps, OutputMode mode) {
    require_scalar_bottleneck(model);
    if (steps < 2 || !(window_hi > window_lo)) throw std::invalid_argument("blur_sweep: empty window");
    BlurSweep sweep;
    sweep.bottlenecks.resize(steps);
    const double step = (window_hi - window_lo) / static_cast<double>(steps - 1);
    for (std::size_t i = 0; i < steps; ++i) sweep.bottlenecks[i] = window_lo + static_cast<double>(i) * step;
    sweep.bottlenecks.back() = window_hi;
    sweep.outputs = decode(model, column(sweep.bottlenecks), mode);
    return sweep;
}

// ---------------------------------------------------------------------------

BottleneckStats bottleneck_stats(const MlpModel& model, const Dataset& data, std::size_t bins) {
    if (!model.is_variational()) throw std::invalid_argument("bottleneck_stats: model has no variational head");
    require_scalar_bottleneck(model);
    if (bins == 0) throw std::invalid_argument("bottleneck_stats: need at least one bin");
    const Matrix hidden = run_layers(model.network.encoder, data.images);
    const Matrix a = model.network.head->mean_layer.forward(hidden);
    const Matrix b = model.network.head->logvar_layer.forward(hidden);

    BottleneckStats stats;
    const std::size_t n = a.rows();
    stats.histogram.assign(bins, 0);
    std::size_t inside = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double mean = a(i, 0);
        stats.means.push_back(mean);
        stats.stddevs.push_back(std::exp(0.5 * b(i, 0)));
        stats.mean_of_means += mean;
        if (mean >= -3.0 && mean <= 3.0) ++inside;
        const double pos = (mean - stats.histogram_lo) / (stats.histogram_hi - stats.histogram_lo);
        const auto bin = static_cast<long>(std::floor(pos * static_cast<double>(bins)));
        stats.histogram[static_cast<std::size_t>(std::clamp(bin, 0L, static_cast<long>(bins) - 1))]++;
    }
    if (n > 0) {
        stats.mean_of_means /= static_cast<double>(n);
        for (double m : stats.means) stats.variance_of_means += (m - stats.mean_of_means) * (m - stats.mean_of_means);
        stats.variance_of_means /= static_cast<double>(n);
        stats.fraction_within_3 = static_cast<double>(inside) / static_cast<double>(n);
    }
    return stats;
}

void write_bottleneck_csv(const BottleneckStats& stats, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "sample,mean,stddev\n";
    for (std::size_t i = 0; i < stats.means.size(); ++i)
        out << i << ',' << format_real(stats.means[i]) << ',' << format_real(stats.stddevs[i]) << '\n';
}

// ---------------------------------------------------------------------------

std::string_view to_string(Outcome outcome) {
    switch (outcome) {
        case Outcome::optimal: return "Optimal";
        case Outcome::pair_collapse: return "PairCollapse";
        case Outcome::double_pair_collapse: return "DoublePairCollapse";
        case Outcome::all_gray: return "AllGray";
        case Outcome::other: return "Other";
    }
    return "Other";
}

namespace {

std::size_t outcome_index(Outcome o) {
    return static_cast<std::size_t>(std::find(kAllOutcomes.begin(), kAllOutcomes.end(), o) - kAllOutcomes.begin());
}

double row_distance(const Matrix& a, std::size_t i, const Matrix& b, std::size_t j) {
    double worst = 0.0;
    for (std::size_t c = 0; c < a.cols(); ++c) worst = std::max(worst, std::abs(a(i, c) - b(j, c)));
    return worst;
}

struct QuadDiagnosis {
    Outcome outcome = Outcome::other;
    std::vector<std::size_t> pair;
};

QuadDiagnosis diagnose(const MlpModel& model, const Dataset& quad, const OutcomeTolerances& tol) {
    const Matrix& x = quad.images;
    const Matrix y = reconstruct(model, x, OutputMode::sigmoid);
    const std::size_t n = x.rows();

    std::vector<bool> correct(n);
    std::size_t n_correct = 0;
    for (std::size_t i = 0; i < n; ++i) {
        correct[i] = row_distance(y, i, x, i) <= tol.match_tol;
        n_correct += correct[i] ? 1 : 0;
    }
    if (n_correct == n) return {Outcome::optimal, {}};

    const bool gray = std::all_of(y.data().begin(), y.data().end(),
                                  [&tol](double v) { return std::abs(v - 0.5) <= tol.gray_tol; });
    if (gray) return {Outcome::all_gray, {}};

    // Pairs of wrong inputs that share a reconstruction.
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (!correct[i] && !correct[j] && row_distance(y, i, y, j) <= tol.match_tol) pairs.emplace_back(i, j);

    const std::size_t n_wrong = n - n_correct;
    if (n_wrong == 2 && pairs.size() == 1) return {Outcome::pair_collapse, {pairs[0].first, pairs[0].second}};
    if (n_wrong == 4 && pairs.size() == 2) {
        const auto [a, b] = pairs[0];
        const auto [c, d] = pairs[1];
        if (a != c && a != d && b != c && b != d) return {Outcome::double_pair_collapse, {}};
    }
    return {Outcome::other, {}};
}

}  // namespace

Outcome classify_outcome(const MlpModel& model, const Dataset& quad, const OutcomeTolerances& tol) {
    return diagnose(model, quad, tol).outcome;
}

std::vector<std::size_t> collapsed_inputs(const MlpModel& model, const Dataset& quad, const OutcomeTolerances& tol) {
    return diagnose(model, quad, tol).pair;
}

Matrix first_layer_activations(const MlpModel& model, const Matrix& images) {
    return model.network.encoder.front().forward(images);
}

Matrix third_layer_activations(const MlpModel& model, const Matrix& images) {
    return model.network.decoder.front().forward(encode(model, images));
}

std::size_t shared_dead_layer(const MlpModel& model, const Matrix& images, const std::vector<std::size_t>& inputs) {
    auto dead = [&inputs](const Matrix& h) {
        return !inputs.empty() && std::all_of(inputs.begin(), inputs.end(), [&h](std::size_t i) {
            return std::all_of(h.row(i).begin(), h.row(i).end(), [](double v) { return v == 0.0; });
        });
    };
    if (dead(first_layer_activations(model, images))) return 1;
    if (dead(third_layer_activations(model, images))) return 3;
    return 0;
}

double OutcomeReport::frequency(Outcome outcome) const { return frequencies[outcome_index(outcome)]; }

OutcomeReport seed_sweep(const SweepOptions& options, bool variational) {
    if (options.n_seeds < 1) throw std::invalid_argument("seed_sweep: need at least one seed");
    const Dataset quad = gen_quad_dataset();
    OutcomeReport report;
    report.architecture = variational ? "va" : "ca";
    report.runs.resize(options.n_seeds);

    auto run_one = [&](std::size_t index) {
        SeedOutcome& result = report.runs[index];
        result.seed = options.first_seed + index;
        RngStream init_rng(result.seed);
        MlpModel model = variational ? build_va(2, 2, init_rng, options.architecture)
                                     : build_ca(2, 2, init_rng, options.architecture);
        TrainConfig cfg = options.train;
        cfg.seed = result.seed;
        cfg.loss = variational ? LossKind::variational : LossKind::mse;
        cfg.log_every = 0;
        try {
            result.final_loss = train(model, quad, cfg).final_loss;
        } catch (const NumericError&) {
            result.diverged = true;
            result.outcome = Outcome::other;
            return;
        }
        const QuadDiagnosis d = diagnose(model, quad, options.tolerances);
        result.outcome = d.outcome;
        if (d.outcome == Outcome::pair_collapse) {
            result.dead_layer = shared_dead_layer(model, quad.images, d.pair);
            result.dead_layer_mechanism = result.dead_layer != 0;
        }
    };

    std::size_t threads = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = std::min(threads, options.n_seeds);
    if (threads <= 1) {
        for (std::size_t i = 0; i < options.n_seeds; ++i) run_one(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < threads; ++t) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < options.n_seeds; i = next++) run_one(i);
            });
        }
        for (auto& th : pool) th.join();
    }

    for (const auto& run : report.runs) {
        const std::size_t k = outcome_index(run.outcome);
        report.frequencies[k] += 1.0;
        report.seeds_by_outcome[k].push_back(run.seed);
    }
    for (double& f : report.frequencies) f /= static_cast<double>(options.n_seeds);
    return report;
}

void write_outcomes_csv(const OutcomeReport& report, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "arch,seed,outcome,final_loss,diverged,dead_layer\n";
    for (const auto& r : report.runs) {
        out << report.architecture << ',' << r.seed << ',' << to_string(r.outcome) << ',' << format_real(r.final_loss)
            << ',' << (r.diverged ? 1 : 0) << ',' << r.dead_layer << '\n';
    }
}

void write_frequencies_csv(const OutcomeReport& report, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "arch,outcome,frequency,count\n";
    for (std::size_t k = 0; k < kAllOutcomes.size(); ++k) {
        out << report.architecture << ',' << to_string(kAllOutcomes[k]) << ',' << format_real(report.frequencies[k])
            << ',' << report.seeds_by_outcome[k].size() << '\n';
    }
}

// ---------------------------------------------------------------------------

InitProbabilities init_probability_oracle(std::size_t trials, RngStream& rng, const InitScheme& scheme) {
    if (trials < 1) throw std::invalid_argument("init_probability_oracle: need at least one trial");
    const Dataset quad = gen_quad_dataset();
    const ArchitectureOptions arch{2, 1, scheme};

    auto dead_rows = [&quad](const MlpModel& m) {
        const Matrix pre = m.network.encoder.front().pre_activation(quad.images);
        std::array<bool, 4> dead{};
        for (std::size_t i = 0; i < 4; ++i) dead[i] = pre(i, 0) < 0.0 && pre(i, 1) < 0.0;
        return dead;
    };

    std::size_t input_dead = 0;
    std::size_t two_dead = 0;
    std::size_t blocked = 0;
    std::size_t two_dead_independent = 0;
    for (std::size_t t = 0; t < trials; ++t) {
        const MlpModel m = build_ca(2, 2, rng, arch);
        const auto dead = dead_rows(m);
        input_dead += dead[0] ? 1 : 0;
        two_dead += std::count(dead.begin(), dead.end(), true) >= 2 ? 1 : 0;

        const Matrix& to_bn = m.network.encoder[1].weights;    // 2 x 1
        const Matrix& from_bn = m.network.decoder[0].weights;  // 1 x 2
        const bool enc_neg = to_bn(0, 0) < 0.0 && to_bn(1, 0) < 0.0;
        const bool enc_pos = to_bn(0, 0) > 0.0 && to_bn(1, 0) > 0.0;
        const bool dec_neg = from_bn(0, 0) < 0.0 && from_bn(0, 1) < 0.0;
        const bool dec_pos = from_bn(0, 0) > 0.0 && from_bn(0, 1) > 0.0;
        blocked += (enc_neg && dec_pos) || (enc_pos && dec_neg) ? 1 : 0;

        std::size_t independent = 0;
        for (std::size_t i = 0; i < 4; ++i) independent += dead_rows(build_ca(2, 2, rng, arch))[i] ? 1 : 0;
        two_dead_independent += independent >= 2 ? 1 : 0;
    }
    const double n = static_cast<double>(trials);
    return {trials, static_cast<double>(input_dead) / n, static_cast<double>(two_dead) / n,
            static_cast<double>(blocked) / n, static_cast<double>(two_dead_independent) / n};
}

}  // namespace aelab
