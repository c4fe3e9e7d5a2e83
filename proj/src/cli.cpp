#include "aelab/cli.hpp"

#include "aelab/analysis.hpp"
#include "aelab/anomaly.hpp"
#include "aelab/errors.hpp"
#include "aelab/image_io.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <set>

namespace fs = std::filesystem;

namespace aelab::cli {

namespace {

/// A usage problem detected after parsing (bad value, missing input file).
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

/// Fully resolved settings of one run, written next to its outputs.
class RunRecord {
public:
    explicit RunRecord(std::string command) { add("command", std::move(command)); }

    void add(const std::string& key, std::string value) { entries_.emplace_back(key, std::move(value)); }
    void add(const std::string& key, double value) { add(key, format_real(value)); }
    void add(const std::string& key, std::size_t value) { add(key, std::to_string(value)); }
    void add(const std::string& key, std::uint64_t value, int) { add(key, std::to_string(value)); }

    void write(const fs::path& path) const {
        if (path.has_parent_path()) fs::create_directories(path.parent_path());
        std::ofstream out(path);
        if (!out) throw std::runtime_error("cannot write " + path.string());
        out << "# resolved run configuration; rerun with: aelab --config " << path.filename().string() << '\n';
        for (const auto& [k, v] : entries_) out << k << '=' << v << '\n';
    }

private:
    std::vector<std::pair<std::string, std::string>> entries_;
};

std::string stamp(const std::string& stem, std::uint64_t seed, const std::string& ext) {
    return stem + "_s" + std::to_string(seed) + ext;
}

Dataset require_dataset(const std::string& dir) {
    if (!fs::exists(fs::path(dir) / "dataset.txt")) throw UsageError("no dataset found at '" + dir + "'");
    return load_dataset(dir);
}

MlpModel require_model(const std::string& path) {
    if (!fs::exists(path)) throw UsageError("model file '" + path + "' does not exist");
    return load_model(fs::path(path));
}

template <typename Parse>
auto parse_choice(const std::string& flag, const std::string& value, Parse parse) {
    try {
        return parse(value);
    } catch (const std::invalid_argument& e) {
        throw UsageError(flag + ": " + e.what());
    }
}

void write_frames(const fs::path& dir, const std::string& prefix, const Matrix& rows, std::size_t height,
                  std::size_t width) {
    fs::create_directories(dir);
    char name[64];
    for (std::size_t i = 0; i < rows.rows(); ++i) {
        std::snprintf(name, sizeof name, "%s_%05zu.pgm", prefix.c_str(), i);
        write_pgm(dir / name, rows.row(i), height, width);
    }
}

// ---------------------------------------------------------------------------

struct GenDataArgs {
    std::string kind = "line";
    std::string anomaly_kind = "noise";
    std::size_t n = 1000;
    std::size_t size = 32;
    std::uint64_t seed = 0;
    std::string out;
    bool no_pgm = false;
};

int cmd_gen_data(const GenDataArgs& a, std::ostream& out) {
    if (a.n < 1) throw UsageError("--n must be >= 1");
    if (a.size < 2) throw UsageError("--size must be >= 2");
    RngStream rng(a.seed);
    Dataset data;
    if (a.kind == "line") data = gen_line_dataset(a.n, a.size, rng);
    else if (a.kind == "quad") data = gen_quad_dataset();
    else if (a.kind == "anomaly")
        data = gen_anomaly_dataset(a.n, a.size, rng, parse_choice("--anomaly-kind", a.anomaly_kind, parse_anomaly_kind));
    else throw UsageError("--kind must be line, quad or anomaly");
    save_dataset(data, a.out, !a.no_pgm);

    RunRecord rec("gen-data");
    rec.add("kind", a.kind);
    rec.add("anomaly-kind", a.anomaly_kind);
    rec.add("n", a.n);
    rec.add("size", a.size);
    rec.add("seed", a.seed, 0);
    rec.add("out", a.out);
    rec.add("no-pgm", std::string(a.no_pgm ? "true" : "false"));
    rec.write(fs::path(a.out) / "run_config.txt");
    out << "wrote " << data.size() << " " << data.height << "x" << data.width << " images (" << data.name << ") to "
        << a.out << '\n';
    return kExitOk;
}

// ---------------------------------------------------------------------------

struct TrainArgs {
    std::string arch = "ca";
    std::string data;
    std::size_t epochs = 0;
    double lr = 0.0;
    double momentum = 0.9;
    std::size_t batch = 0;
    std::uint64_t seed = 0;
    double kl_weight = 1e-3;
    std::size_t kl_warmup = 0;
    std::string optimizer = "sgd";
    std::size_t hidden = 2;
    std::size_t restarts = 1;
    std::size_t log_every = 1;
    std::string out_model;
    CLI::Option* kl_opt = nullptr;
    CLI::Option* warmup_opt = nullptr;
    CLI::Option* optimizer_opt = nullptr;
    CLI::Option* momentum_opt = nullptr;
    std::string report;
    CLI::Option* epochs_opt = nullptr;
    CLI::Option* lr_opt = nullptr;
    CLI::Option* batch_opt = nullptr;
};

int cmd_train(const TrainArgs& a, std::ostream& out) {
    if (a.arch != "ca" && a.arch != "va") throw UsageError("--arch must be ca or va");
    const Dataset data = require_dataset(a.data);
    const bool variational = a.arch == "va";
    TrainConfig cfg = default_train_config(data, variational, a.seed);
    if (a.epochs_opt->count()) cfg.epochs = a.epochs;
    if (a.lr_opt->count()) cfg.learning_rate = a.lr;
    if (a.batch_opt->count()) cfg.batch_size = a.batch;
    if (a.momentum_opt->count()) cfg.momentum = a.momentum;
    if (a.kl_opt->count()) cfg.kl_weight = a.kl_weight;
    if (a.warmup_opt->count()) cfg.kl_warmup_epochs = a.kl_warmup;
    if (a.optimizer_opt->count()) cfg.optimizer = parse_choice("--optimizer", a.optimizer, parse_optimizer);
    cfg.log_every = a.log_every;
    try {
        cfg.validate(data.size());
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }

    if (a.restarts < 1) throw UsageError("--restarts must be >= 1");
    ArchitectureOptions arch;
    arch.hidden = a.hidden;
    RestartResult result = train_with_restarts(data, cfg, a.restarts, arch);
    const MlpModel& model = result.model;
    const TrainReport& report = result.report;

    const fs::path model_path(a.out_model);
    if (model_path.has_parent_path()) fs::create_directories(model_path.parent_path());
    save_model(model, model_path);
    const std::string report_path = a.report.empty() ? a.out_model + ".report.csv" : a.report;
    write_report_csv(report, report_path);

    RunRecord rec("train");
    rec.add("arch", a.arch);
    rec.add("data", a.data);
    rec.add("epochs", cfg.epochs);
    rec.add("lr", cfg.learning_rate);
    rec.add("momentum", cfg.momentum);
    rec.add("batch", cfg.batch_size);
    rec.add("seed", cfg.seed, 0);
    rec.add("kl-weight", cfg.kl_weight);
    rec.add("kl-warmup", cfg.kl_warmup_epochs);
    rec.add("optimizer", std::string(to_string(cfg.optimizer)));
    rec.add("hidden", a.hidden);
    rec.add("restarts", a.restarts);
    rec.add("log-every", cfg.log_every);
    rec.add("out-model", a.out_model);
    rec.add("report", report_path);
    rec.write(a.out_model + ".run_config.txt");

    const LossBreakdown final_eval = evaluate_loss(model, data, variational ? cfg.kl_weight : 0.0);
    out << "trained " << a.arch << " on " << data.name << " (" << data.size() << " samples) for " << cfg.epochs
        << " epochs\n"
        << "selected seed: " << cfg.seed + result.selected << " of " << a.restarts << " restart(s)\n"
        << "final training loss: " << format_real(report.final_loss) << '\n'
        << "inference mse: " << format_real(final_eval.mse) << '\n';
    if (variational) out << "inference kl: " << format_real(final_eval.kl) << '\n';
    return kExitOk;
}

// ---------------------------------------------------------------------------

struct ReconstructArgs {
    std::string model;
    std::string data;
    std::string mode = "sigmoid";
    std::uint64_t seed = 0;
    CLI::Option* seed_opt = nullptr;
    std::string out;
};

int cmd_reconstruct(const ReconstructArgs& a, std::ostream& out) {
    const MlpModel model = require_model(a.model);
    const Dataset data = require_dataset(a.data);
    const OutputMode mode = parse_choice("--mode", a.mode, parse_output_mode);
    if (data.pixels() != model.pixels()) throw UsageError("dataset image shape does not match the model");
    const std::optional<std::uint64_t> seed = a.seed_opt->count() ? std::optional(a.seed) : std::nullopt;
    const Matrix recon = reconstruct(model, data.images, mode, seed);

    const fs::path dir(a.out);
    fs::create_directories(dir);
    write_csv(dir / "reconstructions.csv", recon);
    write_frames(dir / "images", "recon", recon, data.height, data.width);

    std::size_t exact = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        exact += std::equal(recon.row(i).begin(), recon.row(i).end(), data.images.row(i).begin()) ? 1 : 0;
    }
    RunRecord rec("reconstruct");
    rec.add("model", a.model);
    rec.add("data", a.data);
    rec.add("mode", a.mode);
    if (seed) rec.add("seed", *seed, 0);
    rec.add("out", a.out);
    rec.write(dir / "run_config.txt");
    out << "mode: " << a.mode << '\n'
        << "mse: " << format_real(mse_loss(recon, data.images)) << '\n'
        << "exact_copies: " << exact << '/' << data.size() << '\n';
    return kExitOk;
}

// ---------------------------------------------------------------------------

struct InspectArgs {
    std::string model;
    std::string data;
    double bn_min = -20.0;
    double bn_max = 20.0;
    std::size_t resolution = 4001;
    double threshold = 1.5;
    double window = 0.5;
    std::size_t steps = 21;
    std::string mode = "sigmoid";
    std::uint64_t seed = 0;
    std::string out;
};

int cmd_inspect(const InspectArgs& a, std::ostream& out) {
    const MlpModel model = require_model(a.model);
    if (model.network.bottleneck_dim() != 1) throw UsageError("inspect requires a one-unit bottleneck");
    if (a.resolution < 2 || a.steps < 2 || !(a.bn_max > a.bn_min) || !(a.window > 0.0))
        throw UsageError("empty sweep range");
    const OutputMode mode = parse_choice("--mode", a.mode, parse_output_mode);
    const fs::path dir(a.out);
    fs::create_directories(dir);

    const ThresholdTable table = extract_thresholds(model, a.bn_min, a.bn_max, a.resolution);
    {
        std::ofstream csv(dir / stamp("thresholds", a.seed, ".csv"));
        csv << "neuron,threshold,value_below,value_above\n";
        for (std::size_t k = 0; k < table.neurons.size(); ++k) {
            const auto& n = table.neurons[k];
            for (std::size_t t = 0; t < n.thresholds.size(); ++t)
                csv << k << ',' << format_real(n.thresholds[t]) << ',' << n.values[t] << ',' << n.values[t + 1] << '\n';
        }
    }
    out << "thresholds (heaviside output, sweep [" << format_real(a.bn_min) << ", " << format_real(a.bn_max) << "], "
        << a.resolution << " points):\n";
    for (std::size_t k = 0; k < table.neurons.size(); ++k) {
        const auto& n = table.neurons[k];
        out << "  output " << k + 1 << ": " << n.values[0];
        for (std::size_t t = 0; t < n.thresholds.size(); ++t)
            out << " |" << format_real(n.thresholds[t]) << "| " << n.values[t + 1];
        out << '\n';
    }

    const BlurSweep sweep = blur_sweep(model, a.threshold - a.window, a.threshold + a.window, a.steps, mode);
    {
        std::ofstream csv(dir / stamp("blur", a.seed, ".csv"));
        csv << "bottleneck";
        for (std::size_t c = 0; c < sweep.outputs.cols(); ++c) csv << ",out" << c + 1;
        csv << '\n';
        for (std::size_t i = 0; i < sweep.bottlenecks.size(); ++i) {
            csv << format_real(sweep.bottlenecks[i]);
            for (double v : sweep.outputs.row(i)) csv << ',' << format_real(v);
            csv << '\n';
        }
    }
    write_frames(dir / stamp("blur", a.seed, ""), "frame", sweep.outputs, model.input_height, model.input_width);
    out << "blur sweep: " << a.steps << " frames around " << format_real(a.threshold) << '\n';

    RunRecord rec("inspect");
    rec.add("model", a.model);
    rec.add("data", a.data);
    rec.add("bn-min", a.bn_min);
    rec.add("bn-max", a.bn_max);
    rec.add("resolution", a.resolution);
    rec.add("threshold", a.threshold);
    rec.add("window", a.window);
    rec.add("steps", a.steps);
    rec.add("mode", a.mode);
    rec.add("seed", a.seed, 0);
    rec.add("out", a.out);

    if (model.is_variational() && !a.data.empty()) {
        const Dataset data = require_dataset(a.data);
        const BottleneckStats stats = bottleneck_stats(model, data);
        write_bottleneck_csv(stats, dir / stamp("bottleneck", a.seed, ".csv"));
        const double max_std = *std::max_element(stats.stddevs.begin(), stats.stddevs.end());
        out << "bottleneck mean of means: " << format_real(stats.mean_of_means) << '\n'
            << "bottleneck variance of means: " << format_real(stats.variance_of_means) << '\n'
            << "fraction of means in [-3, 3]: " << format_real(stats.fraction_within_3) << '\n'
            << "max stddev: " << format_real(max_std) << '\n';
    }
    rec.write(dir / "run_config.txt");
    return kExitOk;
}

// ---------------------------------------------------------------------------

struct SweepArgs {
    std::size_t n_seeds = 200;
    std::uint64_t first_seed = 0;
    std::string arch = "ca";
    std::size_t epochs = 5000;
    double lr = 0.1;
    double momentum = 0.9;
    double kl_weight = 1e-3;
    std::string optimizer = "sgd";
    double gray_tol = 0.15;
    double match_tol = 0.05;
    std::size_t threads = 0;
    std::string out;
};

int cmd_sweep(const SweepArgs& a, std::ostream& out) {
    if (a.arch != "ca" && a.arch != "va" && a.arch != "both") throw UsageError("--arch must be ca, va or both");
    if (a.n_seeds < 1) throw UsageError("--n-seeds must be >= 1");
    SweepOptions opts;
    opts.n_seeds = a.n_seeds;
    opts.first_seed = a.first_seed;
    opts.train.epochs = a.epochs;
    opts.train.learning_rate = a.lr;
    opts.train.momentum = a.momentum;
    opts.train.kl_weight = a.kl_weight;
    opts.train.optimizer = parse_choice("--optimizer", a.optimizer, parse_optimizer);
    opts.tolerances = {a.gray_tol, a.match_tol};
    opts.threads = a.threads;
    try {
        opts.train.validate(4);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    const fs::path dir(a.out);
    fs::create_directories(dir);

    std::vector<bool> archs;
    if (a.arch != "va") archs.push_back(false);
    if (a.arch != "ca") archs.push_back(true);
    for (bool variational : archs) {
        const OutcomeReport report = seed_sweep(opts, variational);
        write_outcomes_csv(report, dir / stamp("outcomes_" + report.architecture, a.first_seed, ".csv"));
        write_frequencies_csv(report, dir / stamp("frequencies_" + report.architecture, a.first_seed, ".csv"));
        out << report.architecture << " over " << a.n_seeds << " seeds:\n";
        for (Outcome o : kAllOutcomes) out << "  " << to_string(o) << ": " << format_real(report.frequency(o)) << '\n';
    }

    RunRecord rec("sweep");
    rec.add("n-seeds", a.n_seeds);
    rec.add("first-seed", a.first_seed, 0);
    rec.add("arch", a.arch);
    rec.add("epochs", a.epochs);
    rec.add("lr", a.lr);
    rec.add("momentum", a.momentum);
    rec.add("kl-weight", a.kl_weight);
    rec.add("optimizer", a.optimizer);
    rec.add("gray-tol", a.gray_tol);
    rec.add("match-tol", a.match_tol);
    rec.add("threads", a.threads);
    rec.add("out", a.out);
    rec.write(dir / "run_config.txt");
    return kExitOk;
}

// ---------------------------------------------------------------------------

struct ProbeArgs {
    std::size_t trials = 100000;
    std::uint64_t seed = 0;
    std::string out;
};

int cmd_probe_init(const ProbeArgs& a, std::ostream& out) {
    if (a.trials < 1) throw UsageError("--trials must be >= 1");
    RngStream rng(a.seed);
    const InitProbabilities p = init_probability_oracle(a.trials, rng);
    out << "trials: " << p.trials << '\n'
        << "p_input_dead: " << format_real(p.p_input_dead) << '\n'
        << "p_two_inputs_dead: " << format_real(p.p_two_inputs_dead) << '\n'
        << "p_decoder_blocked: " << format_real(p.p_decoder_blocked) << '\n'
        << "p_two_inputs_dead_independent: " << format_real(p.p_two_inputs_dead_independent) << '\n';
    if (!a.out.empty()) {
        const fs::path dir(a.out);
        fs::create_directories(dir);
        std::ofstream csv(dir / stamp("probabilities", a.seed, ".csv"));
        csv << "quantity,estimate,trials\n"
            << "p_input_dead," << format_real(p.p_input_dead) << ',' << p.trials << '\n'
            << "p_two_inputs_dead," << format_real(p.p_two_inputs_dead) << ',' << p.trials << '\n'
            << "p_decoder_blocked," << format_real(p.p_decoder_blocked) << ',' << p.trials << '\n'
            << "p_two_inputs_dead_independent," << format_real(p.p_two_inputs_dead_independent) << ',' << p.trials
            << '\n';
        RunRecord rec("probe-init");
        rec.add("trials", a.trials);
        rec.add("seed", a.seed, 0);
        rec.add("out", a.out);
        rec.write(dir / "run_config.txt");
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------

struct ScoreArgs {
    std::string model;
    std::string clean;
    std::string anomalous;
    double quantile = 0.99;
    std::string out;
};

int cmd_score(const ScoreArgs& a, std::ostream& out) {
    if (!(a.quantile > 0.0 && a.quantile < 1.0)) throw UsageError("--quantile must be in (0, 1)");
    const MlpModel model = require_model(a.model);
    const Dataset clean = require_dataset(a.clean);
    const Dataset anomalous = require_dataset(a.anomalous);
    if (clean.pixels() != model.pixels() || anomalous.pixels() != model.pixels())
        throw UsageError("dataset image shape does not match the model");
    const AnomalyScorecard card = evaluate(model, clean, anomalous, a.quantile);
    const fs::path dir(a.out);
    fs::create_directories(dir);
    write_scorecard_csv(card, dir / "scorecard.csv");
    const std::string summary = scorecard_summary(card);
    {
        std::ofstream s(dir / "summary.txt");
        s << summary;
    }
    RunRecord rec("score");
    rec.add("model", a.model);
    rec.add("clean", a.clean);
    rec.add("anomalous", a.anomalous);
    rec.add("quantile", a.quantile);
    rec.add("out", a.out);
    rec.write(dir / "run_config.txt");
    out << summary;
    return kExitOk;
}

// ---------------------------------------------------------------------------

const std::set<std::string> kCommands = {"gen-data", "train", "reconstruct", "inspect", "sweep", "probe-init", "score"};

// Splices key=value pairs from --config files into the argument list. Values
// given on the command line win; a config's `command` key supplies the
// subcommand when none is given.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
    std::vector<std::string> rest;
    std::vector<std::pair<std::string, std::string>> config;
    for (std::size_t i = 0; i < args.size(); ++i) {
        std::string path;
        if (args[i] == "--config") {
            if (i + 1 >= args.size()) throw CLI::ArgumentMismatch("--config requires a file");
            path = args[++i];
        } else if (args[i].rfind("--config=", 0) == 0) {
            path = args[i].substr(9);
        } else {
            rest.push_back(args[i]);
            continue;
        }
        auto entries = read_config_file(path);
        config.insert(config.end(), entries.begin(), entries.end());
    }
    if (config.empty()) return rest;

    std::set<std::string> given;
    for (const auto& a : rest) {
        if (a.rfind("--", 0) == 0) given.insert(a.substr(2, a.find('=') == std::string::npos ? std::string::npos : a.find('=') - 2));
    }
    const bool has_command = !rest.empty() && kCommands.count(rest.front());
    std::vector<std::string> expanded;
    if (!has_command) {
        for (const auto& [k, v] : config)
            if (k == "command") {
                expanded.push_back(v);
                break;
            }
    } else {
        expanded.push_back(rest.front());
        rest.erase(rest.begin());
    }
    for (const auto& [k, v] : config) {
        if (k == "command" || given.count(k)) continue;
        if (v == "true") expanded.push_back("--" + k);
        else if (v == "false" || v.empty()) continue;
        else {
            expanded.push_back("--" + k);
            expanded.push_back(v);
        }
    }
    expanded.insert(expanded.end(), rest.begin(), rest.end());
    return expanded;
}

}  // namespace

std::vector<std::pair<std::string, std::string>> read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot read config file '" + path + "'");
    std::vector<std::pair<std::string, std::string>> entries;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ParseError(line_no, path + ": expected key=value");
        entries.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return entries;
}

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Classical and variational autoencoder laboratory", "aelab"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all");
    app.add_option("--config", "key=value file supplying defaults for any flag");

    GenDataArgs gen;
    auto* gen_cmd = app.add_subcommand("gen-data", "Generate a dataset (PGM + CSV + labels)");
    gen_cmd->add_option("--kind", gen.kind, "line, quad or anomaly")->capture_default_str();
    gen_cmd->add_option("--anomaly-kind", gen.anomaly_kind, "blob_defect, noise or double_line")->capture_default_str();
    gen_cmd->add_option("--n", gen.n, "number of images")->capture_default_str();
    gen_cmd->add_option("--size", gen.size, "image side length")->capture_default_str();
    gen_cmd->add_option("--seed", gen.seed, "random seed")->capture_default_str();
    gen_cmd->add_option("--out", gen.out, "output directory")->required();
    gen_cmd->add_flag("--no-pgm", gen.no_pgm, "skip the per-image PGM files");

    TrainArgs tr;
    auto* train_cmd = app.add_subcommand("train", "Train a classical (ca) or variational (va) autoencoder");
    train_cmd->add_option("--arch", tr.arch, "ca or va")->capture_default_str();
    train_cmd->add_option("--data", tr.data, "dataset directory")->required();
    tr.epochs_opt = train_cmd->add_option("--epochs", tr.epochs, "epochs (default 5000 quad, 800 otherwise)");
    tr.lr_opt = train_cmd->add_option("--lr", tr.lr, "learning rate (default 0.1 quad, 0.01 otherwise)");
    tr.momentum_opt = train_cmd->add_option("--momentum", tr.momentum, "momentum (default 0.9; adam beta1)");
    tr.batch_opt = train_cmd->add_option("--batch", tr.batch, "mini-batch size (default full batch quad, 32 otherwise)");
    train_cmd->add_option("--seed", tr.seed, "seed for init, shuffling and sampling")->capture_default_str();
    tr.kl_opt = train_cmd->add_option("--kl-weight", tr.kl_weight, "weight of the KL term (va; dataset default)");
    tr.warmup_opt = train_cmd->add_option("--kl-warmup", tr.kl_warmup, "epochs over which the KL weight ramps up");
    tr.optimizer_opt = train_cmd->add_option("--optimizer", tr.optimizer, "sgd or adam (dataset default)");
    train_cmd->add_option("--hidden", tr.hidden, "hidden layer width")->capture_default_str();
    train_cmd->add_option("--restarts", tr.restarts, "train seeds seed..seed+k-1, keep the lowest loss")
        ->capture_default_str();
    train_cmd->add_option("--log-every", tr.log_every, "report every n-th epoch")->capture_default_str();
    train_cmd->add_option("--out-model", tr.out_model, "model file to write")->required();
    train_cmd->add_option("--report", tr.report, "training report CSV (default <out-model>.report.csv)");

    ReconstructArgs rc;
    auto* rec_cmd = app.add_subcommand("reconstruct", "Reconstruct a dataset");
    rec_cmd->add_option("--model", rc.model, "model file")->required();
    rec_cmd->add_option("--data", rc.data, "dataset directory")->required();
    rec_cmd->add_option("--mode", rc.mode, "sigmoid or heaviside")->capture_default_str();
    rc.seed_opt = rec_cmd->add_option("--seed", rc.seed, "sample the VA bottleneck with this seed");
    rec_cmd->add_option("--out", rc.out, "output directory")->required();

    InspectArgs in;
    auto* inspect_cmd = app.add_subcommand("inspect", "Decoder thresholds, blur sweep and bottleneck statistics");
    inspect_cmd->add_option("--model", in.model, "model file")->required();
    inspect_cmd->add_option("--data", in.data, "dataset for bottleneck statistics (va)");
    inspect_cmd->add_option("--bn-min", in.bn_min, "threshold sweep start")->capture_default_str();
    inspect_cmd->add_option("--bn-max", in.bn_max, "threshold sweep end")->capture_default_str();
    inspect_cmd->add_option("--resolution", in.resolution, "threshold sweep points")->capture_default_str();
    inspect_cmd->add_option("--threshold", in.threshold, "centre of the blur sweep")->capture_default_str();
    inspect_cmd->add_option("--window", in.window, "half-width of the blur sweep")->capture_default_str();
    inspect_cmd->add_option("--steps", in.steps, "blur sweep frames")->capture_default_str();
    inspect_cmd->add_option("--mode", in.mode, "blur sweep output mode")->capture_default_str();
    inspect_cmd->add_option("--seed", in.seed, "stamp for output filenames")->capture_default_str();
    inspect_cmd->add_option("--out", in.out, "output directory")->required();

    SweepArgs sw;
    auto* sweep_cmd = app.add_subcommand("sweep", "Train many quad models and tabulate convergence outcomes");
    sweep_cmd->add_option("--n-seeds", sw.n_seeds, "number of seeds")->capture_default_str();
    sweep_cmd->add_option("--first-seed", sw.first_seed, "first seed")->capture_default_str();
    sweep_cmd->add_option("--arch", sw.arch, "ca, va or both")->capture_default_str();
    sweep_cmd->add_option("--epochs", sw.epochs, "epochs per run")->capture_default_str();
    sweep_cmd->add_option("--lr", sw.lr, "learning rate")->capture_default_str();
    sweep_cmd->add_option("--momentum", sw.momentum, "momentum")->capture_default_str();
    sweep_cmd->add_option("--kl-weight", sw.kl_weight, "weight of the KL term (va)")->capture_default_str();
    sweep_cmd->add_option("--optimizer", sw.optimizer, "sgd or adam")->capture_default_str();
    sweep_cmd->add_option("--gray-tol", sw.gray_tol, "AllGray tolerance around 0.5")->capture_default_str();
    sweep_cmd->add_option("--match-tol", sw.match_tol, "per-pixel match tolerance")->capture_default_str();
    sweep_cmd->add_option("--threads", sw.threads, "worker threads (0 = all cores)")->capture_default_str();
    sweep_cmd->add_option("--out", sw.out, "output directory")->required();

    ProbeArgs pr;
    auto* probe_cmd = app.add_subcommand("probe-init", "Monte-Carlo dead-unit probabilities at initialisation");
    probe_cmd->add_option("--trials", pr.trials, "number of random initialisations")->capture_default_str();
    probe_cmd->add_option("--seed", pr.seed, "random seed")->capture_default_str();
    probe_cmd->add_option("--out", pr.out, "optional output directory");

    ScoreArgs sc;
    auto* score_cmd = app.add_subcommand("score", "Reconstruction-error anomaly detection");
    score_cmd->add_option("--model", sc.model, "model file")->required();
    score_cmd->add_option("--clean", sc.clean, "clean dataset directory")->required();
    score_cmd->add_option("--anomalous", sc.anomalous, "anomalous dataset directory")->required();
    score_cmd->add_option("--quantile", sc.quantile, "clean-score quantile used as threshold")->capture_default_str();
    score_cmd->add_option("--out", sc.out, "output directory")->required();

    try {
        std::vector<std::string> args = expand_config(raw_args);
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return kExitUsage;
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }

    try {
        if (*gen_cmd) return cmd_gen_data(gen, out);
        if (*train_cmd) return cmd_train(tr, out);
        if (*rec_cmd) return cmd_reconstruct(rc, out);
        if (*inspect_cmd) return cmd_inspect(in, out);
        if (*sweep_cmd) return cmd_sweep(sw, out);
        if (*probe_cmd) return cmd_probe_init(pr, out);
        if (*score_cmd) return cmd_score(sc, out);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const NumericError& e) {
        err << "numeric failure: " << e.what() << '\n';
        return kExitNumeric;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
    return kExitUsage;
}

}  // namespace aelab::cli
