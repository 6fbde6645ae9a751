// phaseflow - data-driven dynamical systems workbench.
//
// Subcommands: generate, train, sindy, eval. Every command prints exactly one
// JSON summary line on stdout; progress and diagnostics go to stderr.
// Exit codes: 0 ok, 2 configuration/usage error, 3 numerical failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <complex>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "phaseflow/eval.hpp"
#include "phaseflow/io.hpp"
#include "phaseflow/net.hpp"
#include "phaseflow/sindy.hpp"
#include "phaseflow/spectral.hpp"
#include "phaseflow/systems.hpp"
#include "phaseflow/train.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace phaseflow;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

void print_summary(const json& j) { std::cout << j.dump() << std::endl; }

/// Scalar options may come from both a config file and the command line; the
/// later (command line) occurrence wins.
void allow_overrides(CLI::App& app) {
    for (CLI::Option* opt : app.get_options())
        if (opt->get_expected_max() == 1)
            opt->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
}

std::vector<double> parse_state(const std::string& text) {
    std::vector<double> out;
    std::string cleaned;
    for (char c : text)
        if (c != '<' && c != '>' && c != '(' && c != ')' && c != '[' && c != ']' && c != ' ')
            cleaned += c;
    std::stringstream ss(cleaned);
    std::string token;
    while (std::getline(ss, token, ',')) {
        try {
            std::size_t pos = 0;
            out.push_back(std::stod(token, &pos));
            if (pos != token.size()) throw std::invalid_argument(token);
        } catch (const std::exception&) {
            throw ConfigError("cannot parse state component '" + token + "'");
        }
    }
    if (out.empty()) throw ConfigError("empty state vector");
    return out;
}

std::vector<std::pair<double, double>> parse_bounds(const std::string& text) {
    // "lo1:hi1,lo2:hi2"
    std::vector<std::pair<double, double>> out;
    std::stringstream ss(text);
    std::string token;
    while (std::getline(ss, token, ',')) {
        const auto colon = token.find(':');
        if (colon == std::string::npos)
            throw ConfigError("bounds must look like lo1:hi1,lo2:hi2");
        try {
            out.emplace_back(std::stod(token.substr(0, colon)),
                             std::stod(token.substr(colon + 1)));
        } catch (const std::exception&) {
            throw ConfigError("cannot parse bounds '" + token + "'");
        }
    }
    if (out.empty()) throw ConfigError("empty bounds");
    return out;
}

std::vector<std::size_t> parse_layers(const std::string& text) {
    std::vector<std::size_t> out;
    std::stringstream ss(text);
    std::string token;
    while (std::getline(ss, token, '-')) {
        try {
            const long v = std::stol(token);
            if (v < 1) throw std::invalid_argument(token);
            out.push_back(static_cast<std::size_t>(v));
        } catch (const std::exception&) {
            throw ConfigError("cannot parse layer structure '" + text + "'");
        }
    }
    if (out.size() < 2) throw ConfigError("layer structure needs at least two layers");
    return out;
}

/// Config file support: the JSON file holds one object per subcommand; its
/// entries become argv-style flags injected before the real command line so
/// explicit flags win. Unknown keys are rejected.
std::vector<std::string> config_args(const fs::path& path, const std::string& section,
                                     const std::vector<std::string>& known_keys) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    if (!j.contains(section)) return {};
    const json& sec = j[section];
    if (!sec.is_object())
        throw ConfigError(path.string() + ": section '" + section + "' must be an object");
    std::vector<std::string> args;
    for (const auto& [key, value] : sec.items()) {
        if (std::find(known_keys.begin(), known_keys.end(), key) == known_keys.end())
            throw ConfigError(path.string() + ": unknown key '" + key + "' in section '" +
                              section + "'");
        if (value.is_array()) {
            for (const auto& item : value) {
                args.push_back("--" + key);
                args.push_back(item.is_string() ? item.get<std::string>() : item.dump());
            }
        } else if (value.is_boolean()) {
            if (value.get<bool>()) args.push_back("--" + key);
        } else {
            args.push_back("--" + key);
            args.push_back(value.is_string() ? value.get<std::string>() : value.dump());
        }
    }
    return args;
}

std::optional<std::string> find_config_path(int argc, char** argv) {
    for (int i = 2; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == "--config" && i + 1 < argc) return std::string(argv[i + 1]);
        if (a.rfind("--config=", 0) == 0) return a.substr(9);
    }
    return std::nullopt;
}

systems::TargetFn make_truth(const std::string& system, double mu) {
    if (system == "vdp")
        return [mu](const systems::StateVector& x) { return systems::vdp_target(x, mu); };
    if (system == "yg")
        return [](const systems::StateVector& x) { return systems::yg_target(x); };
    throw ConfigError("no closed-form dynamics for system '" + system + "'");
}

/// Datasets on disk are either trajectory CSVs (header t,x1,...) turned into
/// forward-difference pairs, or explicit pair files (header x1,..,y1,..).
train::Dataset load_training_data(const std::vector<std::string>& paths) {
    if (paths.empty()) throw ConfigError("no training data given");
    std::vector<train::Dataset> parts;
    for (const auto& p : paths) {
        if (!fs::exists(p)) throw ConfigError("dataset not found: " + p);
        std::ifstream probe(p);
        std::string first;
        std::getline(probe, first);
        probe.close();
        if (first.rfind("t,", 0) == 0) {
            parts.push_back(train::dataset_from_trajectory(io::load_coefficient_series(p)));
        } else {
            const Matrix raw = io::load_matrix_csv(p, true);
            if (raw.cols() % 2 != 0)
                throw DataError(p + ": pair file needs an even column count (x then y)");
            const std::size_t m = raw.cols() / 2;
            train::Dataset d;
            d.features.resize(raw.rows(), m);
            d.targets.resize(raw.rows(), m);
            for (std::size_t i = 0; i < raw.rows(); ++i)
                for (std::size_t j = 0; j < m; ++j) {
                    d.features(i, j) = raw(i, j);
                    d.targets(i, j) = raw(i, j + m);
                }
            parts.push_back(std::move(d));
        }
    }
    train::Dataset all;
    std::size_t total = 0;
    const std::size_t m = parts.front().dim();
    for (const auto& d : parts) {
        if (d.dim() != m) throw ConfigError("datasets disagree on state dimension");
        total += d.size();
    }
    all.features.resize(total, m);
    all.targets.resize(total, m);
    std::size_t row = 0;
    for (const auto& d : parts)
        for (std::size_t i = 0; i < d.size(); ++i, ++row) {
            std::copy(d.features.row(i), d.features.row(i) + m, all.features.row(row));
            std::copy(d.targets.row(i), d.targets.row(i) + m, all.targets.row(row));
        }
    return all;
}

void save_dataset(const train::Dataset& d, const fs::path& path) {
    std::ostringstream os;
    for (std::size_t j = 0; j < d.dim(); ++j) os << (j ? "," : "") << "x" << (j + 1);
    for (std::size_t j = 0; j < d.dim(); ++j) os << ",y" << (j + 1);
    os << "\n";
    os.precision(17);
    for (std::size_t i = 0; i < d.size(); ++i) {
        for (std::size_t j = 0; j < d.dim(); ++j) os << (j ? "," : "") << d.features(i, j);
        for (std::size_t j = 0; j < d.dim(); ++j) os << "," << d.targets(i, j);
        os << "\n";
    }
    io::write_text_atomic(path, os.str());
}

std::unique_ptr<eval::DynamicsModel> load_model(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open model " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    if (j.contains("xi")) return std::make_unique<eval::SindyDynamics>(io::load_sindy_model(path));
    if (j.contains("weights"))
        return std::make_unique<eval::MlpDynamics>(io::load_mlp_model(path));
    throw ConfigError(path.string() + ": not a recognizable model file");
}

// ---------------------------------------------------------------------------

int cmd_generate(std::vector<std::string>& args) {
    CLI::App app{"generate trajectories or sampled datasets"};
    std::string system, x0_text, out = "trajectory.csv", bounds_text, sample = "trajectory";
    double dt = 0.1, mu = 2.0, nu = 0.01, t_end = 20.0, amplitude = 25.0, dt_max = 1e-3;
    std::size_t steps = 0, trajs = 1, snapshots = 1000, modes = 4, n_grid = 2048, k_c = 2,
                count = 0;
    std::uint64_t seed = 0;
    bool dump_fields = false, dealias = false;
    std::string config;

    app.add_option("--system", system, "vdp | yg | burgers")->required();
    app.add_option("--x0", x0_text, "initial state, e.g. \"1.0,0.0\"");
    app.add_option("--dt", dt, "time step");
    app.add_option("--steps", steps, "number of forward steps (rows = steps + 1)");
    app.add_option("--mu", mu, "VDP stiffness parameter");
    app.add_option("--sample", sample, "trajectory | uniform");
    app.add_option("--n", count, "sample count for --sample uniform");
    app.add_option("--bounds", bounds_text, "uniform box, e.g. \"-3:3,-5:5\"");
    app.add_option("--seed", seed, "random seed");
    app.add_option("--out", out, "output CSV path (or directory for burgers)");
    app.add_option("--trajs", trajs, "burgers: number of trajectories");
    app.add_option("--snapshots", snapshots, "burgers: snapshots per trajectory");
    app.add_option("--modes", modes, "burgers: retained DCT modes");
    app.add_option("--n-grid", n_grid, "burgers: grid resolution");
    app.add_option("--nu", nu, "burgers: viscosity");
    app.add_option("--t-end", t_end, "burgers: final time");
    app.add_option("--k-c", k_c, "burgers: spectrum cutoff");
    app.add_option("--amplitude", amplitude, "burgers: spectrum amplitude A");
    app.add_option("--dt-max", dt_max, "burgers: DNS step upper bound");
    app.add_flag("--dump-fields", dump_fields, "burgers: dump full fields");
    app.add_flag("--dealias", dealias, "burgers: apply the 2/3 rule");
    app.add_option("--config", config, "JSON config file (flags win)");
    allow_overrides(app);

    app.parse(args);

    json summary;
    summary["command"] = "generate";
    summary["system"] = system;

    if (system == "burgers") {
        spectral::SpectrumConfig cfg;
        cfg.k_c = k_c;
        cfg.amplitude = amplitude;
        cfg.seed = seed;
        spectral::BurgersRunConfig run;
        run.n_grid = n_grid;
        run.nu = nu;
        run.t_end = t_end;
        run.snapshots = snapshots;
        run.n_modes = modes;
        run.dt_max = dt_max;
        run.dealias = dealias;

        const fs::path dir(out);
        fs::create_directories(dir);
        std::vector<std::string> files;
        if (dump_fields) {
            for (std::size_t i = 0; i < trajs; ++i) {
                spectral::SpectrumConfig local = cfg;
                local.seed = cfg.seed + i;
                std::vector<spectral::GridField> fields;
                spectral::BurgersRunStats stats;
                const systems::Trajectory traj =
                    spectral::run_reduced_dns(local, run, &stats, &fields);
                char name[64];
                std::snprintf(name, sizeof(name), "traj_%03zu.csv", i);
                io::save_trajectory(traj, dir / name);
                files.push_back((dir / name).string());
                std::ostringstream os;
                os.precision(17);
                for (const auto& f : fields) {
                    for (std::size_t j = 0; j < f.size(); ++j) os << (j ? "," : "") << f[j];
                    os << "\n";
                }
                std::snprintf(name, sizeof(name), "fields_%03zu.csv", i);
                io::write_text_atomic(dir / name, os.str());
            }
        } else {
            const std::vector<systems::Trajectory> ensemble =
                spectral::generate_burgers_ensemble(trajs, cfg, run);
            for (std::size_t i = 0; i < ensemble.size(); ++i) {
                char name[64];
                std::snprintf(name, sizeof(name), "traj_%03zu.csv", i);
                io::save_trajectory(ensemble[i], dir / name);
                files.push_back((dir / name).string());
            }
        }
        summary["trajectories"] = trajs;
        summary["snapshots"] = snapshots;
        summary["modes"] = modes;
        summary["files"] = files;
        std::cerr << "generated " << trajs << " burgers trajectories in " << out << "\n";
        print_summary(summary);
        return kExitOk;
    }

    if (system != "vdp" && system != "yg") throw ConfigError("unknown system '" + system + "'");
    const systems::TargetFn truth = make_truth(system, mu);

    if (sample == "uniform") {
        if (count == 0) throw ConfigError("--sample uniform requires --n");
        if (bounds_text.empty()) throw ConfigError("--sample uniform requires --bounds");
        const train::Dataset d =
            train::sample_uniform_phase_space(parse_bounds(bounds_text), count, seed, truth);
        save_dataset(d, out);
        summary["samples"] = count;
        summary["file"] = out;
        std::cerr << "sampled " << count << " points -> " << out << "\n";
        print_summary(summary);
        return kExitOk;
    }

    if (x0_text.empty()) throw ConfigError("--x0 is required for " + system);
    if (steps == 0) throw ConfigError("--steps must be positive");
    const std::vector<double> x0 = parse_state(x0_text);

    const systems::Trajectory traj = systems::generate_trajectory(truth, x0, dt, steps, system);
    io::save_trajectory(traj, out);
    summary["rows"] = traj.length();
    summary["dt"] = traj.dt;
    summary["file"] = out;
    std::cerr << "generated " << traj.length() << " snapshots -> " << out << "\n";
    print_summary(summary);
    return kExitOk;
}

int cmd_train(std::vector<std::string>& args) {
    CLI::App app{"train the feedforward model"};
    std::vector<std::string> data;
    std::string layers_text, activation = "swish", out = "model.json", curve_path, config;
    double lr = 2e-3, lambda = 0.0, val_fraction = 0.2, ptanh_slope = 0.25;
    std::size_t batch = 64, epochs = 1000, patience = 500;
    std::uint64_t seed = 0;

    app.add_option("--data", data, "trajectory or pair CSVs (repeatable)");
    app.add_option("--layers", layers_text, "layer structure, e.g. 2-8-8-2")->required();
    app.add_option("--activation", activation, "tanh | elu | swish | penalized_tanh");
    app.add_option("--ptanh-slope", ptanh_slope, "penalized tanh negative-branch slope");
    app.add_option("--lr", lr, "learning rate");
    app.add_option("--lambda", lambda, "Jacobian-Frobenius regularization weight");
    app.add_option("--batch", batch, "minibatch size");
    app.add_option("--epochs", epochs, "maximum epochs");
    app.add_option("--val-fraction", val_fraction, "validation share of the data");
    app.add_option("--patience", patience, "early-stopping patience in epochs");
    app.add_option("--seed", seed, "random seed");
    app.add_option("--out", out, "model JSON path");
    app.add_option("--curve", curve_path, "learning-curve CSV path");
    app.add_option("--config", config, "JSON config file (flags win)");
    allow_overrides(app);

    app.parse(args);

    const train::Dataset dataset = load_training_data(data);
    train::TrainConfig cfg;
    cfg.layer_sizes = parse_layers(layers_text);
    cfg.activation = net::activation_from_name(activation);
    cfg.ptanh_slope = ptanh_slope;
    cfg.learning_rate = lr;
    cfg.lambda = lambda;
    cfg.batch_size = batch;
    cfg.epochs = epochs;
    cfg.val_fraction = val_fraction;
    cfg.patience = patience;
    cfg.seed = seed;

    json summary;
    summary["command"] = "train";
    try {
        const train::TrainResult result = train::train(dataset, cfg);
        io::save_mlp_model(result.model, out);
        if (!curve_path.empty()) io::save_learning_curve(result.curve, curve_path);
        summary["model"] = out;
        summary["epochs_run"] = result.epochs_run;
        summary["best_epoch"] = result.best_epoch;
        summary["best_val_loss"] = result.best_val_loss;
        summary["final_train_loss"] = result.curve.train_loss.back();
        if (!result.curve.val_r2.empty()) summary["final_val_r2"] = result.curve.val_r2.back();
        summary["samples"] = dataset.size();
        std::cerr << "trained " << result.epochs_run << " epochs, best val loss "
                  << result.best_val_loss << "\n";
        print_summary(summary);
        return kExitOk;
    } catch (const train::TrainingDiverged& e) {
        // Keep the last finite checkpoint on disk for inspection.
        io::save_mlp_model(e.checkpoint, out);
        summary["error"] = e.what();
        summary["model"] = out;
        summary["partial"] = true;
        std::cerr << e.what() << "\n";
        print_summary(summary);
        return kExitNumerical;
    }
}

int cmd_sindy(std::vector<std::string>& args) {
    CLI::App app{"fit the sparse polynomial baseline"};
    std::vector<std::string> data;
    std::string out = "sindy.json", config;
    std::size_t order = 3, max_iter = 10;
    double threshold = 2e-4;

    app.add_option("--data", data, "trajectory or pair CSVs (repeatable)")->required();
    app.add_option("--order", order, "maximal polynomial order");
    app.add_option("--threshold", threshold, "STLS hard threshold");
    app.add_option("--max-iter", max_iter, "STLS iteration cap");
    app.add_option("--out", out, "model JSON path");
    app.add_option("--config", config, "JSON config file (flags win)");
    allow_overrides(app);

    app.parse(args);
    if (order == 0) throw ConfigError("--order must be at least 1");

    const train::Dataset dataset = load_training_data(data);
    const sindy::SindyModel model =
        sindy::fit(dataset.features, dataset.targets, order, threshold, max_iter);
    io::save_sindy_model(model, out);

    std::size_t nonzeros = 0;
    for (std::size_t i = 0; i < model.xi.size(); ++i)
        if (model.xi.data()[i] != 0.0) ++nonzeros;
    if (threshold == 0.0)
        std::cerr << "warning: threshold 0 keeps the dense least-squares model\n";
    std::cerr << model.equations_text();
    for (const auto& w : model.warnings) std::cerr << "warning: " << w << "\n";

    json summary;
    summary["command"] = "sindy";
    summary["model"] = out;
    summary["nonzeros"] = nonzeros;
    summary["terms"] = model.library.term_count();
    summary["equations"] = model.equations_text();
    print_summary(summary);
    return kExitOk;
}

int cmd_eval(std::vector<std::string>& args) {
    CLI::App app{"evaluate a model: a-priori, rollout, stepwise grid, spectra"};
    std::string model_path, mode = "apriori", data_path, out_dir = "report", system, x0_text,
                             bounds_text = "-3:3,-5:5", config;
    double mu = 2.0, dt = 0.0;
    std::size_t steps = 0, resolution = 101;

    app.add_option("--model", model_path, "model JSON (net or sindy)")->required();
    app.add_option("--mode", mode, "apriori | aposteriori | grid | spectrum");
    app.add_option("--data", data_path, "reference trajectory CSV");
    app.add_option("--out-dir", out_dir, "report directory");
    app.add_option("--system", system, "closed-form truth for grid mode (vdp | yg)");
    app.add_option("--mu", mu, "VDP parameter for grid mode");
    app.add_option("--x0", x0_text, "rollout start (defaults to the data's first row)");
    app.add_option("--steps", steps, "rollout steps (defaults to data length - 1)");
    app.add_option("--dt", dt, "rollout step (defaults to the data's dt)");
    app.add_option("--bounds", bounds_text, "grid bounds lo1:hi1,lo2:hi2");
    app.add_option("--resolution", resolution, "grid resolution per axis");
    app.add_option("--config", config, "JSON config file (flags win)");
    allow_overrides(app);

    app.parse(args);

    const std::unique_ptr<eval::DynamicsModel> model = load_model(model_path);
    const fs::path dir(out_dir);
    fs::create_directories(dir);

    json summary;
    summary["command"] = "eval";
    summary["mode"] = mode;
    summary["model"] = model_path;

    if (mode == "apriori") {
        if (data_path.empty()) throw ConfigError("apriori mode needs --data");
        const systems::Trajectory traj = io::load_coefficient_series(data_path);
        if (traj.dim() != model->dim()) throw ConfigError("model/data dimension mismatch");
        const train::Dataset d = train::dataset_from_trajectory(traj);
        const eval::ErrorSeries local = eval::local_errors(*model, d.features, d.targets);
        io::save_error_series(local, dir / "local_error.csv");

        Matrix preds(d.size(), d.dim());
        std::vector<double> x(d.dim());
        for (std::size_t i = 0; i < d.size(); ++i) {
            std::copy(d.features.row(i), d.features.row(i) + d.dim(), x.begin());
            const std::vector<double> y = model->predict(x);
            std::copy(y.begin(), y.end(), preds.row(i));
        }
        const eval::R2Result r2 = eval::r2_score(d.targets, preds);
        const eval::JacobianDiagnostics diag =
            eval::jacobian_diagnostics(*model, d.features, traj.dt);
        io::save_eigenvalues(diag, dir / "eig.csv");

        double mean_local = 0.0, max_local = 0.0;
        for (double e : local.norm) {
            mean_local += e;
            max_local = std::max(max_local, e);
        }
        mean_local /= static_cast<double>(local.norm.size());
        summary["r2"] = r2.scalar;
        summary["mean_local_error"] = mean_local;
        summary["max_local_error"] = max_local;
        // The paper overlays error and sigma_max series visually; the
        // correlation is informational, no threshold attached.
        summary["pearson_local_vs_sigma_max"] =
            eval::pearson_correlation(local.norm, diag.max_singular_value);
    } else if (mode == "aposteriori") {
        if (data_path.empty()) throw ConfigError("aposteriori mode needs --data");
        const systems::Trajectory reference = io::load_coefficient_series(data_path);
        if (reference.dim() != model->dim()) throw ConfigError("model/data dimension mismatch");
        std::vector<double> x0(reference.dim());
        std::copy(reference.states.row(0), reference.states.row(0) + reference.dim(), x0.begin());
        if (!x0_text.empty()) x0 = parse_state(x0_text);
        const double step_dt = dt > 0.0 ? dt : reference.dt;
        const std::size_t n = steps > 0 ? steps : reference.length() - 1;

        try {
            const systems::Trajectory predicted = eval::rollout(*model, x0, step_dt, n);
            io::save_trajectory(predicted, dir / "predicted.csv");
            if (predicted.length() == reference.length() && x0_text.empty()) {
                const eval::ErrorSeries global = eval::global_errors(reference, predicted);
                io::save_error_series(global, dir / "global_error.csv");
                double mean_g = 0.0, max_g = 0.0;
                for (double e : global.norm) {
                    mean_g += e;
                    max_g = std::max(max_g, e);
                }
                summary["mean_global_error"] = mean_g / static_cast<double>(global.norm.size());
                summary["max_global_error"] = max_g;
            }
            double max_x1 = 0.0;
            for (std::size_t i = 0; i < predicted.length(); ++i)
                max_x1 = std::max(max_x1, std::abs(predicted.states(i, 0)));
            summary["rollout_steps"] = n;
            summary["max_abs_x1"] = max_x1;
        } catch (const eval::RolloutDiverged& e) {
            io::save_trajectory(e.partial, dir / "predicted.csv");
            summary["error"] = e.what();
            summary["diverged_at"] = e.step;
            io::write_text_atomic(dir / "summary.json", summary.dump(2) + "\n");
            std::cerr << e.what() << "\n";
            print_summary(summary);
            return kExitNumerical;
        }
    } else if (mode == "grid") {
        if (system.empty()) throw ConfigError("grid mode needs --system for the truth field");
        if (model->dim() != 2) throw ConfigError("grid mode needs a 2-dimensional model");
        const auto bounds = parse_bounds(bounds_text);
        if (bounds.size() != 2) throw ConfigError("grid mode needs two bound pairs");
        const eval::StepwiseGrid grid = eval::stepwise_error_grid(
            *model, make_truth(system, mu), bounds[0], bounds[1], resolution);
        io::save_stepwise_grid(grid, dir / "stepgrid.csv");
        summary["mean_stepwise_error"] = grid.mean_error;
        summary["max_stepwise_error"] = grid.max_error;
        summary["resolution"] = resolution;
    } else if (mode == "spectrum") {
        if (data_path.empty()) throw ConfigError("spectrum mode needs --data");
        const systems::Trajectory traj = io::load_coefficient_series(data_path);
        if (traj.dim() != model->dim()) throw ConfigError("model/data dimension mismatch");
        const eval::JacobianDiagnostics diag =
            eval::jacobian_diagnostics(*model, traj.states, traj.dt);
        io::save_eigenvalues(diag, dir / "eig.csv");
        io::save_stability_boundary(eval::rk5_stability_boundary(),
                                    dir / "stability_boundary.csv");
        double mean_sv = 0.0, mean_max_re = 0.0;
        for (std::size_t i = 0; i < diag.max_singular_value.size(); ++i) {
            mean_sv += diag.max_singular_value[i];
            double max_re = -1e300;
            for (const auto& ev : diag.eigenvalues[i]) max_re = std::max(max_re, ev.real());
            mean_max_re += max_re;
        }
        const double n_pts = static_cast<double>(diag.max_singular_value.size());
        summary["mean_max_singular_value"] = mean_sv / n_pts;
        summary["mean_max_real_eigenvalue"] = mean_max_re / n_pts;
        summary["points"] = diag.max_singular_value.size();
    } else {
        throw ConfigError("unknown mode '" + mode + "'");
    }

    io::write_text_atomic(dir / "summary.json", summary.dump(2) + "\n");
    print_summary(summary);
    return kExitOk;
}

const std::vector<std::string> kGenerateKeys = {
    "system", "x0", "dt", "steps", "mu", "sample", "n", "bounds", "seed", "out",
    "trajs", "snapshots", "modes", "n-grid", "nu", "t-end", "k-c", "amplitude",
    "dt-max", "dump-fields", "dealias"};
const std::vector<std::string> kTrainKeys = {
    "data", "layers", "activation", "ptanh-slope", "lr", "lambda", "batch",
    "epochs", "val-fraction", "patience", "seed", "out", "curve"};
const std::vector<std::string> kSindyKeys = {"data", "order", "threshold", "max-iter", "out"};
const std::vector<std::string> kEvalKeys = {
    "model", "mode", "data", "out-dir", "system", "mu", "x0", "steps", "dt",
    "bounds", "resolution"};

} // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::cerr << "usage: phaseflow <generate|train|sindy|eval> [options]\n";
        return kExitConfig;
    }
    const std::string command = argv[1];

    try {
        std::vector<std::string> args;
        if (const auto cfg = find_config_path(argc, argv)) {
            const std::vector<std::string>* keys = nullptr;
            if (command == "generate") keys = &kGenerateKeys;
            else if (command == "train") keys = &kTrainKeys;
            else if (command == "sindy") keys = &kSindyKeys;
            else if (command == "eval") keys = &kEvalKeys;
            if (keys) {
                const auto from_config = config_args(*cfg, command, *keys);
                args.insert(args.end(), from_config.begin(), from_config.end());
            }
        }
        for (int i = 2; i < argc; ++i) args.emplace_back(argv[i]);
        std::reverse(args.begin(), args.end()); // CLI11 consumes back-to-front

        if (command == "generate") return cmd_generate(args);
        if (command == "train") return cmd_train(args);
        if (command == "sindy") return cmd_sindy(args);
        if (command == "eval") return cmd_eval(args);
        std::cerr << "unknown command '" << command << "'\n";
        return kExitConfig;
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        return kExitConfig;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const ShapeError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const DivergenceError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << "\n";
        return 1;
    }
}
