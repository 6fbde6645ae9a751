#include "phaseflow/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <sstream>

namespace phaseflow::io {

using nlohmann::json;

namespace {

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

double parse_double(const std::string& token, std::size_t line_no, const fs::path& path) {
    double value = 0.0;
    const char* begin = token.data();
    const char* end = begin + token.size();
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end)
        throw DataError(path.string() + ":" + std::to_string(line_no) + ": cannot parse '" +
                        token + "' as a number");
    if (!std::isfinite(value))
        throw DataError(path.string() + ":" + std::to_string(line_no) +
                        ": non-finite value '" + token + "'");
    return value;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string token;
    std::stringstream ss(line);
    while (std::getline(ss, token, ',')) out.push_back(token);
    return out;
}

json load_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw DataError(path.string() + ": " + e.what());
    }
    return j;
}

} // namespace

void write_text_atomic(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) throw DataError("cannot write " + tmp.string());
        out << text;
    }
    fs::rename(tmp, path);
}

fs::path sidecar_path(const fs::path& csv_path) {
    fs::path p = csv_path;
    p.replace_extension(".meta.json");
    return p;
}

void save_trajectory(const systems::Trajectory& traj, const fs::path& csv_path) {
    std::ostringstream os;
    os << "t";
    for (std::size_t j = 0; j < traj.dim(); ++j) os << ",x" << (j + 1);
    os << "\n";
    for (std::size_t i = 0; i < traj.length(); ++i) {
        os << format_double(static_cast<double>(i) * traj.dt);
        for (std::size_t j = 0; j < traj.dim(); ++j) os << "," << format_double(traj.states(i, j));
        os << "\n";
    }
    write_text_atomic(csv_path, os.str());

    json meta;
    meta["dt"] = traj.dt;
    meta["system"] = traj.system_tag;
    meta["n"] = traj.length();
    write_text_atomic(sidecar_path(csv_path), meta.dump(2) + "\n");
}

systems::Trajectory load_trajectory(const fs::path& csv_path) {
    std::ifstream in(csv_path);
    if (!in) throw DataError("cannot open " + csv_path.string());

    const fs::path meta_path = sidecar_path(csv_path);
    if (!fs::exists(meta_path))
        throw DataError("missing metadata sidecar " + meta_path.string());
    const json meta = load_json(meta_path);
    if (!meta.contains("dt"))
        throw DataError(meta_path.string() + ": missing required field 'dt'");

    systems::Trajectory traj;
    traj.dt = meta["dt"].get<double>();
    if (!(traj.dt > 0.0)) throw DataError(meta_path.string() + ": dt must be positive");
    traj.system_tag = meta.value("system", std::string{});

    std::string line;
    std::size_t line_no = 0;
    std::size_t cols = 0;
    std::vector<double> values;
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        if (line_no == 1 && line.rfind("t,", 0) == 0) continue; // header
        const std::vector<std::string> tokens = split_csv(line);
        if (tokens.size() < 2)
            throw DataError(csv_path.string() + ":" + std::to_string(line_no) +
                            ": expected t plus at least one state column");
        if (cols == 0) cols = tokens.size() - 1;
        if (tokens.size() - 1 != cols)
            throw DataError(csv_path.string() + ":" + std::to_string(line_no) +
                            ": ragged row, expected " + std::to_string(cols + 1) + " columns");
        for (std::size_t j = 1; j < tokens.size(); ++j)
            values.push_back(parse_double(tokens[j], line_no, csv_path));
        ++rows;
    }
    if (rows == 0) throw DataError(csv_path.string() + ": no data rows");
    traj.states.resize(rows, cols);
    std::copy(values.begin(), values.end(), traj.states.data());
    return traj;
}

systems::Trajectory load_coefficient_series(const fs::path& csv_path) {
    systems::Trajectory traj = load_trajectory(csv_path);
    if (traj.length() < 2)
        throw DataError(csv_path.string() + ": need at least 2 snapshots for training");
    return traj;
}

void save_mlp_model(const train::MlpModel& model, const fs::path& path) {
    json j;
    j["format"] = 1;
    j["layer_sizes"] = model.params.layer_sizes();
    j["activation"] = net::activation_name(model.params.activation());
    j["ptanh_slope"] = model.params.ptanh_slope();
    j["lambda"] = model.lambda;
    j["normalization"] = {{"feature_mean", model.norm.feature_mean},
                          {"feature_std", model.norm.feature_std},
                          {"target_mean", model.norm.target_mean},
                          {"target_std", model.norm.target_std}};
    json weights = json::array();
    json biases = json::array();
    for (std::size_t i = 0; i < model.params.num_layers(); ++i) {
        const double* w = model.params.weight(i);
        weights.push_back(std::vector<double>(
            w, w + model.params.weight_rows(i) * model.params.weight_cols(i)));
        const double* b = model.params.bias(i);
        biases.push_back(std::vector<double>(b, b + model.params.weight_rows(i)));
    }
    j["weights"] = std::move(weights);
    j["biases"] = std::move(biases);
    write_text_atomic(path, j.dump() + "\n");
}

train::MlpModel load_mlp_model(const fs::path& path) {
    const json j = load_json(path);
    if (j.value("format", 0) != 1)
        throw DataError(path.string() + ": unsupported model format");

    const auto sizes = j.at("layer_sizes").get<std::vector<std::size_t>>();
    const net::Activation act = net::activation_from_name(j.at("activation").get<std::string>());
    const double slope = j.value("ptanh_slope", 0.25);

    train::MlpModel model;
    model.params = net::MlpParams(sizes, act, slope);
    model.lambda = j.value("lambda", 0.0);
    const json& norm = j.at("normalization");
    model.norm.feature_mean = norm.at("feature_mean").get<std::vector<double>>();
    model.norm.feature_std = norm.at("feature_std").get<std::vector<double>>();
    model.norm.target_mean = norm.at("target_mean").get<std::vector<double>>();
    model.norm.target_std = norm.at("target_std").get<std::vector<double>>();

    const json& weights = j.at("weights");
    const json& biases = j.at("biases");
    if (weights.size() != model.params.num_layers() || biases.size() != model.params.num_layers())
        throw DataError(path.string() + ": layer count mismatch");
    for (std::size_t i = 0; i < model.params.num_layers(); ++i) {
        const auto w = weights[i].get<std::vector<double>>();
        const auto b = biases[i].get<std::vector<double>>();
        if (w.size() != model.params.weight_rows(i) * model.params.weight_cols(i) ||
            b.size() != model.params.weight_rows(i))
            throw DataError(path.string() + ": weight shape mismatch at layer " +
                            std::to_string(i));
        std::copy(w.begin(), w.end(), model.params.weight(i));
        std::copy(b.begin(), b.end(), model.params.bias(i));
    }
    if (model.norm.feature_mean.size() != model.params.input_dim() ||
        model.norm.target_mean.size() != model.params.output_dim())
        throw DataError(path.string() + ": normalization dimension mismatch");
    return model;
}

void save_sindy_model(const sindy::SindyModel& model, const fs::path& path) {
    json j;
    j["format"] = 1;
    j["dimension"] = model.library.dimension;
    j["max_order"] = model.library.max_order;
    j["threshold"] = model.threshold;
    j["terms"] = model.library.terms;
    json xi = json::array();
    for (std::size_t t = 0; t < model.xi.rows(); ++t) {
        const double* row = model.xi.row(t);
        xi.push_back(std::vector<double>(row, row + model.xi.cols()));
    }
    j["xi"] = std::move(xi);
    write_text_atomic(path, j.dump() + "\n");
}

sindy::SindyModel load_sindy_model(const fs::path& path) {
    const json j = load_json(path);
    if (j.value("format", 0) != 1)
        throw DataError(path.string() + ": unsupported model format");
    sindy::SindyModel model;
    model.library.dimension = j.at("dimension").get<std::size_t>();
    model.library.max_order = j.at("max_order").get<std::size_t>();
    model.library.terms = j.at("terms").get<std::vector<std::vector<unsigned>>>();
    model.threshold = j.at("threshold").get<double>();
    const json& xi = j.at("xi");
    if (xi.empty()) throw DataError(path.string() + ": empty coefficient matrix");
    const std::size_t m = xi[0].size();
    model.xi.resize(xi.size(), m);
    for (std::size_t t = 0; t < xi.size(); ++t) {
        const auto row = xi[t].get<std::vector<double>>();
        if (row.size() != m) throw DataError(path.string() + ": ragged coefficient matrix");
        std::copy(row.begin(), row.end(), model.xi.row(t));
    }
    if (model.xi.rows() != model.library.term_count())
        throw DataError(path.string() + ": term/coefficient count mismatch");
    return model;
}

void save_learning_curve(const train::LearningCurve& curve, const fs::path& path) {
    std::ostringstream os;
    os << "epoch,train_loss,val_loss,val_r2\n";
    for (std::size_t e = 0; e < curve.train_loss.size(); ++e)
        os << e << "," << format_double(curve.train_loss[e]) << ","
           << format_double(curve.val_loss[e]) << "," << format_double(curve.val_r2[e]) << "\n";
    write_text_atomic(path, os.str());
}

void save_pod_basis(const reduction::PodBasis& basis, const fs::path& dir) {
    fs::create_directories(dir);
    {
        std::ostringstream os;
        for (double v : basis.mean) os << format_double(v) << "\n";
        write_text_atomic(dir / "mean.csv", os.str());
    }
    {
        std::ostringstream os;
        for (std::size_t j = 0; j < basis.field_dim(); ++j) {
            for (std::size_t k = 0; k < basis.rank(); ++k)
                os << (k ? "," : "") << format_double(basis.modes(j, k));
            os << "\n";
        }
        write_text_atomic(dir / "modes.csv", os.str());
    }
    {
        std::ostringstream os;
        for (double v : basis.singular_values) os << format_double(v) << "\n";
        write_text_atomic(dir / "sv.csv", os.str());
    }
    if (!basis.quadrature_weights.empty()) {
        std::ostringstream os;
        for (double v : basis.quadrature_weights) os << format_double(v) << "\n";
        write_text_atomic(dir / "weights.csv", os.str());
    }
    json meta;
    meta["format"] = 1;
    meta["field_dim"] = basis.field_dim();
    meta["rank"] = basis.rank();
    meta["weighted"] = !basis.quadrature_weights.empty();
    write_text_atomic(dir / "meta.json", meta.dump(2) + "\n");
}

reduction::PodBasis load_pod_basis(const fs::path& dir) {
    const json meta = load_json(dir / "meta.json");
    reduction::PodBasis basis;
    const Matrix mean = load_matrix_csv(dir / "mean.csv", false);
    basis.mean.assign(mean.data(), mean.data() + mean.size());
    const Matrix sv = load_matrix_csv(dir / "sv.csv", false);
    basis.singular_values.assign(sv.data(), sv.data() + sv.size());
    basis.modes = load_matrix_csv(dir / "modes.csv", false);
    if (meta.value("weighted", false)) {
        const Matrix w = load_matrix_csv(dir / "weights.csv", false);
        basis.quadrature_weights.assign(w.data(), w.data() + w.size());
    }
    if (basis.modes.rows() != basis.mean.size() ||
        basis.modes.cols() != basis.singular_values.size())
        throw DataError(dir.string() + ": inconsistent basis shapes");
    return basis;
}

void save_error_series(const eval::ErrorSeries& series, const fs::path& path) {
    std::ostringstream os;
    os << "step,e";
    for (std::size_t j = 0; j < series.per_component.cols(); ++j) os << ",e_" << (j + 1);
    os << "\n";
    for (std::size_t i = 0; i < series.norm.size(); ++i) {
        os << i << "," << format_double(series.norm[i]);
        for (std::size_t j = 0; j < series.per_component.cols(); ++j)
            os << "," << format_double(series.per_component(i, j));
        os << "\n";
    }
    write_text_atomic(path, os.str());
}

void save_eigenvalues(const eval::JacobianDiagnostics& diag, const fs::path& path) {
    std::ostringstream os;
    os << "step,re,im,re_scaled,im_scaled\n";
    for (std::size_t i = 0; i < diag.eigenvalues.size(); ++i)
        for (const auto& ev : diag.eigenvalues[i])
            os << i << "," << format_double(ev.real()) << "," << format_double(ev.imag()) << ","
               << format_double(ev.real() * diag.dt) << "," << format_double(ev.imag() * diag.dt)
               << "\n";
    write_text_atomic(path, os.str());
}

void save_stepwise_grid(const eval::StepwiseGrid& grid, const fs::path& path) {
    std::ostringstream os;
    os << "x1,x2,err,tru_dx,tru_dy,prd_dx,prd_dy\n";
    for (std::size_t i = 0; i < grid.error.size(); ++i)
        os << format_double(grid.x1[i]) << "," << format_double(grid.x2[i]) << ","
           << format_double(grid.error[i]) << "," << format_double(grid.truth_dx[i]) << ","
           << format_double(grid.truth_dy[i]) << "," << format_double(grid.pred_dx[i]) << ","
           << format_double(grid.pred_dy[i]) << "\n";
    write_text_atomic(path, os.str());
}

void save_stability_boundary(const std::vector<std::complex<double>>& boundary,
                             const fs::path& path) {
    std::ostringstream os;
    os << "re,im\n";
    for (const auto& z : boundary)
        os << format_double(z.real()) << "," << format_double(z.imag()) << "\n";
    write_text_atomic(path, os.str());
}

void save_matrix_csv(const Matrix& m, const fs::path& path, const std::string& header) {
    std::ostringstream os;
    if (!header.empty()) os << header << "\n";
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) os << (j ? "," : "") << format_double(m(i, j));
        os << "\n";
    }
    write_text_atomic(path, os.str());
}

Matrix load_matrix_csv(const fs::path& path, bool expect_header) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    std::string line;
    std::size_t line_no = 0;
    std::size_t cols = 0;
    std::vector<double> values;
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        if (expect_header && line_no == 1) continue;
        const std::vector<std::string> tokens = split_csv(line);
        if (cols == 0) cols = tokens.size();
        if (tokens.size() != cols)
            throw DataError(path.string() + ":" + std::to_string(line_no) + ": ragged row");
        for (const auto& t : tokens) values.push_back(parse_double(t, line_no, path));
        ++rows;
    }
    if (rows == 0) throw DataError(path.string() + ": no data rows");
    Matrix m(rows, cols);
    std::copy(values.begin(), values.end(), m.data());
    return m;
}

} // namespace phaseflow::io
