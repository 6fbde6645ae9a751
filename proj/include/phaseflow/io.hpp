#pragma once

#include <filesystem>
#include <string>

#include "phaseflow/common.hpp"
#include "phaseflow/eval.hpp"
#include "phaseflow/reduction.hpp"
#include "phaseflow/sindy.hpp"
#include "phaseflow/systems.hpp"
#include "phaseflow/train.hpp"

namespace phaseflow::io {

namespace fs = std::filesystem;

/// Atomic text write (temp file + rename).
void write_text_atomic(const fs::path& path, const std::string& text);

/// Sidecar metadata path for a trajectory CSV: foo.csv -> foo.meta.json.
fs::path sidecar_path(const fs::path& csv_path);

/// CSV with header t,x1,...,xM (t = k*dt) plus a JSON sidecar holding
/// {"dt":..., "system":..., "n":...}.
void save_trajectory(const systems::Trajectory& traj, const fs::path& csv_path);
systems::Trajectory load_trajectory(const fs::path& csv_path);

/// Ingestion entry point for externally produced modal-coefficient series;
/// validates shape, finiteness and metadata. Parse errors carry line numbers.
systems::Trajectory load_coefficient_series(const fs::path& csv_path);

void save_mlp_model(const train::MlpModel& model, const fs::path& path);
train::MlpModel load_mlp_model(const fs::path& path);

void save_sindy_model(const sindy::SindyModel& model, const fs::path& path);
sindy::SindyModel load_sindy_model(const fs::path& path);

/// epoch,train_loss,val_loss,val_r2 per completed epoch.
void save_learning_curve(const train::LearningCurve& curve, const fs::path& path);

/// Basis directory: mean.csv, modes.csv (D x r), sv.csv, optional weights.csv,
/// meta.json.
void save_pod_basis(const reduction::PodBasis& basis, const fs::path& dir);
reduction::PodBasis load_pod_basis(const fs::path& dir);

/// step,e,e_1..e_M rows for local/global error series.
void save_error_series(const eval::ErrorSeries& series, const fs::path& path);

/// step,re,im,re_scaled,im_scaled; one row per eigenvalue per evaluation
/// point, scaled entries multiplied by dt.
void save_eigenvalues(const eval::JacobianDiagnostics& diag, const fs::path& path);

/// x1,x2,err,tru_dx,tru_dy,prd_dx,prd_dy rows.
void save_stepwise_grid(const eval::StepwiseGrid& grid, const fs::path& path);

/// re,im samples of the degree-5 stability boundary.
void save_stability_boundary(const std::vector<std::complex<double>>& boundary,
                             const fs::path& path);

/// Plain numeric CSV (with optional header) for small matrices.
void save_matrix_csv(const Matrix& m, const fs::path& path, const std::string& header = "");
Matrix load_matrix_csv(const fs::path& path, bool expect_header);

} // namespace phaseflow::io
