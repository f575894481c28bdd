#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "qgfem/diagnostics.hpp"
#include "qgfem/problems.hpp"

namespace qg {

// Pass bands for the order-of-convergence gate: spatial orders per norm and
// the temporal order of the fixed-mesh step-size study.
struct GateBands {
  double l2 = 4.0, h1 = 3.0, h2 = 2.0, tol = 0.25;
  double dt_order = 1.0, dt_tol = 0.15;
};

struct ExperimentConfig {
  ScenarioSetup setup;
  std::string out_dir;
  unsigned long seed = 0;
  bool time_study = false;
  GateBands bands;
  double steady_tol = 1e-3;
  double steady_window = 0.25;  // trailing fraction of samples
  double decay_window = 0.5;    // trailing fraction of samples
};

// Exit codes shared by the commands.
inline constexpr int kExitOk = 0;
inline constexpr int kExitBandViolation = 2;
inline constexpr int kExitSolverFailure = 3;

// ----- runners (no file output; commands, tests and the acceptance suite
// all go through these) -----

struct LevelError {
  double h = 0.0;  // mesh size, or dt in the temporal study
  NormReport error;
};

// Manufactured run on an nx = ny = level mesh; error at final time.
LevelError run_spatial_level(const ScenarioSetup& setup, int level);

// Manufactured run on the scenario's fixed mesh with the given step size.
LevelError run_temporal_level(const ScenarioSetup& setup, double dt);

struct EnergyHistory {
  std::vector<double> t, grad_norm, delta_norm;
};

struct RunResult {
  State final_state;
  RunSummary summary;
  EnergyHistory energy;
};

using SnapshotSink = std::function<void(double t, const RectMesh& mesh,
                                        const DofMap& dofmap, const State&)>;

// One initial-value run of the scenario's problem. The sink, when set,
// fires at the steps nearest the scenario's snapshot times.
RunResult run_problem(const ScenarioSetup& setup,
                      const SnapshotSink& sink = {});

// ----- configuration file and manifest -----

// Plain `key = value` lines; '#' starts a comment. Unknown keys are the
// caller's problem (the CLI rejects them).
std::map<std::string, std::string> read_key_value_file(
    const std::string& path);

// Serializes the fully resolved configuration. Written into the output
// directory before any result file.
void write_manifest(const ExperimentConfig& cfg);

// ----- formatting and writers (exposed for tests) -----

std::string fmt17(double v);  // 17 significant digits, round-trip exact
std::string fmtg(double v);   // short form for names and level lists

void write_snapshot_vtk(const std::filesystem::path& path,
                        const RectMesh& mesh, const DofMap& dofmap,
                        const Eigen::VectorXd& coeffs,
                        const std::string& title);
void write_snapshot_csv(const std::filesystem::path& path,
                        const RectMesh& mesh, const DofMap& dofmap,
                        const Eigen::VectorXd& coeffs);
void write_energy_csv(const std::filesystem::path& path,
                      const EnergyHistory& energy);

// ----- commands: create the output dir, write the manifest, run, write
// results; return an exit code -----

int cmd_convergence(const ExperimentConfig& cfg);
int cmd_decay(const ExperimentConfig& cfg);
int cmd_attractor(const ExperimentConfig& cfg);
int cmd_custom(const ExperimentConfig& cfg);

}  // namespace qg
