#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sparsenet/training.hpp"

namespace sparsenet {

/// One trained network inside a preset.
struct PresetRow {
  std::string label;  // file-name friendly, unique within the preset
  PenaltySpec penalty;
  double alpha = 0.0;
  int nodes = 0;
  double error = 0.0;  // RMS against the noise-free target on the training points
  double objective = 0.0;
  std::optional<double> w_norm;
  std::optional<double> fidelity_gap;
  ShallowNet net;
  TrainReport report;
};

struct ExperimentSummary {
  std::string name;
  std::uint64_t seed = 0;
  bool table = false;  // rows form a gamma sweep
  nlohmann::json config;
  std::vector<PresetRow> rows;
};

struct ExperimentOptions {
  std::uint64_t seed = 0;
  int threads = 1;
  bool smoke = false;  // exp2d on a 31 x 31 grid
  std::optional<double> alpha;
  std::optional<double> gamma;
  std::optional<int> n_trial;
  std::optional<int> T;
};

/// fig1, exp1d, exp2d, table1, table2, radial-fidelity.
const std::vector<std::string>& preset_names();

/// Dataset used by a preset (noise drawn from options.seed).
Dataset preset_dataset(const std::string& name, const ExperimentOptions& options);

/// Base algorithm settings of a preset before any per-row penalty or alpha.
AlgorithmConfig preset_config(const std::string& name, const ExperimentOptions& options);

/// Throws std::invalid_argument for an unknown name.
ExperimentSummary run_experiment(const std::string& name, const ExperimentOptions& options);

/// Writes summary.json, summary.csv and one network CSV per row into outdir.
/// Table presets use the CSV header gamma,nodes,error.
void write_summary(const ExperimentSummary& summary, const std::string& outdir);

nlohmann::json to_summary_json(const ExperimentSummary& summary);

}  // namespace sparsenet
