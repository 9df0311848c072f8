#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include <json.hpp>

#include "sparsenet/analysis.hpp"
#include "sparsenet/insertion.hpp"
#include "sparsenet/outer.hpp"

namespace sparsenet {

struct JointConfig {
  int epochs = 200;
  double step_init = 1.0;  // initial inner step; the damping starts at 1 / step_init
  double rel_tol = 1e-12;  // stop once an epoch lowers J by less than rel_tol * J, three times running
  int outer_sweeps = 1;    // coordinate-prox sweeps on c per epoch
};

struct JointDiagnostics {
  int epochs = 0;
  int inner_accepted = 0;
  int outer_accepted = 0;
  bool step_underflow = false;
  bool converged = false;
  std::vector<double> objective_trace;  // J before the first epoch, then after every epoch
};

struct JointResult {
  ShallowNet net;
  JointDiagnostics diagnostics;
};

/// Alternating epochs on all weights: a damped Gauss-Newton step on the chart
/// coordinates of the nodes (block-diagonal per node, Armijo-accepted) preceded
/// by exact coordinate-prox sweeps on the outer weights. J never increases.
JointResult train_joint(const ShallowNet& net, const Dataset& data, const PenaltySpec& spec, double alpha,
                        const JointConfig& cfg);

struct AlgorithmConfig {
  double alpha = 1e-5;
  PenaltySpec penalty = PenaltySpec::l1();
  int T = 15;
  InsertionConfig insertion;
  OuterSolveConfig outer;
  JointConfig joint;
  std::uint64_t seed = 0;
  std::optional<ShallowNet> init;
  double merge_tol = 1e-6;
  bool early_stop = true;
  StationarityOptions final_check;
};

struct IterationRecord {
  int t = 0;
  int width_start = 0;     // N(t)
  int width_inserted = 0;  // N(t + 1/2)
  int width_end = 0;       // N(t + 1)
  int candidates_above_alpha = 0;
  int inserted = 0;
  int merged = 0;
  int pruned = 0;
  double max_abs_p = 0.0;  // over the trial ascents
  double objective = 0.0;
  double loss = 0.0;
  double penalty = 0.0;
  std::uint64_t trial_seed = 0;
  JointDiagnostics joint;
  OuterDiagnostics ssn;
};

struct TrainReport {
  std::vector<IterationRecord> iterations;
  StationarityReport final_stationarity;
  bool stopped_early = false;
  double wall_time_seconds = 0.0;
  std::uint64_t seed = 0;
};

/// Iterative node insertion and optimization: for t < T, sample trial nodes,
/// ascend |p| from each, insert violators of |p| <= alpha with zero weight,
/// train jointly, merge coincident nodes, polish the outer weights with the
/// semi-smooth Newton solver and drop zero weights. Stops early when nothing
/// was inserted and the stationarity check passes.
std::pair<ShallowNet, TrainReport> run_algorithm1(const Dataset& data, const AlgorithmConfig& cfg);

/// Per-iteration trial seed derived from the run seed.
std::uint64_t iteration_seed(std::uint64_t seed, int t);

void to_json(nlohmann::json& j, const AlgorithmConfig& cfg);
/// Reads the scalar fields; `init` is left untouched.
void from_json(const nlohmann::json& j, AlgorithmConfig& cfg);
void to_json(nlohmann::json& j, const TrainReport& report);

}  // namespace sparsenet
