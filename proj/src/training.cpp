#include "sparsenet/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include <Eigen/Cholesky>

#include "sparsenet/loss_dual.hpp"

namespace sparsenet {

namespace {

// Chart points beyond this radius sit numerically on the south pole.
constexpr double kMaxChartRadius = 1e5;
constexpr double kMaxDamping = 1e16;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Loss gradient in the chart coordinates (d x N) together with the per-node
// Gauss-Newton blocks (d x d each, stacked horizontally).
struct ChartModel {
  Matrix grad;
  Matrix blocks;
};

ChartModel chart_model(const Matrix& charts, const Vector& c, const Matrix& xs, const Vector& g) {
  const int d = static_cast<int>(charts.rows());
  const int n_nodes = static_cast<int>(charts.cols());
  const int k_count = static_cast<int>(xs.rows());
  const double inv_k = 1.0 / k_count;
  ChartModel m{Matrix::Zero(d, n_nodes), Matrix::Zero(d, d * n_nodes)};
  const Matrix nodes = chart_to_sphere(charts);
  Vector v(d);
  for (int n = 0; n < n_nodes; ++n) {
    if (c[n] == 0.0) continue;
    const Vector z = charts.col(n);
    const double denom = 1.0 + z.squaredNorm();
    const Vector a = nodes.col(n).head(d);
    const double b = nodes(d, n);
    Vector gsum = Vector::Zero(d);
    Matrix bsum = Matrix::Zero(d, d);
    for (int k = 0; k < k_count; ++k) {
      const double u = xs.row(k).dot(a) + b;
      if (u <= 0.0) continue;
      v = xs.row(k).transpose() - (1.0 + u) * z;
      gsum += g[k] * v;
      bsum.selfadjointView<Eigen::Lower>().rankUpdate(v);
    }
    const double scale = 2.0 * c[n] / denom;
    m.grad.col(n) = scale * inv_k * gsum;
    m.blocks.middleCols(n * d, d) = (scale * scale * inv_k) * Matrix(bsum.selfadjointView<Eigen::Lower>());
  }
  return m;
}

// Damped Gauss-Newton direction, block by block, with one absolute damping
// shift for all nodes. Nodes of small weight then take short gradient-like steps.
Matrix chart_direction(const ChartModel& m, double shift) {
  const int d = static_cast<int>(m.grad.rows());
  Matrix dir = Matrix::Zero(d, m.grad.cols());
  for (Eigen::Index n = 0; n < m.grad.cols(); ++n) {
    if (m.grad.col(n).isZero(0.0)) continue;
    Matrix block = m.blocks.middleCols(n * d, d);
    block.diagonal().array() += shift;
    dir.col(n) = -block.llt().solve(Vector(m.grad.col(n)));
  }
  return dir;
}

// Largest mean diagonal over the blocks; the damping is measured in this unit.
double curvature_scale(const ChartModel& m) {
  const int d = static_cast<int>(m.grad.rows());
  double scale = 0.0;
  for (Eigen::Index n = 0; n < m.grad.cols(); ++n) {
    scale = std::max(scale, m.blocks.middleCols(n * d, d).trace() / d);
  }
  return scale;
}

double objective_at(const Matrix& features, const Vector& c, const Vector& ys, const PenaltySpec& spec,
                    double alpha) {
  return loss_from_residual(features * c - ys) + alpha * total_penalty(spec, c);
}

}  // namespace

std::uint64_t iteration_seed(std::uint64_t seed, int t) {
  return splitmix64(splitmix64(seed) ^ static_cast<std::uint64_t>(t));
}

JointResult train_joint(const ShallowNet& net, const Dataset& data, const PenaltySpec& spec, double alpha,
                        const JointConfig& cfg) {
  if (net.dim() != data.dim()) throw std::invalid_argument("network and data dimensions differ");
  JointResult out{net, {}};
  auto& diag = out.diagnostics;
  if (net.empty()) {
    diag.converged = true;
    return out;
  }

  Matrix charts = net.charts();
  Vector c = net.weights();
  Matrix features = feature_matrix(chart_to_sphere(charts), data.xs);
  double current = objective_at(features, c, data.ys, spec, alpha);
  diag.objective_trace.push_back(current);

  double damping = 1.0 / cfg.step_init;
  int quiet = 0;

  for (diag.epochs = 0; diag.epochs < cfg.epochs; ++diag.epochs) {
    const double before = current;
    bool moved = false;

    // Outer weights first, so freshly inserted zero-weight nodes can pick up mass.
    {
      const OuterProblem problem(features, data.ys, spec, alpha);
      const Vector old = c;
      coordinate_sweeps(problem, c, cfg.outer_sweeps);
      if (old != c) {
        moved = true;
        ++diag.outer_accepted;
      }
      current = objective_at(features, c, data.ys, spec, alpha);
    }

    // Chart coordinates: Levenberg-Marquardt on the loss with an Armijo test.
    const Vector g = features * c - data.ys;
    const ChartModel model = chart_model(charts, c, data.xs, g);
    if (!model.grad.isZero(0.0)) {
      const double current_loss = loss_from_residual(g);
      const double scale = curvature_scale(model);
      while (damping < kMaxDamping) {
        const Matrix dir = chart_direction(model, damping * scale + 1e-300);
        const double slope = (model.grad.array() * dir.array()).sum();
        const Matrix trial = charts + dir;
        if (slope < 0.0 && trial.colwise().norm().maxCoeff() < kMaxChartRadius) {
          Matrix trial_features = feature_matrix(chart_to_sphere(trial), data.xs);
          const double trial_loss = loss_from_residual(trial_features * c - data.ys);
          if (trial_loss <= current_loss + 1e-4 * slope) {
            charts = trial;
            features = std::move(trial_features);
            current = trial_loss + alpha * total_penalty(spec, c);
            damping = std::max(damping / 3.0, 1e-12);
            moved = true;
            ++diag.inner_accepted;
            break;
          }
        }
        damping *= 4.0;
      }
      if (damping >= kMaxDamping) {
        diag.step_underflow = true;
        damping = 1.0 / cfg.step_init;
      }
    }

    diag.objective_trace.push_back(current);
    if (!moved) {
      diag.converged = true;
      ++diag.epochs;
      break;
    }
    quiet = (before - current <= cfg.rel_tol * std::abs(before)) ? quiet + 1 : 0;
    if (quiet >= 3) {
      diag.converged = true;
      ++diag.epochs;
      break;
    }
  }

  if (diag.inner_accepted > 0 || diag.outer_accepted > 0) out.net = ShallowNet(chart_to_sphere(charts), c);
  return out;
}

std::pair<ShallowNet, TrainReport> run_algorithm1(const Dataset& data, const AlgorithmConfig& cfg) {
  if (!(cfg.alpha > 0.0)) throw std::domain_error("alpha must be positive");
  if (cfg.T < 1) throw std::domain_error("T must be at least 1");
  check_penalty(cfg.penalty);
  cfg.outer.lambda_for(cfg.penalty);

  const auto start = std::chrono::steady_clock::now();
  ShallowNet net = cfg.init.value_or(ShallowNet(data.dim()));
  if (net.dim() != data.dim()) throw std::invalid_argument("initial network and data dimensions differ");

  TrainReport report;
  report.seed = cfg.seed;
  for (int t = 0; t < cfg.T; ++t) {
    IterationRecord rec;
    rec.t = t;
    rec.width_start = net.width();

    InsertionConfig ins = cfg.insertion;
    ins.seed = iteration_seed(cfg.seed, t);
    rec.trial_seed = ins.seed;
    const DualField field = DualField::from_network(net, data);
    const std::vector<Candidate> candidates = ascend_all(field, sample_trials(ins, data.dim()), ins);
    for (const Candidate& cand : candidates) {
      rec.max_abs_p = std::max(rec.max_abs_p, cand.abs_p);
      rec.candidates_above_alpha += cand.abs_p > cfg.alpha;
    }
    ShallowNet half = select_and_insert(net, candidates, cfg.alpha, ins);
    rec.width_inserted = half.width();
    rec.inserted = half.width() - net.width();

    if (rec.inserted == 0 && cfg.early_stop &&
        check_stationarity(net, data, cfg.penalty, cfg.alpha, cfg.final_check).pass) {
      rec.width_end = net.width();
      rec.loss = loss_value(net, data);
      rec.penalty = total_penalty(cfg.penalty, net.weights());
      rec.objective = rec.loss + cfg.alpha * rec.penalty;
      report.iterations.push_back(std::move(rec));
      report.stopped_early = true;
      break;
    }

    JointResult joint = train_joint(half, data, cfg.penalty, cfg.alpha, cfg.joint);
    rec.joint = std::move(joint.diagnostics);
    ShallowNet merged = merge_duplicates(joint.net, cfg.merge_tol);
    rec.merged = joint.net.width() - merged.width();

    const OuterProblem problem = OuterProblem::from(merged, data, cfg.penalty, cfg.alpha);
    OuterResult polished = ssn_outer(problem, merged.weights(), cfg.outer);
    merged.set_weights(polished.c);
    rec.ssn = std::move(polished.diagnostics);
    rec.ssn.residual_trace.clear();

    net = prune_zeros(merged);
    rec.pruned = merged.width() - net.width();
    rec.width_end = net.width();
    rec.loss = loss_value(net, data);
    rec.penalty = total_penalty(cfg.penalty, net.weights());
    rec.objective = rec.loss + cfg.alpha * rec.penalty;
    report.iterations.push_back(std::move(rec));
  }

  report.final_stationarity = check_stationarity(net, data, cfg.penalty, cfg.alpha, cfg.final_check);
  report.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {std::move(net), std::move(report)};
}

void to_json(nlohmann::json& j, const AlgorithmConfig& cfg) {
  j = nlohmann::json{
      {"alpha", cfg.alpha},
      {"penalty", cfg.penalty},
      {"T", cfg.T},
      {"seed", cfg.seed},
      {"merge_tol", cfg.merge_tol},
      {"early_stop", cfg.early_stop},
      {"insertion",
       {{"n_trial", cfg.insertion.n_trial},
        {"ascent_max_iters", cfg.insertion.ascent_max_iters},
        {"ascent_grad_tol", cfg.insertion.ascent_grad_tol},
        {"dedup_tol", cfg.insertion.dedup_tol},
        {"threads", cfg.insertion.threads}}},
      {"outer",
       {{"max_iters", cfg.outer.max_iters},
        {"prox_step_init", cfg.outer.prox_step_init},
        {"prox_tol", cfg.outer.prox_tol},
        {"normal_map_tol", cfg.outer.normal_map_tol},
        {"newton_max_iters", cfg.outer.newton_max_iters},
        {"lambda", cfg.outer.lambda_for(cfg.penalty)}}},
      {"joint",
       {{"epochs", cfg.joint.epochs},
        {"step_init", cfg.joint.step_init},
        {"rel_tol", cfg.joint.rel_tol},
        {"outer_sweeps", cfg.joint.outer_sweeps}}},
      {"final_check",
       {{"n_samples", cfg.final_check.n_samples},
        {"tol", cfg.final_check.tol},
        {"n_ascents", cfg.final_check.n_ascents},
        {"seed", cfg.final_check.seed}}}};
}

namespace {

template <class T>
void read_opt(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

void from_json(const nlohmann::json& j, AlgorithmConfig& cfg) {
  read_opt(j, "alpha", cfg.alpha);
  read_opt(j, "penalty", cfg.penalty);
  read_opt(j, "T", cfg.T);
  read_opt(j, "seed", cfg.seed);
  read_opt(j, "merge_tol", cfg.merge_tol);
  read_opt(j, "early_stop", cfg.early_stop);
  if (j.contains("insertion")) {
    const auto& s = j.at("insertion");
    read_opt(s, "n_trial", cfg.insertion.n_trial);
    read_opt(s, "ascent_max_iters", cfg.insertion.ascent_max_iters);
    read_opt(s, "ascent_grad_tol", cfg.insertion.ascent_grad_tol);
    read_opt(s, "dedup_tol", cfg.insertion.dedup_tol);
    read_opt(s, "threads", cfg.insertion.threads);
  }
  if (j.contains("outer")) {
    const auto& s = j.at("outer");
    read_opt(s, "max_iters", cfg.outer.max_iters);
    read_opt(s, "prox_step_init", cfg.outer.prox_step_init);
    read_opt(s, "prox_tol", cfg.outer.prox_tol);
    read_opt(s, "normal_map_tol", cfg.outer.normal_map_tol);
    read_opt(s, "newton_max_iters", cfg.outer.newton_max_iters);
    if (s.contains("lambda")) cfg.outer.lambda = s.at("lambda").get<double>();
  }
  if (j.contains("joint")) {
    const auto& s = j.at("joint");
    read_opt(s, "epochs", cfg.joint.epochs);
    read_opt(s, "step_init", cfg.joint.step_init);
    read_opt(s, "rel_tol", cfg.joint.rel_tol);
    read_opt(s, "outer_sweeps", cfg.joint.outer_sweeps);
  }
  if (j.contains("final_check")) {
    const auto& s = j.at("final_check");
    read_opt(s, "n_samples", cfg.final_check.n_samples);
    read_opt(s, "tol", cfg.final_check.tol);
    read_opt(s, "n_ascents", cfg.final_check.n_ascents);
    read_opt(s, "seed", cfg.final_check.seed);
  }
  if (!(cfg.alpha > 0.0)) throw std::domain_error("alpha must be positive");
  if (cfg.T < 1) throw std::domain_error("T must be at least 1");
}

void to_json(nlohmann::json& j, const TrainReport& report) {
  nlohmann::json iters = nlohmann::json::array();
  for (const IterationRecord& r : report.iterations) {
    iters.push_back({{"t", r.t},
                     {"width_start", r.width_start},
                     {"width_inserted", r.width_inserted},
                     {"width_end", r.width_end},
                     {"candidates_above_alpha", r.candidates_above_alpha},
                     {"inserted", r.inserted},
                     {"merged", r.merged},
                     {"pruned", r.pruned},
                     {"max_abs_p", r.max_abs_p},
                     {"objective", r.objective},
                     {"loss", r.loss},
                     {"penalty", r.penalty},
                     {"trial_seed", r.trial_seed},
                     {"joint",
                      {{"epochs", r.joint.epochs},
                       {"inner_accepted", r.joint.inner_accepted},
                       {"outer_accepted", r.joint.outer_accepted},
                       {"step_underflow", r.joint.step_underflow},
                       {"converged", r.joint.converged}}},
                     {"ssn", r.ssn}});
  }
  j = nlohmann::json{{"iterations", iters},
                     {"final_stationarity", report.final_stationarity},
                     {"stopped_early", report.stopped_early},
                     {"wall_time_seconds", report.wall_time_seconds},
                     {"seed", report.seed}};
}

}  // namespace sparsenet
