#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sparsenet/data.hpp"
#include "sparsenet/network.hpp"
#include "sparsenet/penalty.hpp"

namespace sparsenet {

struct OuterSolveConfig {
  int max_iters = 20000;  // proximal gradient iterations
  double prox_step_init = 1.0;
  double armijo_shrink = 0.5;
  double armijo_c = 1e-4;
  double prox_tol = 1e-10;
  double normal_map_tol = 1e-10;
  int newton_max_iters = 200;
  int fallback_newton_steps = 500;  // cap on orthant Newton steps on J when a Newton step fails
  int fallback_sweeps = 1;          // coordinate sweeps when those cannot move
  std::optional<double> lambda;  // normal-map parameter; default min(1, 0.5 / gamma)

  /// Resolved normal-map parameter; throws NonUniqueProx unless lambda * gamma < 1.
  double lambda_for(const PenaltySpec& spec) const;
};

struct OuterDiagnostics {
  std::string solver;
  int iterations = 0;
  double final_residual = 0.0;
  int support = 0;
  double objective = 0.0;
  bool converged = false;
  int fallbacks = 0;
  int levenberg = 0;
  std::vector<double> residual_trace;  // per Newton / prox iteration
};

struct OuterResult {
  Vector c;
  OuterDiagnostics diagnostics;
};

/// The outer-weight subproblem at fixed nodes:
///   J(c) = F(c) + alpha |c|_1,
///   F(c) = (1/2K) |A c - y|^2 + alpha sum_n (phi(|c_n|) - |c_n|),
/// with A the K x N feature matrix. F is C^2 because phi'(0) = 1.
class OuterProblem {
 public:
  OuterProblem(Matrix features, Vector ys, PenaltySpec spec, double alpha);
  static OuterProblem from(const ShallowNet& net, const Dataset& data, const PenaltySpec& spec,
                           double alpha);

  int size() const { return static_cast<int>(features_.cols()); }
  const Matrix& features() const { return features_; }
  const PenaltySpec& penalty() const { return spec_; }
  double alpha() const { return alpha_; }

  Vector residual(const Vector& c) const { return features_ * c - ys_; }
  double loss(const Vector& c) const;
  double objective(const Vector& c) const;
  Vector loss_grad(const Vector& c) const;
  Vector smooth_grad(const Vector& c) const;

  /// F(c + step) - F(c), evaluated without cancellation against F itself.
  double smooth_change(const Vector& c, const Vector& step) const;
  /// Same through the Gram matrix, given the loss gradient at c; O(N^2).
  double smooth_change_gram(const Vector& c, const Vector& loss_gradient, const Vector& step) const;

  /// (1/K) A^T A, cached on first use.
  const Matrix& gram() const;

  /// Robinson normal map R(q) = grad F(S(q)) + (alpha / lambda)(q - S(q)),
  /// S the soft-threshold at lambda.
  Vector normal_map(const Vector& q, double lambda) const;

  /// The q with S(q) = c and the smallest normal-map residual.
  Vector normal_map_point(const Vector& c, double lambda) const;

  /// Stationarity residual of a prox-gradient step at step size s.
  double prox_residual(const Vector& c, double step) const;

 private:
  double concave_change(const Vector& c, const Vector& step) const;

  Matrix features_;
  Vector ys_;
  PenaltySpec spec_;
  double alpha_;
  mutable std::optional<Matrix> gram_;
};

/// grad F(c) = grad loss + alpha (phi'(|c_n|) - 1) sign(c_n).
Vector smooth_part_grad(const ShallowNet& net, const Dataset& data, const PenaltySpec& spec, double alpha,
                        const Vector& c);

/// One proximal gradient step on F + alpha |.|_1 with backtracking from `step`.
/// Updates c and step in place; false on step underflow.
bool prox_gradient_step(const OuterProblem& problem, Vector& c, double& step, const OuterSolveConfig& cfg);

/// Cyclic exact coordinate minimization of J, `sweeps` passes. Coordinates whose
/// scalar prox is not single-valued only move to zero, and only when that lowers J.
/// Returns the largest change in the last sweep.
double coordinate_sweeps(const OuterProblem& problem, Vector& c, int sweeps);

/// One Newton step on J restricted to the orthant of the current signs, with
/// zero coordinates violating |grad loss| <= alpha added to the working set.
/// The path is clipped at sign changes and backtracked on J. False if J could
/// not be decreased.
bool orthant_newton_step(const OuterProblem& problem, Vector& c);

/// Backtracked proximal gradient on F + alpha |.|_1, warm-started at c0.
OuterResult prox_grad_outer(const OuterProblem& problem, const Vector& c0, const OuterSolveConfig& cfg);
OuterResult prox_grad_outer(const ShallowNet& net, const Dataset& data, const PenaltySpec& spec, double alpha,
                            const OuterSolveConfig& cfg);

/// Semi-smooth Newton on the normal map, warm-started at c0. Returns exact zeros.
OuterResult ssn_outer(const OuterProblem& problem, const Vector& c0, const OuterSolveConfig& cfg);
OuterResult ssn_outer(const ShallowNet& net, const Dataset& data, const PenaltySpec& spec, double alpha,
                      const OuterSolveConfig& cfg);

void to_json(nlohmann::json& j, const OuterDiagnostics& d);

}  // namespace sparsenet
