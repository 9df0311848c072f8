#pragma once

#include <cstdint>
#include <vector>

#include "sparsenet/loss_dual.hpp"

namespace sparsenet {

struct InsertionConfig {
  int n_trial = 50;
  int ascent_max_iters = 200;
  double ascent_grad_tol = 1e-8;  // relative to |p| at the start point
  double dedup_tol = 1e-6;        // chord distance on the sphere
  std::uint64_t seed = 0;
  int threads = 1;
};

struct Candidate {
  ChartPoint point;
  double abs_p = 0.0;
};

struct AscentResult {
  ChartPoint point;
  double abs_p = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> trace;  // |p| after every accepted step, starting value first
};

/// n_trial chart points whose sphere images are iid uniform on S^d.
std::vector<ChartPoint> sample_trials(const InsertionConfig& cfg, int dim);

/// Uniform sphere samples as columns of a (d+1) x n matrix, south-pole draws redrawn.
Matrix sample_sphere(std::uint64_t seed, int dim, int count);

/// Armijo gradient ascent of |p| in chart coordinates (initial step 1, shrink 0.5,
/// slope factor 1e-4), run on |p| / |p(z0)| so the step scale is independent of
/// the residual magnitude.
AscentResult ascend_dual(const DualField& field, const ChartPoint& start, const InsertionConfig& cfg);

/// Ascends from every start point, using up to cfg.threads workers. Output order
/// matches the input order regardless of the thread count.
std::vector<Candidate> ascend_all(const DualField& field, const std::vector<ChartPoint>& starts,
                                  const InsertionConfig& cfg);

/// Keeps candidates with |p| > alpha, ordered by (|p| descending, z lexicographic),
/// drops those within dedup_tol of an existing or already accepted node, and
/// appends the rest with weight zero.
ShallowNet select_and_insert(const ShallowNet& net, std::vector<Candidate> candidates, double alpha,
                             const InsertionConfig& cfg);

}  // namespace sparsenet
