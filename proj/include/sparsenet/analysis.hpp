#pragma once

#include <cstdint>

#include <json.hpp>

#include "sparsenet/data.hpp"
#include "sparsenet/network.hpp"
#include "sparsenet/penalty.hpp"

namespace sparsenet {

/// Evidence for the first-order conditions |p| <= alpha on the sphere and
/// p(omega_n) = -alpha phi'(|c_n|) sign(c_n) on the support.
struct StationarityReport {
  double alpha = 0.0;
  double tol = 0.0;
  double max_abs_dual_sampled = 0.0;  // over sphere samples and ascent maxima
  Vector per_node_residual;           // zero-weight nodes report max(|p| - alpha, 0)
  int n_sphere_samples = 0;
  int n_ascents = 0;
  bool dual_bound_pass = false;
  bool node_pass = false;
  bool pass = false;

  double max_node_residual() const;
};

struct StationarityOptions {
  int n_samples = 10000;
  double tol = 1e-2;
  int n_ascents = 20;  // ascents started from the largest sampled |p|
  std::uint64_t seed = 0x5eed;
  int threads = 1;
};

StationarityReport check_stationarity(const ShallowNet& net, const Dataset& data, const PenaltySpec& spec,
                                      double alpha, const StationarityOptions& options = {});

/// Width never exceeds the number of data points.
bool representer_check(const ShallowNet& net, const Dataset& data);

/// Total variation of the measure representing x -> |x - center| on the great
/// circle {(a, b) in S^2 : a . center + b = 0}, integrated with n_quad
/// trapezoid nodes. Requires |center| < 1.
double wnorm_radial_2d(const Eigen::Vector2d& center, int n_quad);

/// Evaluates the integral network of that measure at x with the same quadrature.
double radial_representation(const Eigen::Vector2d& center, const Eigen::Vector2d& x, int n_quad);

/// ||N - f||^2 - 2 alpha w_norm - ||y - f||^2 in the empirical L2 norm
/// (1/K) sum_k; nonpositive for a local solution.
double fidelity_gap(const ShallowNet& net, const Dataset& data, const Vector& clean, const Vector& ys,
                    double alpha, double w_norm);

/// Harmonic mean 2pq/(p+q) of the exponents.
double equiv_exponent(double p, double q);

/// Minimizer tau > 0 of (1/p) |c / tau|^p + (1/q) tau^q.
double optimal_tau(double c_abs, double p, double q);

/// Value of that cost at tau.
double rebalanced_cost(double c_abs, double tau, double p, double q);

/// Empirical L2 distance sqrt((1/K) sum_k (N(x_k) - f_k)^2).
double rms_error(const ShallowNet& net, const Dataset& data, const Vector& reference);

void to_json(nlohmann::json& j, const StationarityReport& r);

}  // namespace sparsenet
