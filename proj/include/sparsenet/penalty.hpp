#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Core>
#include <json.hpp>

namespace sparsenet {

/// Scalar sparsity penalty family phi applied to |c_n|.
///
/// All variants are concave, nondecreasing, phi(0) = 0 and phi'(0) = 1.
///   L1          phi(z) = z
///   Log         phi(z) = log(1 + gamma z) / gamma
///   Mcp         phi(z) = z - gamma z^2 / 2 on [0, 1/gamma), 1/(2 gamma) beyond
///   MixedLogL1  phi(z) = (z + log(1 + 2 gamma z) / (2 gamma)) / 2
enum class PenaltyKind { L1, Log, Mcp, MixedLogL1 };

struct PenaltySpec {
  PenaltyKind kind = PenaltyKind::L1;
  double gamma = 0.0;  // ignored for L1

  static PenaltySpec l1() { return {PenaltyKind::L1, 0.0}; }
  static PenaltySpec log(double gamma);
  static PenaltySpec mcp(double gamma);
  static PenaltySpec mixed_log_l1(double gamma);

  /// Lipschitz constant of phi' (the gamma of the gamma-convexity bound).
  double curvature() const { return kind == PenaltyKind::L1 ? 0.0 : gamma; }

  bool operator==(const PenaltySpec&) const = default;
};

/// Thrown when prox parameters leave the single-valued regime lambda * gamma < 1.
class NonUniqueProx : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Throws std::domain_error if gamma is not positive for a curved variant.
void check_penalty(const PenaltySpec& spec);

std::string kind_name(PenaltyKind kind);
std::string describe(const PenaltySpec& spec);

double phi_value(const PenaltySpec& spec, double z);
double phi_derivative(const PenaltySpec& spec, double z);

// Generalized second derivative. For Mcp the kink at 1/gamma takes the left value.
double phi_second_derivative(const PenaltySpec& spec, double z);

/// argmin_c 0.5 (c - q)^2 + lambda phi(|c|); exactly zero when |q| <= lambda.
double phi_prox(const PenaltySpec& spec, double lambda, double q);

double soft_threshold(double lambda, double q);
Eigen::VectorXd soft_threshold(double lambda, const Eigen::VectorXd& q);

/// Sum of phi(|c_n|). The regularization weight alpha is applied by callers.
double total_penalty(const PenaltySpec& spec, const Eigen::VectorXd& c);

/// Grid-based check of the structural assumptions on phi.
///
/// The basic assumption (a1) asks for phi(0) = 0, phi'(0) = 1, monotonicity,
/// concavity, growth to infinity and a finite Lipschitz constant `gamma` of
/// phi'. The strong subadditivity assumption (a2) asks for a positive lower
/// bound `gamma_hat` on the decrease rate of phi' on an interval [0, z_hat].
/// The fitted constants use gamma_hat = gamma / 2 and z_hat as the largest
/// grid point up to which the local decrease rate of phi' stays above it.
struct PenaltyValidity {
  bool normalized = false;
  bool monotone = false;
  bool concave = false;
  bool unbounded = false;
  bool a1_pass = false;
  bool a2_pass = false;
  double gamma = 0.0;
  double gamma_hat = 0.0;
  double z_hat = 0.0;
};

PenaltyValidity validate_penalty(const PenaltySpec& spec, double grid_max, int n_points);

void to_json(nlohmann::json& j, const PenaltySpec& spec);
void from_json(const nlohmann::json& j, PenaltySpec& spec);

}  // namespace sparsenet
