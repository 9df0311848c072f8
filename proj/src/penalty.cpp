#include "sparsenet/penalty.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

namespace sparsenet {

namespace {

void require_nonnegative(double z) {
  if (!(z >= 0.0)) {
    throw std::domain_error("penalty argument must be nonnegative, got " + std::to_string(z));
  }
}

// Positive root of gamma c^2 + (1 - gamma q) c + (lambda - q) = 0 for q > lambda,
// i.e. the stationary point of the log-penalty prox objective. Written to avoid
// cancellation when gamma q is small.
double log_prox_positive(double gamma, double lambda, double q) {
  const double beta = gamma * q - 1.0;
  const double disc = beta * beta + 4.0 * gamma * (q - lambda);
  const double root = std::sqrt(disc);
  if (beta < 0.0) return 2.0 * (q - lambda) / (root - beta);
  return (beta + root) / (2.0 * gamma);
}

}  // namespace

PenaltySpec PenaltySpec::log(double gamma) {
  PenaltySpec s{PenaltyKind::Log, gamma};
  check_penalty(s);
  return s;
}

PenaltySpec PenaltySpec::mcp(double gamma) {
  PenaltySpec s{PenaltyKind::Mcp, gamma};
  check_penalty(s);
  return s;
}

PenaltySpec PenaltySpec::mixed_log_l1(double gamma) {
  PenaltySpec s{PenaltyKind::MixedLogL1, gamma};
  check_penalty(s);
  return s;
}

void check_penalty(const PenaltySpec& spec) {
  if (spec.kind != PenaltyKind::L1 && !(spec.gamma > 0.0 && std::isfinite(spec.gamma))) {
    throw std::domain_error("penalty gamma must be positive and finite");
  }
}

std::string kind_name(PenaltyKind kind) {
  switch (kind) {
    case PenaltyKind::L1: return "l1";
    case PenaltyKind::Log: return "log";
    case PenaltyKind::Mcp: return "mcp";
    case PenaltyKind::MixedLogL1: return "mixed_log_l1";
  }
  return "unknown";
}

std::string describe(const PenaltySpec& spec) {
  if (spec.kind == PenaltyKind::L1) return "l1";
  std::ostringstream os;
  os << kind_name(spec.kind) << "(gamma=" << spec.gamma << ")";
  return os.str();
}

double phi_value(const PenaltySpec& spec, double z) {
  require_nonnegative(z);
  const double g = spec.gamma;
  switch (spec.kind) {
    case PenaltyKind::L1: return z;
    case PenaltyKind::Log: return std::log1p(g * z) / g;
    case PenaltyKind::Mcp: return z < 1.0 / g ? z - 0.5 * g * z * z : 0.5 / g;
    case PenaltyKind::MixedLogL1: return 0.5 * (z + std::log1p(2.0 * g * z) / (2.0 * g));
  }
  return 0.0;
}

double phi_derivative(const PenaltySpec& spec, double z) {
  require_nonnegative(z);
  const double g = spec.gamma;
  switch (spec.kind) {
    case PenaltyKind::L1: return 1.0;
    case PenaltyKind::Log: return 1.0 / (1.0 + g * z);
    case PenaltyKind::Mcp: return std::max(1.0 - g * z, 0.0);
    case PenaltyKind::MixedLogL1: return 0.5 * (1.0 + 1.0 / (1.0 + 2.0 * g * z));
  }
  return 0.0;
}

double phi_second_derivative(const PenaltySpec& spec, double z) {
  require_nonnegative(z);
  const double g = spec.gamma;
  switch (spec.kind) {
    case PenaltyKind::L1: return 0.0;
    case PenaltyKind::Log: {
      const double t = 1.0 + g * z;
      return -g / (t * t);
    }
    case PenaltyKind::Mcp: return z <= 1.0 / g ? -g : 0.0;
    case PenaltyKind::MixedLogL1: {
      const double t = 1.0 + 2.0 * g * z;
      return -g / (t * t);
    }
  }
  return 0.0;
}

double soft_threshold(double lambda, double q) {
  if (!(lambda > 0.0)) throw std::domain_error("soft_threshold: lambda must be positive");
  const double mag = std::abs(q) - lambda;
  return mag > 0.0 ? std::copysign(mag, q) : 0.0;
}

Eigen::VectorXd soft_threshold(double lambda, const Eigen::VectorXd& q) {
  if (!(lambda > 0.0)) throw std::domain_error("soft_threshold: lambda must be positive");
  Eigen::VectorXd out(q.size());
  for (Eigen::Index i = 0; i < q.size(); ++i) out[i] = soft_threshold(lambda, q[i]);
  return out;
}

double phi_prox(const PenaltySpec& spec, double lambda, double q) {
  if (!(lambda > 0.0)) throw std::domain_error("phi_prox: lambda must be positive");
  check_penalty(spec);
  if (lambda * spec.curvature() >= 1.0) {
    throw NonUniqueProx("phi_prox: lambda * gamma >= 1, prox is not single-valued");
  }
  const double aq = std::abs(q);
  if (aq <= lambda) return 0.0;
  const double g = spec.gamma;
  double mag = 0.0;
  switch (spec.kind) {
    case PenaltyKind::L1: mag = aq - lambda; break;
    case PenaltyKind::Log: mag = log_prox_positive(g, lambda, aq); break;
    case PenaltyKind::Mcp: mag = aq < 1.0 / g ? (aq - lambda) / (1.0 - lambda * g) : aq; break;
    case PenaltyKind::MixedLogL1:
      // c - q + lambda/2 + (lambda/2) / (1 + 2 gamma c) = 0 is the log-penalty
      // stationarity equation with (gamma, lambda, q) -> (2 gamma, lambda/2, q - lambda/2).
      mag = log_prox_positive(2.0 * g, 0.5 * lambda, aq - 0.5 * lambda);
      break;
  }
  return std::copysign(mag, q);
}

double total_penalty(const PenaltySpec& spec, const Eigen::VectorXd& c) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < c.size(); ++i) sum += phi_value(spec, std::abs(c[i]));
  return sum;
}

PenaltyValidity validate_penalty(const PenaltySpec& spec, double grid_max, int n_points) {
  constexpr double kSlack = 1e-8;
  PenaltyValidity v;
  if (n_points < 3 || !(grid_max > 0.0)) return v;
  const double h = grid_max / (n_points - 1);

  std::vector<double> val(n_points), der(n_points);
  for (int i = 0; i < n_points; ++i) {
    val[i] = phi_value(spec, i * h);
    der[i] = phi_derivative(spec, i * h);
  }

  v.normalized = std::abs(val[0]) <= 1e-12 && std::abs(der[0] - 1.0) <= kSlack;
  v.monotone = true;
  v.concave = true;
  double prev_slope = (val[1] - val[0]) / h;
  for (int i = 0; i + 1 < n_points; ++i) {
    const double slope = (val[i + 1] - val[i]) / h;
    if (val[i + 1] - val[i] < -kSlack) v.monotone = false;
    if (slope > prev_slope + kSlack) v.concave = false;
    if (der[i + 1] > der[i] + kSlack) v.concave = false;
    prev_slope = slope;
  }
  v.unbounded = der[n_points - 1] > kSlack;

  std::vector<double> rate(n_points - 1);
  for (int i = 0; i + 1 < n_points; ++i) {
    rate[i] = (der[i] - der[i + 1]) / h;
    v.gamma = std::max(v.gamma, rate[i]);
  }
  v.a1_pass = v.normalized && v.monotone && v.concave && v.unbounded;

  if (v.gamma > kSlack) {
    v.gamma_hat = 0.5 * v.gamma;
    int last = 0;
    while (last < n_points - 1 && rate[last] >= v.gamma_hat - kSlack) ++last;
    v.z_hat = last * h;
  }
  v.a2_pass = v.gamma_hat > kSlack && v.z_hat > 0.0;
  return v;
}

void to_json(nlohmann::json& j, const PenaltySpec& spec) {
  j = nlohmann::json{{"kind", kind_name(spec.kind)}};
  if (spec.kind != PenaltyKind::L1) j["gamma"] = spec.gamma;
}

void from_json(const nlohmann::json& j, PenaltySpec& spec) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "l1") {
    spec = PenaltySpec::l1();
    return;
  }
  const double gamma = j.at("gamma").get<double>();
  if (kind == "log") {
    spec = PenaltySpec::log(gamma);
  } else if (kind == "mcp") {
    spec = PenaltySpec::mcp(gamma);
  } else if (kind == "mixed_log_l1") {
    spec = PenaltySpec::mixed_log_l1(gamma);
  } else {
    throw std::invalid_argument("unknown penalty kind '" + kind + "'");
  }
}

}  // namespace sparsenet
