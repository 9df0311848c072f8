#include "sparsenet/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "sparsenet/insertion.hpp"
#include "sparsenet/loss_dual.hpp"

namespace sparsenet {

double StationarityReport::max_node_residual() const {
  return per_node_residual.size() == 0 ? 0.0 : per_node_residual.maxCoeff();
}

StationarityReport check_stationarity(const ShallowNet& net, const Dataset& data, const PenaltySpec& spec,
                                      double alpha, const StationarityOptions& options) {
  StationarityReport report;
  report.alpha = alpha;
  report.tol = options.tol;
  report.n_sphere_samples = options.n_samples;

  const Vector g = residual(net, data);
  const DualField field(data, g);
  const double inv_k = 1.0 / static_cast<double>(data.size());

  // Sampled |p| in chunks so the K x chunk feature block stays small.
  constexpr int kChunk = 512;
  const Matrix samples = sample_sphere(options.seed, data.dim(), options.n_samples);
  Vector abs_p(options.n_samples);
  for (int begin = 0; begin < options.n_samples; begin += kChunk) {
    const int count = std::min(kChunk, options.n_samples - begin);
    const Matrix block = feature_matrix(samples.middleCols(begin, count), data.xs);
    abs_p.segment(begin, count) = ((block.transpose() * g) * inv_k).cwiseAbs();
  }
  double max_abs = abs_p.size() > 0 ? abs_p.maxCoeff() : 0.0;

  // Refine the best samples by ascent.
  std::vector<int> order(options.n_samples);
  std::iota(order.begin(), order.end(), 0);
  const int n_ascents = std::min(options.n_ascents, options.n_samples);
  std::partial_sort(order.begin(), order.begin() + n_ascents, order.end(),
                    [&](int l, int r) { return abs_p[l] > abs_p[r] || (abs_p[l] == abs_p[r] && l < r); });
  std::vector<ChartPoint> starts;
  for (int i = 0; i < n_ascents; ++i) starts.push_back(ChartPoint{sphere_to_chart(Matrix(samples.col(order[i])))});
  InsertionConfig ascent_cfg;
  ascent_cfg.threads = options.threads;
  for (const Candidate& cand : ascend_all(field, starts, ascent_cfg)) max_abs = std::max(max_abs, cand.abs_p);
  report.n_ascents = n_ascents;
  report.max_abs_dual_sampled = max_abs;

  report.per_node_residual.resize(net.width());
  for (int n = 0; n < net.width(); ++n) {
    const double p = field.value(Vector(net.nodes().col(n)));
    const double c = net.weight(n);
    if (c == 0.0) {
      report.per_node_residual[n] = std::max(std::abs(p) - alpha, 0.0);
    } else {
      report.per_node_residual[n] = std::abs(p + alpha * phi_derivative(spec, std::abs(c)) * (c > 0 ? 1.0 : -1.0));
    }
  }

  report.dual_bound_pass = max_abs <= alpha * (1.0 + options.tol);
  report.node_pass = report.max_node_residual() <= alpha * options.tol;
  report.pass = report.dual_bound_pass && report.node_pass;
  return report;
}

bool representer_check(const ShallowNet& net, const Dataset& data) { return net.width() <= data.size(); }

namespace {

void require_center(const Eigen::Vector2d& center, int n_quad) {
  if (!(center.norm() < 1.0)) throw std::domain_error("radial center must satisfy |center| < 1");
  if (n_quad < 1) throw std::domain_error("n_quad must be positive");
}

}  // namespace

// The circle is parameterized through the direction a0 = (cos t, sin t) of a:
// omega(t) = (a0, -a0 . center) / s(t) with s(t) = sqrt(1 + (a0 . center)^2), so
// a . x + b = (a0 . (x - center)) / s. The measure (1 / (2 |a|)) dt = (s / 2) dt
// then reproduces (1/2) int max(a0 . (x - center), 0) dt = |x - center|.
double wnorm_radial_2d(const Eigen::Vector2d& center, int n_quad) {
  require_center(center, n_quad);
  const double h = 2.0 * std::numbers::pi / n_quad;
  double sum = 0.0;
  for (int i = 0; i < n_quad; ++i) {
    const double t = i * h;
    const double proj = std::cos(t) * center[0] + std::sin(t) * center[1];
    sum += 0.5 * std::sqrt(1.0 + proj * proj);
  }
  return sum * h;
}

double radial_representation(const Eigen::Vector2d& center, const Eigen::Vector2d& x, int n_quad) {
  require_center(center, n_quad);
  const double h = 2.0 * std::numbers::pi / n_quad;
  double sum = 0.0;
  for (int i = 0; i < n_quad; ++i) {
    const double t = i * h;
    const Eigen::Vector2d a0(std::cos(t), std::sin(t));
    const double s = std::sqrt(1.0 + std::pow(a0.dot(center), 2));
    const double activation = std::max(a0.dot(x - center) / s, 0.0);
    sum += activation * 0.5 * s;
  }
  return sum * h;
}

double fidelity_gap(const ShallowNet& net, const Dataset& data, const Vector& clean, const Vector& ys,
                    double alpha, double w_norm) {
  if (clean.size() != data.size() || ys.size() != data.size()) {
    throw std::invalid_argument("fidelity_gap: vector lengths differ from data size");
  }
  const double k = static_cast<double>(data.size());
  const double lhs = (evaluate(net, data.xs) - clean).squaredNorm() / k;
  const double noise = (ys - clean).squaredNorm() / k;
  return lhs - 2.0 * alpha * w_norm - noise;
}

double equiv_exponent(double p, double q) {
  if (!(p >= 1.0) || !(q >= 1.0)) throw std::domain_error("exponents must be >= 1");
  return 2.0 * p * q / (p + q);
}

double optimal_tau(double c_abs, double p, double q) {
  if (!(p >= 1.0) || !(q >= 1.0)) throw std::domain_error("exponents must be >= 1");
  // Stationarity of tau -> (1/p) c^p tau^-p + (1/q) tau^q gives tau^(p+q) = c^p.
  return std::pow(c_abs, p / (p + q));
}

double rebalanced_cost(double c_abs, double tau, double p, double q) {
  return std::pow(c_abs / tau, p) / p + std::pow(tau, q) / q;
}

double rms_error(const ShallowNet& net, const Dataset& data, const Vector& reference) {
  if (reference.size() != data.size()) throw std::invalid_argument("reference length differs from data size");
  return std::sqrt((evaluate(net, data.xs) - reference).squaredNorm() / static_cast<double>(data.size()));
}

void to_json(nlohmann::json& j, const StationarityReport& r) {
  j = nlohmann::json{{"alpha", r.alpha},
                     {"tol", r.tol},
                     {"max_abs_dual_sampled", r.max_abs_dual_sampled},
                     {"max_abs_dual_over_alpha", r.alpha > 0 ? r.max_abs_dual_sampled / r.alpha : 0.0},
                     {"max_node_residual", r.max_node_residual()},
                     {"n_sphere_samples", r.n_sphere_samples},
                     {"n_ascents", r.n_ascents},
                     {"dual_bound_pass", r.dual_bound_pass},
                     {"node_pass", r.node_pass},
                     {"pass", r.pass}};
}

}  // namespace sparsenet
