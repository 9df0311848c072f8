#pragma once

#include <stdexcept>

#include <Eigen/Core>

namespace sparsenet {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Raised for nodes at (or numerically at) the excluded south pole (0, -1).
class SouthPoleError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A neuron's inner weights omega = (a, b) on the unit sphere S^d in R^{d+1}.
/// The last coordinate is the offset b.
class SphereNode {
 public:
  static constexpr double kUnitTol = 1e-12;
  static constexpr double kSouthPoleTol = 1e-12;

  /// Requires a unit vector of size >= 2 away from the south pole.
  explicit SphereNode(Vector omega);

  /// Normalizes an arbitrary nonzero (a, b).
  static SphereNode normalized(const Vector& raw);

  int dim() const { return static_cast<int>(omega_.size()) - 1; }
  const Vector& omega() const { return omega_; }
  auto a() const { return omega_.head(dim()); }
  double b() const { return omega_[dim()]; }

 private:
  Vector omega_;
};

/// Stereographic coordinates z in R^d, projected from the south pole.
struct ChartPoint {
  Vector z;
};

SphereNode chart_to_sphere(const ChartPoint& point);
ChartPoint sphere_to_chart(const SphereNode& node);

/// Columnwise versions: Z is d x N, the sphere matrix (d+1) x N.
Matrix chart_to_sphere(const Matrix& charts);
Matrix sphere_to_chart(const Matrix& sphere);

/// ReLU feature max(a . x + b, 0).
double relu_feature(const SphereNode& node, const Vector& x);

/// Gradient of z -> relu_feature(chart_to_sphere(z), x); zero at and beyond the kink.
Vector feature_grad_chart(const ChartPoint& point, const Vector& x);

/// Chord distance between two nodes.
double chord_distance(const SphereNode& lhs, const SphereNode& rhs);

}  // namespace sparsenet
