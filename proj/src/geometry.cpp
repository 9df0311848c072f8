#include "sparsenet/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace sparsenet {

namespace {

void require_dim(Eigen::Index expected, Eigen::Index got) {
  if (expected != got) {
    throw std::invalid_argument("dimension mismatch: expected " + std::to_string(expected) +
                                ", got " + std::to_string(got));
  }
}

}  // namespace

SphereNode::SphereNode(Vector omega) : omega_(std::move(omega)) {
  if (omega_.size() < 2) throw std::invalid_argument("sphere node needs d >= 1");
  if (!omega_.allFinite() || std::abs(omega_.norm() - 1.0) > kUnitTol) {
    throw std::domain_error("sphere node must have unit norm");
  }
  if (b() <= -1.0 + kSouthPoleTol) throw SouthPoleError("sphere node at the south pole");
}

SphereNode SphereNode::normalized(const Vector& raw) {
  const double n = raw.norm();
  if (!(n > 0.0) || !std::isfinite(n)) throw std::domain_error("cannot normalize a zero node");
  Vector unit = raw / n;
  // One more pass removes the last ulp of drift so the unit-norm check holds.
  unit /= unit.norm();
  return SphereNode(std::move(unit));
}

namespace {

// a / (1 + b); below the equator 1 + b cancels, so use (1 - b) a / |a|^2 instead.
template <class A>
Vector chart_of(const A& a, double b) {
  if (b >= 0.0) return a / (1.0 + b);
  return a * ((1.0 - b) / a.squaredNorm());
}

}  // namespace

SphereNode chart_to_sphere(const ChartPoint& point) {
  const Eigen::Index d = point.z.size();
  const double s = point.z.squaredNorm();
  Vector omega(d + 1);
  omega.head(d) = (2.0 / (1.0 + s)) * point.z;
  omega[d] = (1.0 - s) / (1.0 + s);
  return SphereNode(std::move(omega));
}

ChartPoint sphere_to_chart(const SphereNode& node) {
  if (node.b() <= -1.0 + SphereNode::kSouthPoleTol) {
    throw SouthPoleError("south pole has no stereographic coordinates");
  }
  return ChartPoint{chart_of(node.a(), node.b())};
}

Matrix chart_to_sphere(const Matrix& charts) {
  const Eigen::Index d = charts.rows();
  Matrix out(d + 1, charts.cols());
  for (Eigen::Index n = 0; n < charts.cols(); ++n) {
    const double s = charts.col(n).squaredNorm();
    out.col(n).head(d) = (2.0 / (1.0 + s)) * charts.col(n);
    out(d, n) = (1.0 - s) / (1.0 + s);
  }
  return out;
}

Matrix sphere_to_chart(const Matrix& sphere) {
  const Eigen::Index d = sphere.rows() - 1;
  Matrix out(d, sphere.cols());
  for (Eigen::Index n = 0; n < sphere.cols(); ++n) {
    const double b = sphere(d, n);
    if (b <= -1.0 + SphereNode::kSouthPoleTol) {
      throw SouthPoleError("south pole has no stereographic coordinates");
    }
    out.col(n) = chart_of(sphere.col(n).head(d), b);
  }
  return out;
}

double relu_feature(const SphereNode& node, const Vector& x) {
  require_dim(node.dim(), x.size());
  return std::max(node.a().dot(x) + node.b(), 0.0);
}

Vector feature_grad_chart(const ChartPoint& point, const Vector& x) {
  require_dim(point.z.size(), x.size());
  const double s = point.z.squaredNorm();
  const double denom = 1.0 + s;
  const double u = (2.0 * point.z.dot(x) + 1.0 - s) / denom;
  if (u <= 0.0) return Vector::Zero(x.size());
  // d/dz (2 z.x + 1 - |z|^2) / (1 + |z|^2) = 2 (x - (1 + u) z) / (1 + |z|^2)
  return (2.0 / denom) * (x - (1.0 + u) * point.z);
}

double chord_distance(const SphereNode& lhs, const SphereNode& rhs) {
  return (lhs.omega() - rhs.omega()).norm();
}

}  // namespace sparsenet
