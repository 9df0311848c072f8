#include "sparsenet/loss_dual.hpp"

#include <string>

namespace sparsenet {

Matrix feature_matrix(const Matrix& sphere_nodes, const Matrix& xs) {
  const Eigen::Index d = xs.cols();
  if (sphere_nodes.rows() != d + 1) {
    throw std::invalid_argument("dimension mismatch: nodes have d=" + std::to_string(sphere_nodes.rows() - 1) +
                                ", inputs have d=" + std::to_string(d));
  }
  Matrix pre = xs * sphere_nodes.topRows(d);
  pre.rowwise() += sphere_nodes.row(d);
  return pre.cwiseMax(0.0);
}

Vector residual(const ShallowNet& net, const Dataset& data) {
  return evaluate(net, data.xs) - data.ys;
}

double loss_from_residual(const Vector& residual) {
  return residual.squaredNorm() / (2.0 * static_cast<double>(residual.size()));
}

double loss_value(const ShallowNet& net, const Dataset& data) {
  return loss_from_residual(residual(net, data));
}

DualField::DualField(const Dataset& data, Vector residual)
    : xt_(data.xs.transpose()), residual_(std::move(residual)) {
  if (residual_.size() != data.size()) throw std::invalid_argument("residual length differs from data size");
}

DualField DualField::from_network(const ShallowNet& net, const Dataset& data) {
  return DualField(data, sparsenet::residual(net, data));
}

double DualField::value(const SphereNode& node) const { return value(node.omega()); }

double DualField::value(const Vector& omega) const {
  const Eigen::Index d = xt_.rows();
  if (omega.size() != d + 1) throw std::invalid_argument("dimension mismatch in dual evaluation");
  const auto a = omega.head(d);
  const double b = omega[d];
  double sum = 0.0;
  for (Eigen::Index k = 0; k < xt_.cols(); ++k) {
    const double u = a.dot(xt_.col(k)) + b;
    if (u > 0.0) sum += u * residual_[k];
  }
  return sum / static_cast<double>(xt_.cols());
}

double DualField::value_chart(const Vector& z) const {
  return value(chart_to_sphere(ChartPoint{z}).omega());
}

double DualField::value_and_grad_chart(const Vector& z, Vector& grad) const {
  const Eigen::Index d = xt_.rows();
  if (z.size() != d) throw std::invalid_argument("dimension mismatch in dual gradient");
  const double s = z.squaredNorm();
  const double denom = 1.0 + s;
  const Vector a = (2.0 / denom) * z;
  const double b = (1.0 - s) / denom;

  // grad u_k = 2 (x_k - (1 + u_k) z) / denom, so the sum splits into
  // sum g_k x_k and sum g_k (1 + u_k) over the active set.
  double sum = 0.0;
  double weight_z = 0.0;
  Vector weight_x = Vector::Zero(d);
  for (Eigen::Index k = 0; k < xt_.cols(); ++k) {
    const double u = a.dot(xt_.col(k)) + b;
    if (u > 0.0) {
      const double g = residual_[k];
      sum += u * g;
      weight_x += g * xt_.col(k);
      weight_z += g * (1.0 + u);
    }
  }
  const double inv_k = 1.0 / static_cast<double>(xt_.cols());
  grad = (2.0 * inv_k / denom) * (weight_x - weight_z * z);
  return sum * inv_k;
}

double dual_value(const DualField& field, const SphereNode& node) { return field.value(node); }

Vector dual_grad_chart(const DualField& field, const ChartPoint& point) {
  Vector grad;
  field.value_and_grad_chart(point.z, grad);
  return grad;
}

Vector outer_gradient(const ShallowNet& net, const Dataset& data) {
  const DualField field = DualField::from_network(net, data);
  Vector grad(net.width());
  for (int n = 0; n < net.width(); ++n) grad[n] = field.value(Vector(net.nodes().col(n)));
  return grad;
}

}  // namespace sparsenet
