#pragma once

#include "sparsenet/data.hpp"
#include "sparsenet/network.hpp"

namespace sparsenet {

/// Design matrix A(k, n) = max(a_n . x_k + b_n, 0) for sphere nodes given
/// columnwise ((d+1) x N) and inputs given as rows of xs (K x d).
Matrix feature_matrix(const Matrix& sphere_nodes, const Matrix& xs);

/// g_k = net(x_k) - y_k.
Vector residual(const ShallowNet& net, const Dataset& data);

/// (1 / 2K) sum_k g_k^2.
double loss_value(const ShallowNet& net, const Dataset& data);
double loss_from_residual(const Vector& residual);

/// The dual variable p(omega) = (1/K) sum_k max(a . x_k + b, 0) g_k for a
/// fixed residual g. Immutable after construction; all queries are thread-safe.
/// Keeps its own copy of the inputs.
class DualField {
 public:
  DualField(const Dataset& data, Vector residual);
  static DualField from_network(const ShallowNet& net, const Dataset& data);

  int dim() const { return static_cast<int>(xt_.rows()); }
  int size() const { return static_cast<int>(residual_.size()); }
  const Vector& residual() const { return residual_; }

  double value(const SphereNode& node) const;
  double value(const Vector& omega) const;
  double value_chart(const Vector& z) const;

  /// p and its gradient with respect to the chart coordinates z.
  double value_and_grad_chart(const Vector& z, Vector& grad) const;

 private:
  Matrix xt_;  // d x K
  Vector residual_;
};

double dual_value(const DualField& field, const SphereNode& node);
Vector dual_grad_chart(const DualField& field, const ChartPoint& point);

/// Gradient of the loss in the outer weights; entry n equals dual_value at node n.
Vector outer_gradient(const ShallowNet& net, const Dataset& data);

}  // namespace sparsenet
