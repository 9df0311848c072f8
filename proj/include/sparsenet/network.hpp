#pragma once

#include <vector>

#include "sparsenet/geometry.hpp"

namespace sparsenet {

/// Shallow ReLU network x -> sum_n c_n max(a_n . x + b_n, 0), equivalently the
/// atomic measure sum_n c_n delta_{omega_n} on the sphere.
///
/// Nodes are stored columnwise in a (d+1) x N matrix; every column is a valid
/// SphereNode.
class ShallowNet {
 public:
  explicit ShallowNet(int dim = 1);
  ShallowNet(const std::vector<SphereNode>& nodes, Vector weights);
  /// Takes a (d+1) x N matrix of unit columns; validated like SphereNode.
  ShallowNet(Matrix sphere_nodes, Vector weights);

  int dim() const { return dim_; }
  int width() const { return static_cast<int>(weights_.size()); }
  bool empty() const { return weights_.size() == 0; }

  const Matrix& nodes() const { return nodes_; }
  const Vector& weights() const { return weights_; }
  SphereNode node(int n) const { return SphereNode(nodes_.col(n)); }
  double weight(int n) const { return weights_[n]; }

  void set_weights(Vector weights);
  void append(const SphereNode& node, double weight);

  /// Stereographic coordinates of all nodes, d x N.
  Matrix charts() const { return sphere_to_chart(nodes_); }

 private:
  int dim_;
  Matrix nodes_;
  Vector weights_;
};

double evaluate(const ShallowNet& net, const Vector& x);

/// Network values at the rows of xs (K x d).
Vector evaluate(const ShallowNet& net, const Matrix& xs);

/// Rescales raw inner weights onto the sphere, moving the scale into c.
ShallowNet normalize_homogeneous(const std::vector<Vector>& raw_nodes, const Vector& c);

/// Replaces groups of nodes within chord distance tol by one node carrying the
/// summed weight, placed at the group member of largest |c|.
ShallowNet merge_duplicates(const ShallowNet& net, double tol = 1e-6);

/// Drops nodes whose weight is exactly zero.
ShallowNet prune_zeros(const ShallowNet& net);

}  // namespace sparsenet
