#include "sparsenet/network.hpp"

#include <cmath>
#include <string>

namespace sparsenet {

ShallowNet::ShallowNet(int dim) : dim_(dim), nodes_(dim + 1, 0), weights_(0) {
  if (dim < 1) throw std::invalid_argument("network input dimension must be >= 1");
}

ShallowNet::ShallowNet(const std::vector<SphereNode>& nodes, Vector weights)
    : ShallowNet(nodes.empty() ? 1 : nodes.front().dim()) {
  if (static_cast<Eigen::Index>(nodes.size()) != weights.size()) {
    throw std::invalid_argument("node and weight counts differ");
  }
  nodes_.resize(dim_ + 1, static_cast<Eigen::Index>(nodes.size()));
  for (std::size_t n = 0; n < nodes.size(); ++n) {
    if (nodes[n].dim() != dim_) throw std::invalid_argument("nodes have mixed dimensions");
    nodes_.col(static_cast<Eigen::Index>(n)) = nodes[n].omega();
  }
  weights_ = std::move(weights);
}

ShallowNet::ShallowNet(Matrix sphere_nodes, Vector weights)
    : dim_(static_cast<int>(sphere_nodes.rows()) - 1),
      nodes_(std::move(sphere_nodes)),
      weights_(std::move(weights)) {
  if (dim_ < 1) throw std::invalid_argument("network input dimension must be >= 1");
  if (nodes_.cols() != weights_.size()) throw std::invalid_argument("node and weight counts differ");
  for (Eigen::Index n = 0; n < nodes_.cols(); ++n) SphereNode check(nodes_.col(n));
}

void ShallowNet::set_weights(Vector weights) {
  if (weights.size() != weights_.size()) throw std::invalid_argument("weight count mismatch");
  weights_ = std::move(weights);
}

void ShallowNet::append(const SphereNode& node, double weight) {
  if (node.dim() != dim_) throw std::invalid_argument("node dimension mismatch");
  const Eigen::Index n = nodes_.cols();
  nodes_.conservativeResize(Eigen::NoChange, n + 1);
  nodes_.col(n) = node.omega();
  weights_.conservativeResize(n + 1);
  weights_[n] = weight;
}

double evaluate(const ShallowNet& net, const Vector& x) {
  if (x.size() != net.dim()) {
    throw std::invalid_argument("dimension mismatch: network has d=" + std::to_string(net.dim()) +
                                ", input has " + std::to_string(x.size()));
  }
  double sum = 0.0;
  const Matrix& w = net.nodes();
  for (int n = 0; n < net.width(); ++n) {
    const double u = w.col(n).head(net.dim()).dot(x) + w(net.dim(), n);
    if (u > 0.0) sum += net.weight(n) * u;
  }
  return sum;
}

Vector evaluate(const ShallowNet& net, const Matrix& xs) {
  if (xs.cols() != net.dim()) {
    throw std::invalid_argument("dimension mismatch: network has d=" + std::to_string(net.dim()) +
                                ", inputs have " + std::to_string(xs.cols()) + " columns");
  }
  if (net.empty()) return Vector::Zero(xs.rows());
  const int d = net.dim();
  Matrix pre = xs * net.nodes().topRows(d);
  pre.rowwise() += net.nodes().row(d);
  return pre.cwiseMax(0.0) * net.weights();
}

ShallowNet normalize_homogeneous(const std::vector<Vector>& raw_nodes, const Vector& c) {
  if (static_cast<Eigen::Index>(raw_nodes.size()) != c.size()) {
    throw std::invalid_argument("node and weight counts differ");
  }
  std::vector<SphereNode> nodes;
  nodes.reserve(raw_nodes.size());
  Vector weights(c.size());
  for (std::size_t n = 0; n < raw_nodes.size(); ++n) {
    const double scale = raw_nodes[n].norm();
    if (!(scale > 0.0)) throw std::domain_error("zero raw node cannot be normalized");
    nodes.push_back(SphereNode::normalized(raw_nodes[n]));
    weights[static_cast<Eigen::Index>(n)] = c[static_cast<Eigen::Index>(n)] * scale;
  }
  if (nodes.empty()) {
    return ShallowNet(1);
  }
  return ShallowNet(nodes, std::move(weights));
}

ShallowNet merge_duplicates(const ShallowNet& net, double tol) {
  if (!(tol > 0.0)) throw std::domain_error("merge tolerance must be positive");
  const int width = net.width();
  std::vector<int> group(width, -1);
  std::vector<std::vector<int>> groups;
  // Single-link grouping: a node joins every group it is within tol of.
  for (int n = 0; n < width; ++n) {
    for (int m = 0; m < n; ++m) {
      if ((net.nodes().col(n) - net.nodes().col(m)).norm() > tol) continue;
      if (group[n] < 0) {
        group[n] = group[m];
        groups[group[m]].push_back(n);
      } else if (group[n] != group[m]) {
        const int keep = group[m], drop = group[n];
        for (int k : groups[drop]) {
          group[k] = keep;
          groups[keep].push_back(k);
        }
        groups[drop].clear();
      }
    }
    if (group[n] < 0) {
      group[n] = static_cast<int>(groups.size());
      groups.push_back({n});
    }
  }

  ShallowNet out(net.dim());
  for (int n = 0; n < width; ++n) {
    const auto& members = groups[group[n]];
    if (members.empty() || members.front() != n) continue;  // emit each group once, in first-member order
    int lead = members.front();
    double sum = 0.0;
    for (int k : members) {
      sum += net.weight(k);
      if (std::abs(net.weight(k)) > std::abs(net.weight(lead))) lead = k;
    }
    out.append(net.node(lead), sum);
  }
  return out;
}

ShallowNet prune_zeros(const ShallowNet& net) {
  ShallowNet out(net.dim());
  for (int n = 0; n < net.width(); ++n) {
    if (net.weight(n) != 0.0) out.append(net.node(n), net.weight(n));
  }
  return out;
}

}  // namespace sparsenet
