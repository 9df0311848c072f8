#pragma once

#include <cmath>
#include <functional>
#include <random>

#include "sparsenet/geometry.hpp"
#include "sparsenet/penalty.hpp"

namespace sparsenet::testing {

struct GridMin {
  double arg = 0.0;
  double value = 0.0;
};

inline double prox_objective(const PenaltySpec& spec, double lambda, double q, double c) {
  return 0.5 * (c - q) * (c - q) + lambda * phi_value(spec, std::abs(c));
}

// Brute-force prox on a uniform grid over [-|q| - 1, |q| + 1].
inline GridMin grid_prox(const PenaltySpec& spec, double lambda, double q, double h = 1e-4) {
  const double lo = -std::abs(q) - 1.0;
  const long steps = static_cast<long>(std::ceil((2.0 * std::abs(q) + 2.0) / h));
  GridMin best{lo, prox_objective(spec, lambda, q, lo)};
  for (long i = 1; i <= steps; ++i) {
    const double c = lo + h * static_cast<double>(i);
    const double v = prox_objective(spec, lambda, q, c);
    if (v < best.value) best = {c, v};
  }
  // Zero is a candidate in its own right (the dead zone).
  const double at_zero = prox_objective(spec, lambda, q, 0.0);
  if (at_zero < best.value) best = {0.0, at_zero};
  return best;
}

// Central differences of a scalar function of a vector.
inline Vector fd_gradient(const std::function<double(const Vector&)>& f, const Vector& x, double h) {
  Vector g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Vector xp = x;
    Vector xm = x;
    xp[i] += h;
    xm[i] -= h;
    g[i] = (f(xp) - f(xm)) / (2.0 * h);
  }
  return g;
}

inline double rel_error(const Vector& approx, const Vector& exact) {
  return (approx - exact).norm() / std::max(exact.norm(), 1e-300);
}

inline Vector uniform_vector(std::mt19937_64& rng, int n, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = u(rng);
  return v;
}

inline Matrix uniform_matrix(std::mt19937_64& rng, int rows, int cols, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  Matrix m(rows, cols);
  for (int j = 0; j < cols; ++j) {
    for (int i = 0; i < rows; ++i) m(i, j) = u(rng);
  }
  return m;
}

}  // namespace sparsenet::testing
