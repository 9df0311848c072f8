#include "sparsenet/outer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "sparsenet/loss_dual.hpp"

namespace sparsenet {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
// Shorter Newton steps count as failures and hand over to the fallback.
constexpr double kMinNewtonStep = 1.0 / 64.0;

double sign_of(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

int support_size(const Vector& c) {
  int n = 0;
  for (Eigen::Index i = 0; i < c.size(); ++i) n += c[i] != 0.0;
  return n;
}

}  // namespace

double OuterSolveConfig::lambda_for(const PenaltySpec& spec) const {
  const double gamma = spec.curvature();
  const double lam = lambda.value_or(gamma > 0.0 ? std::min(1.0, 0.5 / gamma) : 1.0);
  if (!(lam > 0.0)) throw std::domain_error("normal-map lambda must be positive");
  if (lam * gamma >= 1.0) throw NonUniqueProx("normal-map lambda violates lambda * gamma < 1");
  return lam;
}

OuterProblem::OuterProblem(Matrix features, Vector ys, PenaltySpec spec, double alpha)
    : features_(std::move(features)), ys_(std::move(ys)), spec_(spec), alpha_(alpha) {
  if (features_.rows() != ys_.size()) throw std::invalid_argument("feature rows differ from data size");
  if (!(alpha_ >= 0.0)) throw std::domain_error("alpha must be nonnegative");
  check_penalty(spec_);
}

OuterProblem OuterProblem::from(const ShallowNet& net, const Dataset& data, const PenaltySpec& spec,
                                double alpha) {
  return OuterProblem(feature_matrix(net.nodes(), data.xs), data.ys, spec, alpha);
}

double OuterProblem::loss(const Vector& c) const { return loss_from_residual(residual(c)); }

double OuterProblem::objective(const Vector& c) const { return loss(c) + alpha_ * total_penalty(spec_, c); }

Vector OuterProblem::loss_grad(const Vector& c) const {
  return features_.transpose() * residual(c) / static_cast<double>(ys_.size());
}

Vector OuterProblem::smooth_grad(const Vector& c) const {
  Vector g = loss_grad(c);
  if (spec_.kind == PenaltyKind::L1) return g;
  for (Eigen::Index n = 0; n < c.size(); ++n) {
    if (c[n] != 0.0) g[n] += alpha_ * (phi_derivative(spec_, std::abs(c[n])) - 1.0) * sign_of(c[n]);
  }
  return g;
}

double OuterProblem::smooth_change(const Vector& c, const Vector& step) const {
  const Vector dr = features_ * step;
  const double quad = residual(c).dot(dr) / static_cast<double>(ys_.size()) + dr.squaredNorm() / (2.0 * ys_.size());
  return quad + concave_change(c, step);
}

double OuterProblem::smooth_change_gram(const Vector& c, const Vector& loss_gradient, const Vector& step) const {
  return loss_gradient.dot(step) + 0.5 * step.dot(gram() * step) + concave_change(c, step);
}

double OuterProblem::concave_change(const Vector& c, const Vector& step) const {
  if (spec_.kind == PenaltyKind::L1) return 0.0;
  double change = 0.0;
  for (Eigen::Index n = 0; n < c.size(); ++n) {
    if (step[n] == 0.0) continue;
    const double before = std::abs(c[n]);
    const double after = std::abs(c[n] + step[n]);
    change += (phi_value(spec_, after) - phi_value(spec_, before)) - (after - before);
  }
  return alpha_ * change;
}

const Matrix& OuterProblem::gram() const {
  if (!gram_) {
    Matrix g = Matrix::Zero(features_.cols(), features_.cols());
    g.selfadjointView<Eigen::Lower>().rankUpdate(features_.transpose(), 1.0 / static_cast<double>(ys_.size()));
    gram_ = g.selfadjointView<Eigen::Lower>();
  }
  return *gram_;
}

Vector OuterProblem::normal_map(const Vector& q, double lambda) const {
  const Vector c = soft_threshold(lambda, q);
  return smooth_grad(c) + (alpha_ / lambda) * (q - c);
}

Vector OuterProblem::normal_map_point(const Vector& c, double lambda) const {
  const Vector g = smooth_grad(c);
  Vector q(c.size());
  for (Eigen::Index n = 0; n < c.size(); ++n) {
    if (c[n] != 0.0) {
      q[n] = c[n] + lambda * sign_of(c[n]);
    } else {
      q[n] = std::clamp(-(lambda / alpha_) * g[n], -lambda, lambda);
    }
  }
  return q;
}

double OuterProblem::prox_residual(const Vector& c, double step) const {
  const Vector next = soft_threshold(alpha_ * step, Vector(c - step * smooth_grad(c)));
  return (c - next).norm() / step;
}

Vector smooth_part_grad(const ShallowNet& net, const Dataset& data, const PenaltySpec& spec, double alpha,
                        const Vector& c) {
  if (c.size() != net.width()) throw std::invalid_argument("weight vector length differs from width");
  return OuterProblem::from(net, data, spec, alpha).smooth_grad(c);
}

bool prox_gradient_step(const OuterProblem& problem, Vector& c, double& step, const OuterSolveConfig& cfg) {
  const double alpha = problem.alpha();
  const Vector g = problem.smooth_grad(c);
  while (step > 1e-30) {
    if (alpha * step <= 0.0) return false;
    const Vector next = soft_threshold(alpha * step, Vector(c - step * g));
    const Vector delta = next - c;
    const double dsq = delta.squaredNorm();
    if (dsq == 0.0) return true;
    const double change = problem.smooth_change(c, delta);
    const double model = g.dot(delta) + dsq / (2.0 * step);
    const double slack = 64.0 * kEps * (std::abs(change) + std::abs(g.dot(delta)));
    if (change <= model + slack) {
      c = next;
      return true;
    }
    step *= cfg.armijo_shrink;
  }
  return false;
}

double coordinate_sweeps(const OuterProblem& problem, Vector& c, int sweeps) {
  if (c.size() != problem.size()) throw std::invalid_argument("weight vector length differs from width");
  const Matrix& a = problem.features();
  const double inv_k = 1.0 / static_cast<double>(a.rows());
  const double alpha = problem.alpha();
  const PenaltySpec& spec = problem.penalty();
  const Vector diag = a.colwise().squaredNorm().transpose() * inv_k;
  Vector r = problem.residual(c);
  double last_change = 0.0;
  for (int s = 0; s < sweeps; ++s) {
    last_change = 0.0;
    for (int n = 0; n < problem.size(); ++n) {
      const double h = diag[n];
      if (!(h > 0.0)) continue;
      const double lam = alpha / h;
      const double q = c[n] - a.col(n).dot(r) * inv_k / h;
      double next = 0.0;
      if (lam * spec.curvature() < 1.0) {
        next = phi_prox(spec, lam, q);
      } else {
        // Several local minimizers: only accept the move to zero when it helps.
        const double keep = 0.5 * (c[n] - q) * (c[n] - q) + lam * phi_value(spec, std::abs(c[n]));
        next = 0.5 * q * q < keep ? 0.0 : c[n];
      }
      const double delta = next - c[n];
      if (delta == 0.0) continue;
      c[n] = next;
      r += a.col(n) * delta;
      last_change = std::max(last_change, std::abs(delta));
    }
  }
  return last_change;
}

bool orthant_newton_step(const OuterProblem& problem, Vector& c) {
  const int n = problem.size();
  const double alpha = problem.alpha();
  const PenaltySpec& spec = problem.penalty();
  const Matrix& gram = problem.gram();
  const Vector g = problem.loss_grad(c);

  // Working set: the support with its signs plus every zero coordinate whose
  // loss gradient beats alpha, entering with the descent sign.
  std::vector<int> work;
  Vector sign = Vector::Zero(n);
  for (int i = 0; i < n; ++i) {
    if (c[i] != 0.0) {
      sign[i] = sign_of(c[i]);
    } else if (std::abs(g[i]) > alpha) {
      sign[i] = -sign_of(g[i]);
    } else {
      continue;
    }
    work.push_back(i);
  }

  Vector dir;
  Vector rg;
  double t_start = 1.0;
  double t_break = std::numeric_limits<double>::infinity();
  int i_break = -1;
  while (true) {
    if (work.empty()) return false;
    const int m = static_cast<int>(work.size());
    Matrix h(m, m);
    rg.resize(m);
    for (int i = 0; i < m; ++i) {
      const int wi = work[i];
      for (int j = 0; j < m; ++j) h(i, j) = gram(wi, work[j]);
      const double z = std::abs(c[wi]);
      h(i, i) += alpha * phi_second_derivative(spec, z);
      rg[i] = g[wi] + alpha * phi_derivative(spec, z) * sign[wi];
    }

    // Spectral solve: the ReLU Gram matrix is often exactly singular (knots
    // outside the data, or several knots between the same two samples), and a
    // shifted Cholesky solve there returns noise instead of a Newton direction.
    const double unit = std::max(h.diagonal().cwiseAbs().maxCoeff(), kEps);
    const Eigen::SelfAdjointEigenSolver<Matrix> eig(h);
    const Vector& lam = eig.eigenvalues();
    const Matrix& vecs = eig.eigenvectors();
    const double null_tol = 1e-11 * unit;
    const double shift = lam[0] < -null_tol ? -lam[0] + 1e-10 * unit : 0.0;
    const Vector coef = vecs.transpose() * rg;
    Vector newton = Vector::Zero(m);
    Vector flat = Vector::Zero(m);
    for (int i = 0; i < m; ++i) {
      const double mu = lam[i] + shift;
      if (mu > null_tol) {
        newton -= (coef[i] / mu) * vecs.col(i);
      } else {
        flat -= coef[i] * vecs.col(i);
      }
    }

    // First sign change along a ray.
    const auto breakpoint = [&](const Vector& ray, int& index) {
      double t_min = std::numeric_limits<double>::infinity();
      index = -1;
      for (int i = 0; i < m; ++i) {
        const int wi = work[i];
        if (c[wi] != 0.0 && ray[i] * sign[wi] < 0.0) {
          const double t = -c[wi] / ray[i];
          if (t < t_min) {
            t_min = t;
            index = wi;
          }
        }
      }
      return t_min;
    };

    // Along a flat direction only the penalty changes, so go straight to the
    // breakpoint where a coordinate leaves the support.
    dir = newton;
    i_break = -1;
    if (flat.norm() > 1e-3 * rg.norm()) {
      int i_flat = -1;
      const double t_flat = breakpoint(flat, i_flat);
      if (std::isfinite(t_flat)) {
        dir = flat;
        t_break = t_flat;
        i_break = i_flat;
        t_start = t_flat;
      }
    }
    if (i_break < 0) {
      t_break = breakpoint(dir, i_break);
      t_start = std::min(1.0, t_break);
    }

    // Entering coordinates must move with their sign; otherwise drop them and solve again.
    std::vector<int> kept;
    for (int i = 0; i < m; ++i) {
      if (c[work[i]] != 0.0 || dir[i] * sign[work[i]] > 0.0) kept.push_back(work[i]);
    }
    if (kept.size() == work.size()) break;
    for (int wi : work) {
      if (c[wi] == 0.0) sign[wi] = 0.0;
    }
    work = std::move(kept);
    for (int wi : work) {
      if (c[wi] == 0.0) sign[wi] = -sign_of(g[wi]);
    }
  }
  if (!dir.allFinite() || !(rg.dot(dir) < 0.0)) return false;

  // Backtrack along the path projected onto the orthant of `sign`.
  const int m = static_cast<int>(work.size());
  for (double t = t_start; t >= 1e-12 * t_start; t *= 0.5) {
    Vector step = Vector::Zero(n);
    for (int i = 0; i < m; ++i) {
      const int wi = work[i];
      const double next = c[wi] + t * dir[i];
      step[wi] = (next * sign[wi] > 0.0 ? next : 0.0) - c[wi];
    }
    if (t == t_break) step[i_break] = -c[i_break];
    if (step.isZero(0.0)) return false;
    const double change =
        problem.smooth_change_gram(c, g, step) + alpha * ((c + step).lpNorm<1>() - c.lpNorm<1>());
    double model = 0.0;
    for (int i = 0; i < m; ++i) model += rg[i] * step[work[i]];
    if (change <= 1e-4 * model && change < 0.0) {
      c += step;
      for (int i = 0; i < n; ++i) {
        if (sign[i] != 0.0 && c[i] * sign[i] <= 0.0) c[i] = 0.0;
      }
      return true;
    }
  }
  return false;
}

OuterResult prox_grad_outer(const OuterProblem& problem, const Vector& c0, const OuterSolveConfig& cfg) {
  if (c0.size() != problem.size()) throw std::invalid_argument("warm start length differs from width");
  OuterResult out;
  out.c = c0;
  out.diagnostics.solver = "prox_grad";
  if (problem.size() == 0) {
    out.diagnostics.converged = true;
    out.diagnostics.objective = problem.objective(out.c);
    return out;
  }
  if (!(problem.alpha() > 0.0)) throw std::domain_error("prox_grad_outer requires alpha > 0");

  double step = cfg.prox_step_init;
  const double max_step = cfg.prox_step_init * 1e8;
  auto& diag = out.diagnostics;
  for (diag.iterations = 0; diag.iterations < cfg.max_iters; ++diag.iterations) {
    const double res = problem.prox_residual(out.c, step);
    diag.final_residual = res;
    if (res <= cfg.prox_tol) {
      diag.converged = true;
      break;
    }
    if (!prox_gradient_step(problem, out.c, step, cfg)) break;
    step = std::min(step / cfg.armijo_shrink, max_step);
  }
  if (!diag.converged) diag.final_residual = problem.prox_residual(out.c, step);
  diag.support = support_size(out.c);
  diag.objective = problem.objective(out.c);
  return out;
}

OuterResult prox_grad_outer(const ShallowNet& net, const Dataset& data, const PenaltySpec& spec, double alpha,
                            const OuterSolveConfig& cfg) {
  return prox_grad_outer(OuterProblem::from(net, data, spec, alpha), net.weights(), cfg);
}

namespace {

// Newton direction for the normal map at q. Active coordinates solve
// H_AA d_A = -R_A with H = gram + alpha diag(phi''); inactive ones follow from
// (alpha / lambda) d_I = -(R_I + H_IA d_A).
bool newton_direction(const OuterProblem& problem, const Vector& q, const Vector& res, double lambda,
                      double shift, Vector& direction) {
  const int n = problem.size();
  const double alpha = problem.alpha();
  const Vector c = soft_threshold(lambda, q);
  std::vector<int> active, inactive;
  for (int i = 0; i < n; ++i) (std::abs(q[i]) > lambda ? active : inactive).push_back(i);

  const Matrix& gram = problem.gram();
  direction.setZero(n);
  Vector delta_active;
  if (!active.empty()) {
    const int m = static_cast<int>(active.size());
    Matrix h(m, m);
    Vector rhs(m);
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j) h(i, j) = gram(active[i], active[j]);
      h(i, i) += alpha * phi_second_derivative(problem.penalty(), std::abs(c[active[i]])) + shift;
      rhs[i] = -res[active[i]];
    }
    Eigen::LLT<Matrix> llt(h);
    if (llt.info() != Eigen::Success) return false;
    delta_active = llt.solve(rhs);
    if (!delta_active.allFinite()) return false;
    for (int i = 0; i < m; ++i) direction[active[i]] = delta_active[i];
  }
  for (int i : inactive) {
    double coupling = 0.0;
    for (std::size_t j = 0; j < active.size(); ++j) coupling += gram(i, active[j]) * delta_active[j];
    direction[i] = -(lambda / alpha) * (res[i] + coupling);
  }
  return true;
}

// Levenberg shift max(0, alpha gamma - sigma_min(gram_AA)) + 1e-12.
double levenberg_shift(const OuterProblem& problem, const Vector& q, double lambda) {
  std::vector<int> active;
  for (int i = 0; i < problem.size(); ++i) {
    if (std::abs(q[i]) > lambda) active.push_back(i);
  }
  double sigma_min = 0.0;
  if (!active.empty()) {
    const int m = static_cast<int>(active.size());
    Matrix h(m, m);
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j) h(i, j) = problem.gram()(active[i], active[j]);
    }
    Eigen::SelfAdjointEigenSolver<Matrix> eig(h, Eigen::EigenvaluesOnly);
    sigma_min = eig.eigenvalues().minCoeff();
  }
  const double curvature = problem.alpha() * problem.penalty().curvature();
  return std::max(0.0, curvature - sigma_min) + 1e-12;
}

}  // namespace

OuterResult ssn_outer(const OuterProblem& problem, const Vector& c0, const OuterSolveConfig& cfg) {
  if (c0.size() != problem.size()) throw std::invalid_argument("warm start length differs from width");
  const double lambda = cfg.lambda_for(problem.penalty());
  const double alpha = problem.alpha();
  if (!(alpha > 0.0)) throw std::domain_error("ssn_outer requires alpha > 0");

  OuterResult out;
  auto& diag = out.diagnostics;
  diag.solver = "ssn";
  if (problem.size() == 0) {
    out.c = c0;
    diag.converged = true;
    diag.objective = problem.objective(out.c);
    return out;
  }

  // The residual is measured in the max norm; for small alpha the target is
  // tightened so node residuals stay a tiny fraction of alpha.
  const double tol = cfg.normal_map_tol * std::min(1.0, alpha);
  Vector q = problem.normal_map_point(c0, lambda);
  Vector res = problem.normal_map(q, lambda);
  double res_norm = res.norm();
  int stalls = 0;

  for (diag.iterations = 0; diag.iterations < cfg.newton_max_iters; ++diag.iterations) {
    diag.residual_trace.push_back(res_norm);
    if (res.lpNorm<Eigen::Infinity>() <= tol) {
      diag.converged = true;
      break;
    }

    bool accepted = false;
    for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
      const double shift = attempt == 0 ? res_norm * res_norm : levenberg_shift(problem, q, lambda) + res_norm;
      Vector direction;
      if (!newton_direction(problem, q, res, lambda, shift, direction)) {
        if (attempt == 0) continue;
        break;
      }
      if (attempt == 1) ++diag.levenberg;
      for (double t = 1.0; t >= kMinNewtonStep; t *= 0.5) {
        const Vector trial = q + t * direction;
        const Vector trial_res = problem.normal_map(trial, lambda);
        const double trial_norm = trial_res.norm();
        if (trial_norm < (1.0 - 1e-4 * t) * res_norm) {
          q = trial;
          res = trial_res;
          res_norm = trial_norm;
          accepted = true;
          break;
        }
      }
    }
    if (accepted) {
      stalls = 0;
      continue;
    }

    // Newton made no progress on the residual: descend on J directly with
    // orthant-projected Newton steps (a coordinate sweep if those cannot move)
    // and restart the normal map from the resulting weights.
    ++diag.fallbacks;
    Vector c = soft_threshold(lambda, q);
    const Vector before = c;
    int steps = 0;
    while (steps < cfg.fallback_newton_steps && orthant_newton_step(problem, c)) ++steps;
    if (steps == 0) coordinate_sweeps(problem, c, cfg.fallback_sweeps);
    const bool moved = c != before;
    const Vector q_next = problem.normal_map_point(c, lambda);
    const Vector res_next = problem.normal_map(q_next, lambda);
    // Stop once neither Newton nor the fallback can lower J any further.
    if (moved) {
      stalls = 0;
    } else if (++stalls >= 3) {
      break;
    }
    q = q_next;
    res = res_next;
    res_norm = res.norm();
  }

  out.c = soft_threshold(lambda, q);
  diag.final_residual = res.lpNorm<Eigen::Infinity>();
  diag.support = support_size(out.c);
  diag.objective = problem.objective(out.c);
  return out;
}

OuterResult ssn_outer(const ShallowNet& net, const Dataset& data, const PenaltySpec& spec, double alpha,
                      const OuterSolveConfig& cfg) {
  return ssn_outer(OuterProblem::from(net, data, spec, alpha), net.weights(), cfg);
}

void to_json(nlohmann::json& j, const OuterDiagnostics& d) {
  j = nlohmann::json{{"solver", d.solver},       {"iterations", d.iterations}, {"final_residual", d.final_residual},
                     {"support", d.support},     {"objective", d.objective},   {"converged", d.converged},
                     {"fallbacks", d.fallbacks}, {"levenberg", d.levenberg}};
}

}  // namespace sparsenet
