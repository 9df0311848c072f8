#include "sparsenet/insertion.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <thread>

namespace sparsenet {

Matrix sample_sphere(std::uint64_t seed, int dim, int count) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix out(dim + 1, count);
  for (int i = 0; i < count; ++i) {
    Vector v(dim + 1);
    double norm = 0.0;
    do {
      for (int j = 0; j <= dim; ++j) v[j] = normal(rng);
      norm = v.norm();
      if (norm > 0.0) v /= norm;
    } while (!(norm > 0.0) || v[dim] < -1.0 + 1e-9);
    out.col(i) = v;
  }
  return out;
}

std::vector<ChartPoint> sample_trials(const InsertionConfig& cfg, int dim) {
  const Matrix sphere = sample_sphere(cfg.seed, dim, cfg.n_trial);
  const Matrix charts = sphere_to_chart(sphere);
  std::vector<ChartPoint> out;
  out.reserve(cfg.n_trial);
  for (int i = 0; i < cfg.n_trial; ++i) out.push_back(ChartPoint{charts.col(i)});
  return out;
}

AscentResult ascend_dual(const DualField& field, const ChartPoint& start, const InsertionConfig& cfg) {
  constexpr double kShrink = 0.5;
  constexpr double kSlope = 1e-4;

  AscentResult out;
  out.point = start;
  Vector grad;
  double p = field.value_and_grad_chart(start.z, grad);
  out.abs_p = std::abs(p);
  out.trace.push_back(out.abs_p);
  if (out.abs_p == 0.0) {
    out.converged = true;
    return out;
  }
  const double scale = 1.0 / out.abs_p;

  double step = 1.0;
  Vector z = start.z;
  double value = out.abs_p * scale;
  for (out.iterations = 0; out.iterations < cfg.ascent_max_iters; ++out.iterations) {
    const Vector dir = (p > 0.0 ? scale : -scale) * grad;
    const double dir_sq = dir.squaredNorm();
    if (std::sqrt(dir_sq) <= cfg.ascent_grad_tol) {
      out.converged = true;
      break;
    }
    bool accepted = false;
    for (; step > 1e-14; step *= kShrink) {
      const Vector trial = z + step * dir;
      Vector trial_grad;
      const double trial_p = field.value_and_grad_chart(trial, trial_grad);
      const double trial_value = std::abs(trial_p) * scale;
      if (trial_value >= value + kSlope * step * dir_sq && trial_value > value) {
        z = trial;
        p = trial_p;
        grad = std::move(trial_grad);
        value = trial_value;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    out.trace.push_back(std::abs(p));
    step = std::min(2.0 * step, 1e6);
  }
  out.point = ChartPoint{z};
  out.abs_p = std::abs(p);
  return out;
}

std::vector<Candidate> ascend_all(const DualField& field, const std::vector<ChartPoint>& starts,
                                  const InsertionConfig& cfg) {
  std::vector<Candidate> out(starts.size());
  auto work = [&](std::size_t begin, std::size_t stride) {
    for (std::size_t i = begin; i < starts.size(); i += stride) {
      const AscentResult r = ascend_dual(field, starts[i], cfg);
      out[i] = Candidate{r.point, r.abs_p};
    }
  };
  const std::size_t workers = std::clamp<std::size_t>(cfg.threads, 1, std::max<std::size_t>(starts.size(), 1));
  if (workers <= 1) {
    work(0, 1);
    return out;
  }
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work, w, workers);
  pool.clear();
  return out;
}

ShallowNet select_and_insert(const ShallowNet& net, std::vector<Candidate> candidates, double alpha,
                             const InsertionConfig& cfg) {
  if (!(alpha > 0.0)) throw std::domain_error("alpha must be positive");
  std::erase_if(candidates, [alpha](const Candidate& c) { return !(c.abs_p > alpha) || !c.point.z.allFinite(); });
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& l, const Candidate& r) {
    if (l.abs_p != r.abs_p) return l.abs_p > r.abs_p;
    return std::lexicographical_compare(l.point.z.begin(), l.point.z.end(), r.point.z.begin(), r.point.z.end());
  });

  ShallowNet out = net;
  for (const Candidate& cand : candidates) {
    const Matrix omega = chart_to_sphere(Matrix(cand.point.z));
    if (omega(out.dim(), 0) <= -1.0 + SphereNode::kSouthPoleTol) continue;
    bool duplicate = false;
    for (int n = 0; n < out.width() && !duplicate; ++n) {
      duplicate = (out.nodes().col(n) - omega.col(0)).norm() <= cfg.dedup_tol;
    }
    if (!duplicate) out.append(SphereNode::normalized(omega.col(0)), 0.0);
  }
  return out;
}

}  // namespace sparsenet
