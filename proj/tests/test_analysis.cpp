#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Geometry>

#include "sparsenet/analysis.hpp"
#include "sparsenet/loss_dual.hpp"
#include "test_support.hpp"

using namespace sparsenet;

namespace {

Vector vec(std::initializer_list<double> values) {
  Vector v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v[i++] = x;
  return v;
}

Dataset grid_data(int k) {
  SyntheticSpec spec;
  spec.target.kind = TargetKind::GaussSin;
  spec.sampling = {SamplingKind::Grid1D, k};
  return generate(spec);
}

StationarityOptions quick_options() {
  StationarityOptions options;
  options.n_samples = 2000;
  options.n_ascents = 5;
  return options;
}

}  // namespace

TEST_SUITE("analysis") {
  TEST_CASE("empty network on zero targets is stationary") {
    Dataset data = grid_data(50);
    data.ys.setZero();
    const StationarityReport r = check_stationarity(ShallowNet(1), data, PenaltySpec::l1(), 1e-3, quick_options());
    CHECK(r.pass);
    CHECK(r.dual_bound_pass);
    CHECK(r.node_pass);
    CHECK(r.max_abs_dual_sampled == 0.0);
    CHECK(r.per_node_residual.size() == 0);
    CHECK(r.n_sphere_samples == 2000);
  }

  TEST_CASE("random network is not stationary") {
    std::mt19937_64 rng(81);
    const Dataset data = grid_data(100);
    const Matrix z = testing::uniform_matrix(rng, 1, 5, -2.0, 2.0);
    const ShallowNet net(chart_to_sphere(z), testing::uniform_vector(rng, 5, -1.0, 1.0));
    const StationarityReport r = check_stationarity(net, data, PenaltySpec::log(1.0), 1e-4, quick_options());
    CHECK_FALSE(r.pass);
    CHECK_FALSE(r.node_pass);
    CHECK(r.per_node_residual.size() == 5);
    CHECK(r.max_abs_dual_sampled > 1e-4 * 1.01);
  }

  TEST_CASE("node residual definition") {
    // One node at the constant feature with zero weight: residual max(|p| - alpha, 0).
    Dataset data = grid_data(10);
    data.ys.setConstant(-1.0);
    const ShallowNet net(std::vector<SphereNode>{SphereNode(vec({0.0, 1.0}))}, vec({0.0}));
    const StationarityReport r = check_stationarity(net, data, PenaltySpec::l1(), 0.25, quick_options());
    REQUIRE(r.per_node_residual.size() == 1);
    CHECK(r.per_node_residual[0] == doctest::Approx(0.75).epsilon(1e-14));
    CHECK(r.max_node_residual() == r.per_node_residual[0]);
  }

  TEST_CASE("representer examples") {
    const Dataset data = grid_data(3);
    CHECK(representer_check(ShallowNet(1), data));
    const Matrix z = Matrix::Constant(1, 3, 0.5);
    CHECK(representer_check(ShallowNet(chart_to_sphere(z), Vector::Ones(3)), data));
    const Matrix z4 = Matrix::Constant(1, 4, 0.5);
    CHECK_FALSE(representer_check(ShallowNet(chart_to_sphere(z4), Vector::Ones(4)), data));
  }

  TEST_CASE("radial norm at the origin") {
    CHECK(wnorm_radial_2d(Eigen::Vector2d::Zero(), 1000) == doctest::Approx(std::numbers::pi).epsilon(1e-10));
    CHECK_THROWS(wnorm_radial_2d(Eigen::Vector2d(1.0, 0.0), 1000));
    CHECK_THROWS(wnorm_radial_2d(Eigen::Vector2d::Zero(), 0));
  }

  TEST_CASE("radial integral network reproduces the distance") {
    std::mt19937_64 rng(82);
    for (int i = 0; i < 20; ++i) {
      const Eigen::Vector2d center = testing::uniform_vector(rng, 2, -0.5, 0.5);
      const Eigen::Vector2d x = testing::uniform_vector(rng, 2, -1.0, 1.0);
      CHECK(std::abs(radial_representation(center, x, 100000) - (x - center).norm()) <= 1e-8);
    }
  }

  TEST_CASE("fidelity_gap examples") {
    const Dataset data = grid_data(4);
    const Vector clean = Vector::Ones(4);
    const Vector noisy = vec({1.5, 0.5, 1.5, 0.5});
    // Empty network: distance 1, noise 0.25.
    CHECK(fidelity_gap(ShallowNet(1), data, clean, noisy, 0.1, 2.0) == doctest::Approx(1.0 - 0.4 - 0.25));
    const ShallowNet constant(std::vector<SphereNode>{SphereNode(vec({0.0, 1.0}))}, vec({1.0}));
    CHECK(fidelity_gap(constant, data, clean, clean, 0.1, 1.0) == doctest::Approx(-0.2));
    CHECK_THROWS_AS(fidelity_gap(constant, data, Vector::Ones(3), clean, 0.1, 1.0), std::invalid_argument);
  }

  TEST_CASE("rms_error example") {
    const Dataset data = grid_data(4);
    CHECK(rms_error(ShallowNet(1), data, Vector::Constant(4, 2.0)) == doctest::Approx(2.0));
  }

  TEST_CASE("exponent balancing examples") {
    CHECK(equiv_exponent(2.0, 2.0) == 2.0);
    CHECK(equiv_exponent(1.0, 3.0) == 1.5);
    CHECK(equiv_exponent(1.0, 1.0) == 1.0);
    CHECK(optimal_tau(16.0, 1.0, 3.0) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(rebalanced_cost(16.0, 2.0, 1.0, 3.0) == doctest::Approx(32.0 / 3.0).epsilon(1e-15));
    CHECK_THROWS_AS(equiv_exponent(0.5, 2.0), std::domain_error);
    CHECK_THROWS_AS(optimal_tau(1.0, 2.0, 0.0), std::domain_error);
  }
}

TEST_SUITE("analysis properties") {
  TEST_CASE("radial norm converges under refinement") {
    std::mt19937_64 rng(83);
    for (int i = 0; i < 20; ++i) {
      const Eigen::Vector2d center = testing::uniform_vector(rng, 2, -0.6, 0.6);
      CHECK(std::abs(wnorm_radial_2d(center, 1000) - wnorm_radial_2d(center, 2000)) <= 1e-8);
    }
  }

  TEST_CASE("radial norm is rotation invariant") {
    std::mt19937_64 rng(84);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
    for (int i = 0; i < 20; ++i) {
      const Eigen::Vector2d center = testing::uniform_vector(rng, 2, -0.6, 0.6);
      const Eigen::Rotation2Dd rot(angle(rng));
      CHECK(std::abs(wnorm_radial_2d(rot * center, 2000) - wnorm_radial_2d(center, 2000)) <= 1e-10);
    }
  }

  TEST_CASE("balanced cost is minimal and matches the equivalent exponent") {
    std::mt19937_64 rng(85);
    std::uniform_real_distribution<double> uc(0.01, 10.0);
    std::uniform_real_distribution<double> ue(1.0, 4.0);
    std::uniform_real_distribution<double> us(0.5, 2.0);
    for (int i = 0; i < 200; ++i) {
      const double c = uc(rng);
      const double p = ue(rng);
      const double q = ue(rng);
      const double r = equiv_exponent(p, q);
      const double tau = optimal_tau(c, p, q);
      const double best = rebalanced_cost(c, tau, p, q);
      CHECK(best == doctest::Approx((2.0 / r) * std::pow(c, r / 2.0)).epsilon(1e-12));
      CHECK(rebalanced_cost(c, tau * us(rng), p, q) >= best * (1.0 - 1e-14));
    }
  }

  TEST_CASE("weight decay dominates the l1 path norm") {
    // For any split of a node into (tau omega, c / tau): (|c/tau|^2 + tau^2) / 2 >= |c|.
    std::mt19937_64 rng(86);
    std::uniform_real_distribution<double> u(0.01, 10.0);
    for (int i = 0; i < 500; ++i) {
      const double c = u(rng);
      const double tau = u(rng);
      CHECK(rebalanced_cost(c, tau, 2.0, 2.0) >= c * (1.0 - 1e-15));
    }
    CHECK(rebalanced_cost(4.0, optimal_tau(4.0, 2.0, 2.0), 2.0, 2.0) == doctest::Approx(4.0).epsilon(1e-15));
  }
}
