#include <doctest.h>

#include <cmath>
#include <random>

#include "sparsenet/geometry.hpp"
#include "test_support.hpp"

using namespace sparsenet;

namespace {

Vector vec(std::initializer_list<double> values) {
  Vector v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v[i++] = x;
  return v;
}

}  // namespace

TEST_SUITE("geometry") {
  TEST_CASE("chart_to_sphere examples") {
    const SphereNode north = chart_to_sphere(ChartPoint{vec({0.0})});
    CHECK(north.a()[0] == 0.0);
    CHECK(north.b() == 1.0);

    const SphereNode east = chart_to_sphere(ChartPoint{vec({1.0})});
    CHECK(east.a()[0] == 1.0);
    CHECK(east.b() == 0.0);

    const SphereNode e1 = chart_to_sphere(ChartPoint{vec({1.0, 0.0})});
    CHECK(e1.omega().isApprox(vec({1.0, 0.0, 0.0})));
  }

  TEST_CASE("sphere_to_chart examples") {
    CHECK(sphere_to_chart(SphereNode(vec({0.0, 1.0}))).z[0] == 0.0);
    CHECK(sphere_to_chart(SphereNode(vec({1.0, 0.0}))).z[0] == 1.0);
    CHECK_THROWS_AS(SphereNode(vec({0.0, -1.0})), SouthPoleError);
    Matrix south(2, 1);
    south << 0.0, -1.0;
    CHECK_THROWS_AS(sphere_to_chart(south), SouthPoleError);
  }

  TEST_CASE("SphereNode validation") {
    CHECK_THROWS_AS(SphereNode(vec({1.0, 1.0})), std::domain_error);
    CHECK_THROWS_AS(SphereNode(vec({1.0})), std::invalid_argument);
    const SphereNode n = SphereNode::normalized(vec({3.0, 4.0}));
    CHECK(n.a()[0] == doctest::Approx(0.6));
    CHECK(n.b() == doctest::Approx(0.8));
    CHECK_THROWS_AS(SphereNode::normalized(vec({0.0, 0.0})), std::domain_error);
  }

  TEST_CASE("relu_feature examples") {
    const SphereNode e(vec({1.0, 0.0}));
    CHECK(relu_feature(e, vec({0.5})) == 0.5);
    CHECK(relu_feature(e, vec({-0.5})) == 0.0);
    const SphereNode constant(vec({0.0, 1.0}));
    CHECK(relu_feature(constant, vec({-7.0})) == 1.0);
    CHECK_THROWS_AS(relu_feature(e, vec({1.0, 2.0})), std::invalid_argument);
  }

  TEST_CASE("feature_grad_chart on and off the support") {
    // z = 1 gives (a, b) = (1, 0): inactive for x < 0, kink at x = 0.
    CHECK(feature_grad_chart(ChartPoint{vec({1.0})}, vec({-0.5})).isZero(0.0));
    CHECK(feature_grad_chart(ChartPoint{vec({1.0})}, vec({0.0})).isZero(0.0));

    std::mt19937_64 rng(21);
    int checked = 0;
    while (checked < 50) {
      const int d = 1 + checked % 2;
      const Vector z = testing::uniform_vector(rng, d, -2.0, 2.0);
      const Vector x = testing::uniform_vector(rng, d, -1.0, 1.0);
      const SphereNode node = chart_to_sphere(ChartPoint{z});
      if (node.a().dot(x) + node.b() < 1e-3) continue;  // stay clear of the kink
      const auto f = [&](const Vector& zz) { return relu_feature(chart_to_sphere(ChartPoint{zz}), x); };
      const Vector fd = testing::fd_gradient(f, z, 1e-6);
      CHECK(testing::rel_error(feature_grad_chart(ChartPoint{z}, x), fd) <= 1e-5);
      ++checked;
    }
  }

  TEST_CASE("chord distance") {
    const SphereNode a(vec({1.0, 0.0}));
    const SphereNode b(vec({0.0, 1.0}));
    CHECK(chord_distance(a, b) == doctest::Approx(std::sqrt(2.0)));
    CHECK(chord_distance(a, a) == 0.0);
  }
}

TEST_SUITE("geometry properties") {
  TEST_CASE("chart images have unit norm") {
    std::mt19937_64 rng(22);
    for (int i = 0; i < 1000; ++i) {
      const int d = 1 + i % 3;
      const Vector z = testing::uniform_vector(rng, d, -50.0, 50.0);
      CHECK(std::abs(chart_to_sphere(ChartPoint{z}).omega().norm() - 1.0) <= 1e-12);
    }
  }

  TEST_CASE("chart round trip") {
    std::mt19937_64 rng(23);
    for (int i = 0; i < 1000; ++i) {
      const int d = 1 + i % 3;
      Vector z = testing::uniform_vector(rng, d, -1.0, 1.0);
      z *= std::pow(10.0, 3.0 * std::uniform_real_distribution<double>(0.0, 1.0)(rng)) / std::max(z.norm(), 1e-3);
      if (z.norm() > 1e3) z *= 1e3 / z.norm();
      const Vector back = sphere_to_chart(chart_to_sphere(ChartPoint{z})).z;
      CHECK((back - z).norm() <= 1e-12);
    }
  }

  TEST_CASE("columnwise chart maps agree with the scalar ones") {
    std::mt19937_64 rng(24);
    const Matrix z = testing::uniform_matrix(rng, 2, 20, -3.0, 3.0);
    const Matrix s = chart_to_sphere(z);
    for (int n = 0; n < 20; ++n) {
      CHECK((s.col(n) - chart_to_sphere(ChartPoint{z.col(n)}).omega()).norm() <= 1e-15);
    }
    CHECK((sphere_to_chart(s) - z).norm() <= 1e-12);
  }

  TEST_CASE("relu feature is positively homogeneous") {
    std::mt19937_64 rng(25);
    std::uniform_real_distribution<double> ut(0.1, 10.0);
    for (int i = 0; i < 200; ++i) {
      const Vector ab = testing::uniform_vector(rng, 3, -1.0, 1.0);
      const Vector x = testing::uniform_vector(rng, 2, -1.0, 1.0);
      const double tau = ut(rng);
      const double raw = std::max(ab.head(2).dot(x) + ab[2], 0.0);
      const double scaled = std::max(tau * ab.head(2).dot(x) + tau * ab[2], 0.0);
      CHECK(scaled == doctest::Approx(tau * raw).epsilon(1e-13));
      const SphereNode unit = SphereNode::normalized(ab);
      CHECK(relu_feature(unit, x) * ab.norm() == doctest::Approx(raw).epsilon(1e-12));
    }
  }
}
