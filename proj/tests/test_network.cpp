#include <doctest.h>

#include <cmath>
#include <random>

#include "sparsenet/network.hpp"
#include "test_support.hpp"

using namespace sparsenet;

namespace {

Vector vec(std::initializer_list<double> values) {
  Vector v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v[i++] = x;
  return v;
}

ShallowNet random_net(std::mt19937_64& rng, int d, int width) {
  const Matrix z = testing::uniform_matrix(rng, d, width, -2.0, 2.0);
  return ShallowNet(chart_to_sphere(z), testing::uniform_vector(rng, width, -1.0, 1.0));
}

}  // namespace

TEST_SUITE("network") {
  TEST_CASE("evaluate examples") {
    const ShallowNet one(std::vector<SphereNode>{SphereNode(vec({1.0, 0.0}))}, vec({2.0}));
    CHECK(evaluate(one, vec({1.0})) == 2.0);
    CHECK(evaluate(ShallowNet(1), vec({0.3})) == 0.0);
    const ShallowNet two(std::vector<SphereNode>{SphereNode(vec({1.0, 0.0})), SphereNode(vec({0.0, 1.0}))}, vec({1.0, 3.0}));
    CHECK(evaluate(two, vec({2.0})) == 5.0);
    CHECK_THROWS_AS(evaluate(two, vec({1.0, 1.0})), std::invalid_argument);

    Matrix xs(3, 1);
    xs << -1.0, 0.5, 2.0;
    const Vector values = evaluate(two, xs);
    CHECK(values[0] == 3.0);
    CHECK(values[1] == 3.5);
    CHECK(values[2] == 5.0);
  }

  TEST_CASE("construction checks") {
    CHECK_THROWS_AS(ShallowNet(0), std::invalid_argument);
    CHECK_THROWS_AS(ShallowNet(std::vector<SphereNode>{SphereNode(vec({1.0, 0.0}))}, vec({1.0, 2.0})), std::invalid_argument);
    Matrix off(2, 1);
    off << 1.0, 1.0;
    CHECK_THROWS(ShallowNet(off, vec({1.0})));
    ShallowNet net(1);
    net.append(SphereNode(vec({0.0, 1.0})), 4.0);
    CHECK(net.width() == 1);
    CHECK_THROWS_AS(net.append(SphereNode(vec({0.0, 0.0, 1.0})), 1.0), std::invalid_argument);
    CHECK_THROWS_AS(net.set_weights(vec({1.0, 2.0})), std::invalid_argument);
  }

  TEST_CASE("normalize_homogeneous examples") {
    const ShallowNet net = normalize_homogeneous({vec({2.0, 0.0})}, vec({1.0}));
    CHECK(net.nodes()(0, 0) == 1.0);
    CHECK(net.nodes()(1, 0) == 0.0);
    CHECK(net.weight(0) == 2.0);

    const ShallowNet unit = normalize_homogeneous({vec({0.6, 0.8})}, vec({-3.0}));
    CHECK(unit.nodes().col(0).isApprox(vec({0.6, 0.8})));
    CHECK(unit.weight(0) == doctest::Approx(-3.0).epsilon(1e-15));

    CHECK_THROWS_AS(normalize_homogeneous({vec({0.0, 0.0})}, vec({1.0})), std::domain_error);
  }

  TEST_CASE("normalize_homogeneous preserves the function") {
    std::mt19937_64 rng(31);
    std::vector<Vector> raw;
    for (int n = 0; n < 12; ++n) raw.push_back(testing::uniform_vector(rng, 3, -3.0, 3.0));
    const Vector c = testing::uniform_vector(rng, 12, -2.0, 2.0);
    const ShallowNet net = normalize_homogeneous(raw, c);
    for (int i = 0; i < 100; ++i) {
      const Vector x = testing::uniform_vector(rng, 2, -1.0, 1.0);
      double direct = 0.0;
      for (int n = 0; n < 12; ++n) direct += c[n] * std::max(raw[n].head(2).dot(x) + raw[n][2], 0.0);
      CHECK(std::abs(evaluate(net, x) - direct) <= 1e-10);
    }
  }

  TEST_CASE("merge_duplicates examples") {
    const SphereNode e(vec({1.0, 0.0}));
    const SphereNode f(vec({0.0, 1.0}));
    const ShallowNet same(std::vector<SphereNode>{e, e}, vec({1.0, 2.0}));
    const ShallowNet merged = merge_duplicates(same, 1e-6);
    CHECK(merged.width() == 1);
    CHECK(merged.weight(0) == 3.0);

    const ShallowNet apart(std::vector<SphereNode>{e, f}, vec({1.0, 2.0}));
    CHECK(merge_duplicates(apart, 1e-6).width() == 2);

    const ShallowNet opposite(std::vector<SphereNode>{e, e}, vec({1.0, -1.0}));
    const ShallowNet cancelled = merge_duplicates(opposite, 1e-6);
    CHECK(cancelled.width() == 1);
    CHECK(cancelled.weight(0) == 0.0);
    CHECK(prune_zeros(cancelled).empty());

    CHECK_THROWS_AS(merge_duplicates(same, 0.0), std::domain_error);
  }

  TEST_CASE("merge keeps the location of the heaviest member") {
    const SphereNode a = SphereNode::normalized(vec({1.0, 0.0}));
    const SphereNode b = SphereNode::normalized(vec({1.0, 1e-8}));
    const ShallowNet net(std::vector<SphereNode>{a, b}, vec({0.5, -2.0}));
    const ShallowNet merged = merge_duplicates(net, 1e-6);
    REQUIRE(merged.width() == 1);
    CHECK(merged.nodes().col(0) == b.omega());
    CHECK(merged.weight(0) == -1.5);
  }

  TEST_CASE("merge error stays within the Lipschitz bound") {
    std::mt19937_64 rng(32);
    const double tol = 1e-3;
    ShallowNet net = random_net(rng, 2, 6);
    double moved_mass = 0.0;
    for (int n = 0; n < 3; ++n) {
      const Vector jitter = testing::uniform_vector(rng, 3, -1.0, 1.0) * (0.2 * tol);
      const SphereNode near = SphereNode::normalized(net.nodes().col(n) + jitter);
      net.append(near, 0.1);
      moved_mass += std::min(std::abs(net.weight(n)), 0.1);
    }
    const ShallowNet merged = merge_duplicates(net, tol);
    CHECK(merged.width() == 6);
    for (int i = 0; i < 100; ++i) {
      const Vector x = testing::uniform_vector(rng, 2, -1.0, 1.0);
      const double bound = moved_mass * tol * std::sqrt(x.squaredNorm() + 1.0);
      CHECK(std::abs(evaluate(merged, x) - evaluate(net, x)) <= bound + 1e-15);
    }
  }

  TEST_CASE("prune_zeros examples") {
    const SphereNode e(vec({1.0, 0.0}));
    const SphereNode f(vec({0.0, 1.0}));
    const ShallowNet net(std::vector<SphereNode>{e, f, e}, vec({0.0, 1.0, 0.0}));
    const ShallowNet pruned = prune_zeros(net);
    CHECK(pruned.width() == 1);
    CHECK(pruned.weight(0) == 1.0);

    const ShallowNet dense(std::vector<SphereNode>{e, f}, vec({1.0, 2.0}));
    CHECK(prune_zeros(dense).width() == 2);

    const ShallowNet zeros(std::vector<SphereNode>{e, f}, vec({0.0, 0.0}));
    const ShallowNet empty = prune_zeros(zeros);
    CHECK(empty.empty());
    CHECK(evaluate(empty, vec({0.7})) == 0.0);
  }
}

TEST_SUITE("network properties") {
  TEST_CASE("evaluate is linear in the outer weights") {
    std::mt19937_64 rng(33);
    ShallowNet net = random_net(rng, 2, 8);
    const Vector c1 = testing::uniform_vector(rng, 8, -1.0, 1.0);
    const Vector c2 = testing::uniform_vector(rng, 8, -1.0, 1.0);
    ShallowNet n1 = net, n2 = net, n12 = net;
    n1.set_weights(c1);
    n2.set_weights(c2);
    n12.set_weights(c1 + c2);
    for (int i = 0; i < 100; ++i) {
      const Vector x = testing::uniform_vector(rng, 2, -1.0, 1.0);
      CHECK(evaluate(n12, x) == doctest::Approx(evaluate(n1, x) + evaluate(n2, x)).epsilon(1e-12));
    }
  }

  TEST_CASE("pruning preserves the function") {
    std::mt19937_64 rng(34);
    ShallowNet net = random_net(rng, 1, 10);
    Vector c = net.weights();
    for (int n = 0; n < 10; n += 3) c[n] = 0.0;
    net.set_weights(c);
    const ShallowNet pruned = prune_zeros(net);
    CHECK(pruned.width() == 6);
    for (int i = 0; i < 100; ++i) {
      const Vector x = testing::uniform_vector(rng, 1, -1.0, 1.0);
      CHECK(std::abs(evaluate(pruned, x) - evaluate(net, x)) <= 1e-10);
    }
  }
}
