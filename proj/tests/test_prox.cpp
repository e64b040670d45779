#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "sog/groups.hpp"
#include "sog/prox.hpp"

using namespace sog;

namespace {
Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(Eigen::Index(v.size()));
  int i = 0;
  for (double x : v) out[i++] = x;
  return out;
}
}  // namespace

TEST_CASE("soft_threshold shrinks elementwise") {
  Eigen::VectorXd r = soft_threshold(vec({3, -0.5, 1}), 1.0);
  CHECK(r[0] == doctest::Approx(2.0));
  CHECK(r[1] == 0.0);
  CHECK(r[2] == 0.0);
  CHECK((soft_threshold(vec({1.5, -2}), 0.0) - vec({1.5, -2})).norm() == 0.0);
  CHECK(soft_threshold(vec({-4}), 1.5)[0] == doctest::Approx(-2.5));
  CHECK_THROWS_AS(soft_threshold(vec({1}), -0.1), std::invalid_argument);
}

TEST_CASE("group_soft_threshold shrinks the block norm") {
  Eigen::VectorXd r = group_soft_threshold(vec({3, 4}), 1.0);
  CHECK(r[0] == doctest::Approx(2.4));  // norm 5 shrunk to 4
  CHECK(r[1] == doctest::Approx(3.2));
  CHECK(group_soft_threshold(vec({0.3, 0.4}), 1.0).isZero(0.0));
  Eigen::VectorXd v = vec({1, -2, 0.5});
  CHECK((group_soft_threshold(v, 0.0) - v).norm() == 0.0);
  // exact boundary: ||v|| == t collapses to zero
  CHECK(group_soft_threshold(vec({3, 4}), 5.0).isZero(0.0));
  CHECK_THROWS_AS(group_soft_threshold(v, -1.0), std::invalid_argument);
}

TEST_CASE("prox composes elementwise then block shrinkage per group") {
  DuplicationMap one = build_duplication(build_layout({{0, 1}}, 2));

  CHECK((prox_sparse_group(vec({3, 4}), one, 0.0, 7.0) - vec({3, 4})).norm() ==
        0.0);  // eta = 0 is the identity

  Eigen::VectorXd pure_group = prox_sparse_group(vec({3, 4}), one, 1.0, 0.0);
  CHECK(pure_group[0] == doctest::Approx(2.4));
  CHECK(pure_group[1] == doctest::Approx(3.2));

  // soft gives [2, 0] with norm 2, then block shrink to norm 1
  Eigen::VectorXd composed = prox_sparse_group(vec({3, -0.5}), one, 1.0, 1.0);
  CHECK(composed[0] == doctest::Approx(1.0));
  CHECK(composed[1] == 0.0);

  CHECK_THROWS_AS(prox_sparse_group(vec({1, 2, 3}), one, 1.0, 1.0),
                  std::invalid_argument);
}

TEST_CASE("prox handles groups independently under per-group thresholds") {
  DuplicationMap map = build_duplication(build_layout({{0, 1}, {2}}, 3));
  Eigen::VectorXd t1(2), t2(2);
  t1 << 1.0, 0.0;
  t2 << 1.0, 0.25;
  Eigen::VectorXd r = prox_sparse_group(vec({3, -0.5, 2}), map, t1, t2);
  CHECK(r[0] == doctest::Approx(1.0));
  CHECK(r[1] == 0.0);
  CHECK(r[2] == doctest::Approx(1.75));  // only the l2 shrink applies
}

TEST_CASE("prox matches dense grid search on 1-d and 2-d groups") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> mag(0.0, 3.0);
  DuplicationMap g1 = build_duplication(build_layout({{0}}, 1));
  DuplicationMap g2 = build_duplication(build_layout({{0, 1}}, 2));
  for (int rep = 0; rep < 40; ++rep) {
    double eta = mag(rng), mu = mag(rng) / 3.0;
    if (rep % 2 == 0) {
      Eigen::VectorXd w = oracle::random_vector(1, rng, 2.0);
      Eigen::VectorXd z = prox_sparse_group(w, g1, eta, mu);
      Eigen::VectorXd ref = oracle::grid_prox(w, eta * mu, eta);
      CHECK((z - ref).lpNorm<Eigen::Infinity>() <= 1e-3);
    } else {
      Eigen::VectorXd w = oracle::random_vector(2, rng, 2.0);
      Eigen::VectorXd z = prox_sparse_group(w, g2, eta, mu);
      Eigen::VectorXd ref = oracle::grid_prox(w, eta * mu, eta);
      CHECK((z - ref).lpNorm<Eigen::Infinity>() <= 1e-3);
    }
  }
}

TEST_CASE("prox output beats 10,000 random perturbations") {
  std::mt19937_64 rng(22);
  GroupLayout layout = build_layout({{0, 1, 2}, {2, 3}, {4, 5, 6, 7}}, 8);
  DuplicationMap map = build_duplication(layout);
  Eigen::VectorXd w = oracle::random_vector(map.expanded_dim, rng, 2.0);
  double eta = 0.8, mu = 0.6;
  Eigen::VectorXd z = prox_sparse_group(w, map, eta, mu);

  auto objective = [&](const Eigen::VectorXd& c) {
    double v = 0.5 * (c - w).squaredNorm();
    for (auto [b, e] : map.group_ranges) {
      auto seg = c.segment(b, e - b);
      v += eta * (seg.norm() + mu * seg.lpNorm<1>());
    }
    return v;
  };
  double at_z = objective(z);
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> scale_d(1e-4, 0.5);
  for (int t = 0; t < 10000; ++t) {
    Eigen::VectorXd delta(map.expanded_dim);
    double s = scale_d(rng);
    for (int i = 0; i < map.expanded_dim; ++i) delta[i] = s * nd(rng);
    CHECK(objective(z + delta) >= at_z - 1e-12);
  }
}

TEST_CASE("prox is nonexpansive") {
  std::mt19937_64 rng(23);
  GroupLayout layout = build_layout({{0, 1, 2}, {1, 3}, {4, 5}}, 6);
  DuplicationMap map = build_duplication(layout);
  std::uniform_real_distribution<double> mag(0.0, 2.0);
  for (int rep = 0; rep < 200; ++rep) {
    double eta = mag(rng), mu = mag(rng);
    Eigen::VectorXd a = oracle::random_vector(map.expanded_dim, rng, 3.0);
    Eigen::VectorXd b = oracle::random_vector(map.expanded_dim, rng, 3.0);
    double num = (prox_sparse_group(a, map, eta, mu) -
                  prox_sparse_group(b, map, eta, mu))
                     .norm();
    CHECK(num <= (a - b).norm() + 1e-12);
  }
}

TEST_CASE("threshold order matters and the implemented order is the prox") {
  DuplicationMap one = build_duplication(build_layout({{0, 1}}, 2));
  Eigen::VectorXd w = vec({3, -0.5});
  double eta = 1.0, mu = 1.0;

  // reversed composition (block first, then elementwise) gives something else
  Eigen::VectorXd reversed =
      soft_threshold(group_soft_threshold(w, eta), eta * mu);
  Eigen::VectorXd composed = prox_sparse_group(w, one, eta, mu);
  CHECK((reversed - composed).lpNorm<Eigen::Infinity>() > 0.01);

  // the grid-search minimizer agrees with the implemented order
  Eigen::VectorXd ref = oracle::grid_prox(w, eta * mu, eta);
  CHECK((composed - ref).lpNorm<Eigen::Infinity>() <= 1e-3);
  CHECK(oracle::prox_objective(composed, w, eta * mu, eta) <
        oracle::prox_objective(reversed, w, eta * mu, eta));
}
