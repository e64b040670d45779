#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "sog/groups.hpp"
#include "sog/penalty.hpp"

using namespace sog;

namespace {

const double kSqrt74 = std::sqrt(74.0);  // 8.60232...

Eigen::VectorXd sparse10(std::initializer_list<std::pair<int, double>> nz) {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(10);
  for (auto [i, v] : nz) x[i] = v;
  return x;
}

GroupLayout two_halves() { return build_layout({{0, 1, 2, 3, 4}, {5, 6, 7, 8, 9}}, 10); }

GroupLayout three_overlapping() {
  return build_layout({{0, 1, 2, 3}, {2, 3, 4, 5, 6}, {6, 7, 8, 9}}, 10);
}

}  // namespace

TEST_CASE("penalty params derive mu and validate weights") {
  PenaltyParams p = PenaltyParams::uniform(2.0, 4);
  CHECK(p.mu() == doctest::Approx(1.0));
  CHECK(p.alpha(0) == 1.0);
  CHECK(p.beta(0) == doctest::Approx(1.0));
  CHECK_THROWS_AS(PenaltyParams::uniform(-0.5, 1), std::invalid_argument);
  CHECK_THROWS_AS(PenaltyParams::uniform(1.0, 0), std::invalid_argument);

  PenaltyParams w = PenaltyParams::weighted({{1.0, 0.5}, {2.0, 0.25}});
  CHECK(w.alpha(1) == 2.0);
  CHECK(w.beta(0) == 0.5);
  CHECK_THROWS_AS(PenaltyParams::weighted({{1.0, 0.0}}), std::invalid_argument);
  CHECK_THROWS_AS(PenaltyParams::weighted({{-1.0, 1.0}}),
                  std::invalid_argument);

  GroupLayout layout = two_halves();
  CHECK_NOTHROW(w.validate(layout));  // two weight pairs, two groups
  PenaltyParams w1 = PenaltyParams::weighted({{1, 1}});
  CHECK_THROWS_AS(w1.validate(layout), std::invalid_argument);
}

TEST_CASE("disjoint closed form reproduces the worked ten-dimensional rows") {
  GroupLayout layout = two_halves();
  PenaltyParams unit = PenaltyParams::uniform(1.0, 1);  // alpha = beta = 1

  // support {0,3,8}, values {3,4,7}: group norms 5 + 7, l1 part 14
  Eigen::VectorXd a = sparse10({{0, 3.0}, {3, 4.0}, {8, 7.0}});
  CHECK(sgl_penalty_disjoint(a, layout, unit) == doctest::Approx(26.0));

  Eigen::VectorXd b =
      sparse10({{0, 2.0}, {1, 5.0}, {2, 2.0}, {3, 4.0}, {4, 5.0}});
  CHECK(sgl_penalty_disjoint(b, layout, unit) ==
        doctest::Approx(kSqrt74 + 18.0));

  Eigen::VectorXd c = sparse10({{0, 3.0}, {2, 4.0}, {3, 7.0}});
  CHECK(sgl_penalty_disjoint(c, layout, unit) ==
        doctest::Approx(kSqrt74 + 14.0));

  CHECK_THROWS_WITH_AS(
      sgl_penalty_disjoint(a, three_overlapping(), unit),
      doctest::Contains("eval_penalty"), std::invalid_argument);
}

TEST_CASE("decomposition solver finds the optimal split of the overlap example") {
  GroupLayout layout = three_overlapping();
  Eigen::VectorXd x = sparse10({{2, 1.0}, {4, 1.0}, {6, 1.0}});
  for (double mu : {0.1, 1.0, 10.0}) {
    PenaltyParams params = PenaltyParams::uniform(mu, 1);
    Decomposition d = eval_penalty(x, layout, params);
    double expected = std::sqrt(3.0) + 3.0 * mu;
    CHECK(d.objective == doctest::Approx(expected).epsilon(1e-5));
    // must not beat the infimum (up to the tiny feasibility slack of the
    // returned split, whose l1 slope grows with mu)
    CHECK(d.objective >= expected - 1e-5 * (1.0 + mu));
    CHECK(d.objective <= 3.0 + 5.0 * mu + 1e-9);
    CHECK(d.objective <= 3.0 + 3.0 * mu + 1e-9);
    CHECK(d.objective <= 1.0 + std::sqrt(2.0) + 3.0 * mu + 1e-9);
    CHECK(d.residual <= 1e-6);
    // all mass sits in the middle group
    CHECK(group_l0(x, layout, d) == 1);
  }
}

TEST_CASE("penalty of zero is zero and positive elsewhere") {
  GroupLayout layout = three_overlapping();
  PenaltyParams params = PenaltyParams::uniform(0.5, 2);
  Decomposition d = eval_penalty(Eigen::VectorXd::Zero(10), layout, params);
  CHECK(d.objective == 0.0);
  CHECK(d.w.isZero(0.0));

  std::mt19937_64 rng(31);
  for (int rep = 0; rep < 5; ++rep) {
    Eigen::VectorXd x = oracle::random_vector(10, rng);
    CHECK(eval_penalty(x, layout, params).objective > 0.1 * x.norm());
  }
}

TEST_CASE("solver agrees with the closed form on disjoint layouts") {
  std::mt19937_64 rng(32);
  GroupLayout layout = build_layout({{0, 1, 2}, {3, 4}, {5, 6, 7, 8}}, 9);
  for (int rep = 0; rep < 10; ++rep) {
    Eigen::VectorXd x = oracle::random_vector(9, rng, 2.0);
    PenaltyParams params = PenaltyParams::uniform(0.3 * (rep % 4), 2);
    double exact = sgl_penalty_disjoint(x, layout, params);
    Decomposition d = eval_penalty(x, layout, params);
    CHECK(d.objective == doctest::Approx(exact).epsilon(1e-6));
  }
}

TEST_CASE("singleton groups collapse to a scaled l1 norm") {
  std::mt19937_64 rng(33);
  GroupLayout layout = make_singleton_layout(7);
  for (double lambda1 : {0.0, 0.7, 3.0}) {
    PenaltyParams params = PenaltyParams::uniform(lambda1, 1);
    Eigen::VectorXd x = oracle::random_vector(7, rng);
    Decomposition d = eval_penalty(x, layout, params);
    CHECK(d.objective ==
          doctest::Approx((1.0 + lambda1) * x.lpNorm<1>()).epsilon(1e-7));
  }
}

TEST_CASE("latent norm matches the golden-section oracle on two groups") {
  GroupLayout layout = build_layout({{0, 1, 2}, {2, 3}}, 4);
  std::mt19937_64 rng(34);
  for (int rep = 0; rep < 20; ++rep) {
    Eigen::Vector4d x = oracle::random_vector(4, rng, 1.5);
    double mu = (rep % 3) * 0.6;  // 0 is the pure latent group lasso
    PenaltyParams params = PenaltyParams::uniform(mu, 1);
    Decomposition d = eval_penalty(x, layout, params);
    CHECK(d.objective ==
          doctest::Approx(oracle::latent_norm_2g(x, mu)).epsilon(1e-5));
  }
}

TEST_CASE("objective behaves like a norm") {
  std::mt19937_64 rng(35);
  GroupLayout layout = three_overlapping();
  PenaltyParams params = PenaltyParams::uniform(1.0, 2);
  std::uniform_real_distribution<double> gamma_d(0.05, 4.0);
  for (int rep = 0; rep < 25; ++rep) {
    Eigen::VectorXd x = oracle::random_vector(10, rng);
    Eigen::VectorXd y = oracle::random_vector(10, rng);
    double gamma = gamma_d(rng);
    double hx = eval_penalty(x, layout, params).objective;
    double hy = eval_penalty(y, layout, params).objective;
    double hgx = eval_penalty(gamma * x, layout, params).objective;
    double hxy = eval_penalty(x + y, layout, params).objective;
    CHECK(std::abs(hgx - gamma * hx) <= 1e-4 * std::max(1.0, gamma * hx));
    CHECK(hxy <= hx + hy + 1e-4);
  }
  // extreme scales are handled by internal normalization
  Eigen::VectorXd x = oracle::random_vector(10, rng);
  double h1 = eval_penalty(x, layout, params).objective;
  CHECK(eval_penalty(1e8 * x, layout, params).objective ==
        doctest::Approx(1e8 * h1).epsilon(1e-6));
  CHECK(eval_penalty(1e-8 * x, layout, params).objective ==
        doctest::Approx(1e-8 * h1).epsilon(1e-6));
}

TEST_CASE("unit ball support function moves from disc to diamond with mu") {
  GroupLayout layout = build_layout({{0, 1}}, 2);
  // support function of {h <= 1} along direction d, by angular scan of
  // the closed-form disjoint penalty
  auto support = [&](double mu, double dx, double dy) {
    PenaltyParams params = PenaltyParams::uniform(mu, 1);
    double best = 0.0;
    for (int i = 0; i < 20000; ++i) {
      double th = 2.0 * M_PI * i / 20000;
      Eigen::VectorXd u(2);
      u << std::cos(th), std::sin(th);
      best = std::max(best, (dx * u[0] + dy * u[1]) /
                                sgl_penalty_disjoint(u, layout, params));
    }
    return best;
  };
  // mu = 0: the l2 disc, support = ||d||
  CHECK(support(0.0, 1.0, 0.0) == doctest::Approx(1.0));
  CHECK(support(0.0, 1.0, 1.0) == doctest::Approx(std::sqrt(2.0)));
  // axis and diagonal have closed forms 1/(1+mu) and sqrt(2)/(1+sqrt(2)mu)
  for (double mu : {0.5, 1.0, 4.0}) {
    CHECK(support(mu, 1.0, 0.0) ==
          doctest::Approx(1.0 / (1.0 + mu)).epsilon(1e-6));
    CHECK(support(mu, 1.0, 1.0) ==
          doctest::Approx(std::sqrt(2.0) / (1.0 + std::sqrt(2.0) * mu))
              .epsilon(1e-6));
  }
  // large mu: mu * ball approaches the l1 diamond, whose support is the
  // max-coordinate norm
  double mu = 1e4;
  CHECK(mu * support(mu, 1.0, 0.0) == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(mu * support(mu, 1.0, 1.0) == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("sqrt(k)-type upper bound holds and is attained by equal entries") {
  CHECK(penalty_upper_bound(Eigen::VectorXd::Zero(4),
                            PenaltyParams::uniform(1.0, 2), 0) == 0.0);

  // equal entries 1/sqrt(k*l) on k disjoint groups of size l
  int k = 3, l = 4;
  GroupLayout layout = make_block_layout(k, l);
  Eigen::VectorXd x =
      Eigen::VectorXd::Constant(k * l, 1.0 / std::sqrt(double(k * l)));
  for (double lambda1 : {0.0, 1.0, 2.5}) {
    PenaltyParams params = PenaltyParams::uniform(lambda1, l);
    double bound = penalty_upper_bound(x, params, k);
    CHECK(bound == doctest::Approx(std::sqrt(double(k)) * (1.0 + lambda1)));
    CHECK(sgl_penalty_disjoint(x, layout, params) == doctest::Approx(bound));
  }

  // random (2,2)-sparse vector on disjoint groups stays below the bound
  std::mt19937_64 rng(36);
  GroupLayout blocks = make_block_layout(5, 4);
  PenaltyParams params = PenaltyParams::uniform(1.0, 2);
  for (int rep = 0; rep < 10; ++rep) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(20);
    // groups 0 and 2 active, two entries each
    v[0] = oracle::random_vector(1, rng)[0];
    v[2] = oracle::random_vector(1, rng)[0];
    v[8] = oracle::random_vector(1, rng)[0];
    v[11] = oracle::random_vector(1, rng)[0];
    double h = eval_penalty(v, blocks, params).objective;
    CHECK(h <= penalty_upper_bound(v, params, 2) + 1e-6);
  }
}

TEST_CASE("group_l0 counts active groups of the decomposition") {
  GroupLayout layout = three_overlapping();
  PenaltyParams params = PenaltyParams::uniform(1.0, 1);
  Decomposition zero = eval_penalty(Eigen::VectorXd::Zero(10), layout, params);
  CHECK(group_l0(Eigen::VectorXd::Zero(10), layout, zero) == 0);

  GroupLayout singles = make_singleton_layout(6);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(6);
  x[1] = 0.5;
  x[4] = -2.0;
  x[5] = 1.0;
  Decomposition d = eval_penalty(x, singles, params);
  CHECK(group_l0(x, singles, d) == 3);
}

TEST_CASE("non-convergence carries the best iterate") {
  GroupLayout layout = three_overlapping();
  std::mt19937_64 rng(37);
  Eigen::VectorXd x = oracle::random_vector(10, rng);
  try {
    eval_penalty(x, layout, PenaltyParams::uniform(1.0, 2), 1e-15, 3);
    FAIL("expected PenaltyNonConvergence");
  } catch (const PenaltyNonConvergence& e) {
    CHECK(e.best.w.size() == 13);  // expanded dimension 4 + 5 + 4
    CHECK(e.best.iterations == 3);
    CHECK(std::isfinite(e.best.objective));
    CHECK(std::isfinite(e.best.residual));
  }
}
