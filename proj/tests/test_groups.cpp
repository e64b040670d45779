#include <cstdio>
#include <fstream>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "sog/groups.hpp"

using namespace sog;

TEST_CASE("build_layout computes K, L, R from the groups") {
  GroupLayout a = build_layout({{0, 1}, {1, 2}}, 3);
  CHECK(a.K == 2);
  CHECK(a.L == 2);
  CHECK(a.R == 2);  // coordinate 1 in both
  CHECK(a.membership_count[1] == 2);
  CHECK_FALSE(a.disjoint());

  GroupLayout b = build_layout({{0}, {1}, {2}}, 3);
  CHECK(b.K == 3);
  CHECK(b.L == 1);
  CHECK(b.R == 1);
  CHECK(b.disjoint());

  GroupLayout c = build_layout({{0, 1, 2, 3}, {2, 3, 4, 5, 6}, {6, 7, 8, 9}}, 10);
  CHECK(c.K == 3);
  CHECK(c.L == 5);
  CHECK(c.R == 2);
}

TEST_CASE("build_layout rejects bad input") {
  CHECK_THROWS_WITH_AS(build_layout({{0, 1}}, 3),
                       doctest::Contains("coordinate 2"),
                       std::invalid_argument);
  CHECK_THROWS_AS(build_layout({{0, 1, 7}}, 3), std::invalid_argument);
  CHECK_THROWS_AS(build_layout({{0, 0}, {1}}, 2), std::invalid_argument);
  CHECK_THROWS_AS(build_layout({{0}, {}}, 1), std::invalid_argument);
  CHECK_THROWS_AS(build_layout({}, 1), std::invalid_argument);
  CHECK_THROWS_AS(build_layout({{0}}, 0), std::invalid_argument);
}

TEST_CASE("build_duplication lays groups out contiguously") {
  GroupLayout layout = build_layout({{0, 1}, {1, 2}}, 3);
  DuplicationMap map = build_duplication(layout);
  CHECK(map.expanded_dim == 4);
  CHECK(map.original_dim == 3);
  REQUIRE(map.slots.size() == 4);
  CHECK(map.slots[0].group == 0);
  CHECK(map.slots[0].original == 0);
  CHECK(map.slots[1].group == 0);
  CHECK(map.slots[1].original == 1);
  CHECK(map.slots[2].group == 1);
  CHECK(map.slots[2].original == 1);
  CHECK(map.slots[3].group == 1);
  CHECK(map.slots[3].original == 2);
  CHECK(map.group_ranges[0] == std::pair<int, int>(0, 2));
  CHECK(map.group_ranges[1] == std::pair<int, int>(2, 4));

  // K equal groups of size L expand to K*L coordinates
  DuplicationMap blocks = build_duplication(make_block_layout(4, 5));
  CHECK(blocks.expanded_dim == 20);
}

TEST_CASE("collapse sums slot values onto original coordinates") {
  DuplicationMap map = build_duplication(build_layout({{0, 1}, {1, 2}}, 3));
  Eigen::VectorXd w(4);
  w << 1, 2, 3, 0;
  Eigen::VectorXd x = collapse(w, map);
  REQUIRE(x.size() == 3);
  CHECK(x[0] == 1);
  CHECK(x[1] == 5);
  CHECK(x[2] == 0);

  CHECK(collapse(Eigen::VectorXd::Zero(4), map).isZero(0.0));
  CHECK_THROWS_AS(collapse(Eigen::VectorXd::Zero(3), map),
                  std::invalid_argument);
}

TEST_CASE("disjoint layouts make expansion a permutation") {
  GroupLayout layout = build_layout({{2, 0}, {1, 3}}, 4);
  DuplicationMap map = build_duplication(layout);
  CHECK(map.expanded_dim == 4);
  std::mt19937_64 rng(7);
  Eigen::VectorXd x = oracle::random_vector(4, rng);
  // collapse is the inverse permutation: embed x and come back
  Eigen::VectorXd w(4);
  for (int j = 0; j < 4; ++j) w[j] = x[map.slots[j].original];
  CHECK((collapse(w, map) - x).norm() == 0.0);

  Eigen::MatrixXd Phi = oracle::random_matrix(3, 4, rng);
  Eigen::MatrixXd E = expand_design(Phi, map);
  for (int j = 0; j < 4; ++j)
    CHECK((E.col(j) - Phi.col(map.slots[j].original)).norm() == 0.0);
}

TEST_CASE("expand_design duplicates shared columns") {
  DuplicationMap map = build_duplication(build_layout({{0, 1}, {1, 2}}, 3));
  Eigen::MatrixXd I = Eigen::MatrixXd::Identity(3, 3);
  Eigen::MatrixXd E = expand_design(I, map);
  REQUIRE(E.rows() == 3);
  REQUIRE(E.cols() == 4);
  CHECK((E.col(1) - E.col(2)).norm() == 0.0);  // both copies of column 1
  CHECK((E.col(0) - I.col(0)).norm() == 0.0);
  CHECK((E.col(3) - I.col(2)).norm() == 0.0);

  Eigen::MatrixXd empty = expand_design(Eigen::MatrixXd(0, 3), map);
  CHECK(empty.rows() == 0);
  CHECK(empty.cols() == 4);

  CHECK_THROWS_AS(expand_design(Eigen::MatrixXd(2, 5), map),
                  std::invalid_argument);
}

TEST_CASE("expanded design and collapse are adjoint-consistent") {
  std::mt19937_64 rng(11);
  for (int rep = 0; rep < 20; ++rep) {
    int p = 4 + int(rng() % 20);
    GroupLayout layout =
        build_layout(oracle::random_overlapping_groups(p, rng), p);
    DuplicationMap map = build_duplication(layout);
    Eigen::MatrixXd Phi = oracle::random_matrix(5, p, rng);
    Eigen::MatrixXd E = expand_design(Phi, map);
    Eigen::VectorXd w = oracle::random_vector(map.expanded_dim, rng);
    Eigen::VectorXd lhs = E * w;
    Eigen::VectorXd rhs = Phi * collapse(w, map);
    CHECK((lhs - rhs).norm() <= 1e-12 * std::max(1.0, rhs.norm()));

    // adjoint identity <collapse(w), v> = <w, collapse_adjoint(v)>
    Eigen::VectorXd v = oracle::random_vector(p, rng);
    double a = collapse(w, map).dot(v);
    double b = w.dot(collapse_adjoint(v, map));
    CHECK(a == doctest::Approx(b).epsilon(1e-12));
  }
}

TEST_CASE("single-group embeddings collapse back to the original vector") {
  std::mt19937_64 rng(13);
  GroupLayout layout = build_layout({{0, 1, 2}, {2, 3}, {3, 4, 5}}, 6);
  DuplicationMap map = build_duplication(layout);
  Eigen::VectorXd x = oracle::random_vector(6, rng);
  // put each coordinate's mass in the first group that contains it
  Eigen::VectorXd w = Eigen::VectorXd::Zero(map.expanded_dim);
  std::vector<bool> placed(6, false);
  for (int j = 0; j < map.expanded_dim; ++j) {
    int i = map.slots[j].original;
    if (!placed[i]) {
      w[j] = x[i];
      placed[i] = true;
    }
  }
  CHECK((collapse(w, map) - x).norm() <= 1e-15);
}

TEST_CASE("block, singleton and chain generators") {
  GroupLayout blocks = make_block_layout(3, 4);
  CHECK(blocks.p == 12);
  CHECK(blocks.K == 3);
  CHECK(blocks.L == 4);
  CHECK(blocks.R == 1);
  CHECK(blocks.groups[1] == std::vector<int>{4, 5, 6, 7});

  GroupLayout singles = make_singleton_layout(5);
  CHECK(singles.K == 5);
  CHECK(singles.L == 1);
  CHECK(singles.R == 1);

  // chain of size-6 groups shifted by 4: {0..5}, {4..9}, {8..13}
  GroupLayout chain = make_chain_layout(3, 6, 4);
  CHECK(chain.p == 14);
  CHECK(chain.groups[0] == std::vector<int>{0, 1, 2, 3, 4, 5});
  CHECK(chain.groups[1] == std::vector<int>{4, 5, 6, 7, 8, 9});
  CHECK(chain.groups[2] == std::vector<int>{8, 9, 10, 11, 12, 13});
  CHECK(chain.R == 2);

  CHECK(make_chain_layout(25, 6, 4).p == 102);
  CHECK(make_chain_layout(100, 6, 4).p == 402);
  // shift == size means no overlap
  CHECK(make_chain_layout(4, 3, 3).R == 1);

  CHECK_THROWS_AS(make_chain_layout(3, 4, 0), std::invalid_argument);
  CHECK_THROWS_AS(make_chain_layout(3, 4, 5), std::invalid_argument);
  CHECK_THROWS_AS(make_block_layout(0, 4), std::invalid_argument);
  CHECK_THROWS_AS(make_singleton_layout(0), std::invalid_argument);
}

TEST_CASE("grid generator tiles a volume with shifted blocks") {
  // 4x4x1 volume, 2x2x1 blocks shifted by 1 in x and y: overlapping tiles
  GroupLayout g = make_grid_layout({4, 4, 1}, {2, 2, 1}, {1, 1, 1});
  CHECK(g.p == 16);
  CHECK(g.L == 4);
  CHECK(g.R >= 2);
  for (int c : g.membership_count) CHECK(c >= 1);

  // non-overlapping tiling
  GroupLayout tiles = make_grid_layout({4, 4, 2}, {2, 2, 2}, {2, 2, 2});
  CHECK(tiles.p == 32);
  CHECK(tiles.K == 4);
  CHECK(tiles.R == 1);

  // shift 3 with block 2 leaves voxels uncovered
  CHECK_THROWS_AS(make_grid_layout({5, 1, 1}, {2, 1, 1}, {3, 1, 1}),
                  std::invalid_argument);
  CHECK_THROWS_AS(make_grid_layout({4, 4, 1}, {5, 2, 1}, {1, 1, 1}),
                  std::invalid_argument);
  CHECK_THROWS_AS(make_grid_layout({4, 4, 1}, {2, 2, 1}, {0, 1, 1}),
                  std::invalid_argument);
}

TEST_CASE("group files round-trip and report parse errors with line numbers") {
  const char* path = "groups_roundtrip.txt";
  std::vector<std::vector<int>> groups = {{0, 1, 2}, {2, 3}, {4}};
  write_groups_file(path, groups);
  CHECK(read_groups_file(path) == groups);

  {
    std::ofstream f(path);
    f << "# leading comment\n"
      << "0 1 2\n"
      << "\n"
      << "2 3\n";
  }
  auto parsed = read_groups_file(path);
  REQUIRE(parsed.size() == 2);
  CHECK(parsed[0] == std::vector<int>{0, 1, 2});
  CHECK(parsed[1] == std::vector<int>{2, 3});

  {
    std::ofstream f(path);
    f << "0 1\n2 zap\n";
  }
  CHECK_THROWS_WITH_AS(read_groups_file(path), doctest::Contains(":2:"),
                       std::runtime_error);
  CHECK_THROWS_WITH_AS(read_groups_file(path), doctest::Contains("zap"),
                       std::runtime_error);

  CHECK_THROWS_AS(read_groups_file("no_such_group_file.txt"),
                  std::runtime_error);
  std::remove(path);
}
