#include "admd/delay.hpp"
#include "admd/errors.hpp"

#include "test_util.hpp"

#include <doctest.h>

using namespace admd;

TEST_CASE("embed n=2 N=5 d=2 stacks three consecutive samples") {
  Eigen::MatrixXd p(2, 5);
  p << 1, 2, 3, 4, 5, 10, 20, 30, 40, 50;
  const DelayEmbedding e = embed(Trajectory("t", p), 2);
  REQUIRE(e.columns.rows() == 6);
  REQUIRE(e.columns.cols() == 3);
  Eigen::VectorXd first(6);
  first << 1, 10, 2, 20, 3, 30;
  CHECK(e.columns.col(0) == first);
  Eigen::VectorXd last(6);
  last << 3, 30, 4, 40, 5, 50;
  CHECK(e.columns.col(2) == last);
  CHECK(e.is_hankel_consistent());
}

TEST_CASE("embed with d=0 is the trajectory matrix") {
  std::mt19937_64 rng(1);
  const Eigen::MatrixXd p = admd::testing::random_matrix(2, 9, rng);
  CHECK(embed(p, 0).columns == p);
  CHECK(unembed(embed(p, 0)) == p);
}

TEST_CASE("delay dimension n(d+1) with d=20") {
  const auto t = admd::testing::spiral("s", 100, 3.0, 0.0);
  const DelayEmbedding e = embed(t, 20);
  CHECK(e.delay_dim() == 42);
  CHECK(e.columns.rows() == 42);
  CHECK(e.length() == 80);
}

TEST_CASE("embed rejects d >= N") {
  Eigen::MatrixXd p = Eigen::MatrixXd::Ones(2, 4);
  try {
    embed(p, 4);
    FAIL("expected InputError");
  } catch (const InputError &e) {
    CHECK(std::string(e.what()).find("trajectory too short for delay") != std::string::npos);
  }
  CHECK_THROWS_AS(embed(p, -1), InputError);
}

TEST_CASE("unembed projects the first n rows regardless of Hankel violations") {
  std::mt19937_64 rng(2);
  DelayEmbedding e = embed(admd::testing::random_matrix(2, 10, rng), 3);
  e.columns += admd::testing::random_matrix(e.columns.rows(), e.columns.cols(), rng, 0.1);
  CHECK_FALSE(e.is_hankel_consistent());
  CHECK(unembed(e) == e.columns.topRows(2));
  CHECK_THROWS_AS(unembed(e.columns, 3), InputError);
}

TEST_CASE("property: unembed(embed(t,d)) is the first N-d points and embed is Hankel") {
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<int> len(2, 60);
  std::uniform_int_distribution<int> dim(1, 3);
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Index n = dim(rng);
    const Eigen::Index N = len(rng);
    const Eigen::MatrixXd p = admd::testing::random_matrix(n, N, rng, 10.0);
    std::uniform_int_distribution<Eigen::Index> dd(0, N - 1);
    const Eigen::Index d = dd(rng);
    const DelayEmbedding e = embed(p, d);
    CHECK(e.is_hankel_consistent());
    CHECK(e.length() == N - d);
    CHECK(unembed(e) == p.leftCols(N - d));
  }
}
