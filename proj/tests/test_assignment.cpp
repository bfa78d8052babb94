#include <limits>
#include <random>
#include <set>

#include "doctest.h"
#include "repset/assignment.hpp"
#include "repset/errors.hpp"
#include "test_support.hpp"

using namespace repset;
using repset::testing::worked_weights;

namespace {

std::set<MatchedPair> as_set(const Assignment& a) { return {a.pairs.begin(), a.pairs.end()}; }

WeightMatrix make(std::initializer_list<std::initializer_list<double>> rows) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index i = 0;
  for (const auto& r : rows) {
    Eigen::Index j = 0;
    for (double v : r) m(i, j++) = v;
    ++i;
  }
  return WeightMatrix(m);
}

void check_multiplicity(const Assignment& a, bool rows_unique, bool cols_unique) {
  std::set<std::size_t> rows, cols;
  for (const auto& [i, j] : a.pairs) {
    if (rows_unique) CHECK(rows.insert(i).second);
    if (cols_unique) CHECK(cols.insert(j).second);
  }
}

void check_objective_consistent(const WeightMatrix& w, const Assignment& a) {
  double sum = 0.0;
  for (const auto& [i, j] : a.pairs) {
    CHECK(w(i, j) > 0.0);
    sum += w(i, j);
  }
  CHECK(a.objective == sum);
}

}  // namespace

TEST_CASE("weight matrix validation") {
  CHECK_THROWS_AS(WeightMatrix(Eigen::MatrixXd(0, 3)), InvalidInput);
  CHECK_THROWS_AS(make({{1.0, -0.5}}), InvalidInput);
  CHECK_THROWS_AS(make({{1.0, std::numeric_limits<double>::quiet_NaN()}}), InvalidInput);
  CHECK_THROWS_AS(make({{std::numeric_limits<double>::infinity()}}), InvalidInput);
  CHECK_NOTHROW(make({{0.0, 0.0}}));
}

TEST_CASE("solve_exact on the worked example") {
  const WeightMatrix w = worked_weights();
  const Assignment a = solve_exact(w);
  CHECK(std::abs(a.objective - 16.05) <= 0.01);
  CHECK(as_set(a) == std::set<MatchedPair>{{0, 2}, {1, 1}, {2, 4}, {3, 0}});
  check_multiplicity(a, true, true);
  check_objective_consistent(w, a);
}

TEST_CASE("solve_exact small cases") {
  SUBCASE("single edge") {
    const Assignment a = solve_exact(make({{2.5}}));
    CHECK(a.objective == 2.5);
    CHECK(as_set(a) == std::set<MatchedPair>{{0, 0}});
  }
  SUBCASE("no positive edge") {
    const Assignment a = solve_exact(WeightMatrix(Eigen::MatrixXd::Zero(3, 4)));
    CHECK(a.objective == 0.0);
    CHECK(a.pairs.empty());
  }
  SUBCASE("2x2 against both permutations") {
    const WeightMatrix w = make({{3, 1}, {2, 4}});
    const double identity = w(0, 0) + w(1, 1), swap = w(0, 1) + w(1, 0);
    REQUIRE(std::max(identity, swap) == 7.0);
    const Assignment a = solve_exact(w);
    CHECK(a.objective == 7.0);
    CHECK(as_set(a) == std::set<MatchedPair>{{0, 0}, {1, 1}});
  }
  SUBCASE("tall and wide matrices") {
    const WeightMatrix tall = make({{1, 0}, {5, 1}, {4, 3}});
    CHECK(solve_exact(tall).objective == 8.0);
    const WeightMatrix wide = make({{1, 5, 4}, {0, 1, 3}});
    CHECK(solve_exact(wide).objective == 8.0);
  }
  SUBCASE("zero-weight pairs are dropped") {
    const Assignment a = solve_exact(make({{0, 0}, {0, 2}}));
    CHECK(as_set(a) == std::set<MatchedPair>{{1, 1}});
  }
}

TEST_CASE("solve_relaxed examples") {
  SUBCASE("worked example takes the per-row maximum") {
    const WeightMatrix w = worked_weights();
    double expected = 0.0;
    for (std::size_t i = 0; i < w.rows(); ++i) expected += w.entries().row(static_cast<Eigen::Index>(i)).maxCoeff();
    const Assignment a = solve_relaxed(w);
    CHECK(std::abs(a.objective - 16.90) <= 0.01);
    CHECK(a.objective == doctest::Approx(expected));
    CHECK(as_set(a) == std::set<MatchedPair>{{0, 1}, {1, 1}, {2, 1}, {3, 0}});
    check_multiplicity(a, true, false);
  }
  SUBCASE("all zero") {
    const Assignment a = solve_relaxed(WeightMatrix(Eigen::MatrixXd::Zero(2, 3)));
    CHECK(a.objective == 0.0);
    CHECK(a.pairs.empty());
  }
  SUBCASE("per-column argmax with lowest-index ties") {
    // V = {(1,0),(0,1),(1,1)}, H columns (1,0) and (0,2).
    Eigen::MatrixXd v(3, 2), h(2, 2);
    v << 1, 0, 0, 1, 1, 1;
    h << 1, 0, 0, 2;
    const WeightMatrix w((v * h).cwiseMax(0.0));
    CHECK(w.entries() == (Eigen::MatrixXd(3, 2) << 1, 0, 0, 2, 1, 2).finished());
    const Assignment a = solve_relaxed(w);
    CHECK(as_set(a) == std::set<MatchedPair>{{0, 0}, {1, 1}});
    CHECK(a.objective == 3.0);
    check_multiplicity(a, false, true);
  }
}

TEST_CASE("brute_force_oracle") {
  CHECK(brute_force_oracle(make({{3, 1}, {2, 4}})).objective == 7.0);
  CHECK(brute_force_oracle(make({{0}})).objective == 0.0);
  CHECK(brute_force_oracle(make({{0}})).pairs.empty());
  CHECK(std::abs(brute_force_oracle(worked_weights()).objective - 16.05) <= 0.01);
  CHECK_THROWS_AS(brute_force_oracle(WeightMatrix(Eigen::MatrixXd::Ones(9, 2))), InvalidInput);
  CHECK_THROWS_AS(brute_force_oracle(WeightMatrix(Eigen::MatrixXd::Ones(2, 9))), InvalidInput);
  CHECK_NOTHROW(brute_force_oracle(WeightMatrix(Eigen::MatrixXd::Ones(3, 8))));
}

TEST_CASE("pad_to_square") {
  const WeightMatrix w = make({{1, 2, 3}, {4, 5, 6}});
  const WeightMatrix p = pad_to_square(w);
  REQUIRE(p.rows() == 3);
  REQUIRE(p.cols() == 3);
  CHECK(p.entries().topRows(2) == w.entries());
  CHECK(p.entries().row(2).isZero());

  const WeightMatrix sq = make({{1, 2}, {3, 4}});
  CHECK(pad_to_square(sq).entries() == sq.entries());

  const WeightMatrix padded = pad_to_square(worked_weights());
  CHECK(padded.rows() == 5);
  CHECK(std::abs(solve_exact(padded).objective - 16.05) <= 0.01);
}

TEST_CASE("mode parsing") {
  CHECK(parse_match_mode("exact") == MatchMode::kExact);
  CHECK(parse_match_mode("relaxed") == MatchMode::kRelaxed);
  CHECK_THROWS_AS(parse_match_mode("greedy"), InvalidInput);
}

TEST_CASE("property: exact equals brute force, relaxed bounds exact") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t r = testing::uniform_size(1, 6, rng), c = testing::uniform_size(1, 6, rng);
    const WeightMatrix w = trial % 3 == 0 ? testing::random_integer_weights(r, c, rng)
                                          : testing::random_weights(r, c, rng);
    const Assignment exact = solve_exact(w);
    const Assignment brute = brute_force_oracle(w);
    const Assignment relaxed = solve_relaxed(w);
    CHECK(std::abs(exact.objective - brute.objective) <= 1e-9);
    CHECK(relaxed.objective >= exact.objective - 1e-9);
    check_multiplicity(exact, true, true);
    check_multiplicity(relaxed, r < c, r >= c);
    check_objective_consistent(w, exact);
    check_objective_consistent(w, relaxed);
    check_objective_consistent(w, brute);
    CHECK(std::abs(solve_exact(pad_to_square(w)).objective - exact.objective) <= 1e-9);
  }
}

TEST_CASE("property: exact objective is invariant under row permutations") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t r = testing::uniform_size(1, 9, rng), c = testing::uniform_size(1, 9, rng);
    const WeightMatrix w = testing::random_weights(r, c, rng);
    const auto perm = testing::random_permutation(r, rng);
    const WeightMatrix pw(testing::permute_rows(w.entries(), perm));
    CHECK(std::abs(solve_exact(w).objective - solve_exact(pw).objective) <= 1e-9);
    CHECK(std::abs(solve_relaxed(w).objective - solve_relaxed(pw).objective) <= 1e-9);
  }
}

TEST_CASE("assignment indicator matrix") {
  const Assignment a = solve_exact(make({{3, 1}, {2, 4}}));
  CHECK(a.indicator(2, 2) == Eigen::MatrixXd::Identity(2, 2));
}
