#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace repset {

/// Nonnegative, finite edge weights of a complete bipartite graph.
/// Rows index the input set, columns the hidden set.
class WeightMatrix {
 public:
  /// Throws InvalidInput on an empty matrix or any negative / non-finite entry.
  explicit WeightMatrix(Eigen::MatrixXd entries);

  std::size_t rows() const noexcept { return static_cast<std::size_t>(entries_.rows()); }
  std::size_t cols() const noexcept { return static_cast<std::size_t>(entries_.cols()); }
  double operator()(std::size_t i, std::size_t j) const {
    return entries_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  const Eigen::MatrixXd& entries() const noexcept { return entries_; }

 private:
  Eigen::MatrixXd entries_;
};

using MatchedPair = std::pair<std::size_t, std::size_t>;  // (row, col)

/// Optimal 0/1 matching variables of one problem, stored sparsely.
/// Only pairs with strictly positive weight are recorded.
struct Assignment {
  std::vector<MatchedPair> pairs;  // sorted by (row, col)
  double objective = 0.0;

  /// Dense indicator D with D(i, j) = 1 iff (i, j) is in `pairs`.
  Eigen::MatrixXd indicator(std::size_t rows, std::size_t cols) const;
};

enum class MatchMode { kExact, kRelaxed };

const char* to_string(MatchMode mode) noexcept;
/// Accepts "exact" or "relaxed"; throws InvalidInput otherwise.
MatchMode parse_match_mode(const std::string& text);

/// Maximum-weight bipartite matching (each row and each column used at most
/// once), solved with the Hungarian algorithm. The constraint matrix is
/// totally unimodular, so this is also the optimum of the LP relaxation.
Assignment solve_exact(const WeightMatrix& w);

/// Drops the multiplicity constraint on the larger side. For rows >= cols
/// every column picks its best row (rows may repeat); otherwise every row
/// picks its best column. Ties go to the lowest index, and a pick is kept
/// only if its weight is positive. Always an upper bound on solve_exact.
Assignment solve_relaxed(const WeightMatrix& w);

Assignment solve(const WeightMatrix& w, MatchMode mode);

/// Exhaustive search over every injective partial assignment. Test oracle;
/// throws InvalidInput when either dimension exceeds kBruteForceLimit.
inline constexpr std::size_t kBruteForceLimit = 8;
Assignment brute_force_oracle(const WeightMatrix& w);

/// Zero-pads the smaller dimension so the matrix becomes square.
WeightMatrix pad_to_square(const WeightMatrix& w);

}  // namespace repset
