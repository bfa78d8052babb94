#include "repset/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "repset/errors.hpp"

namespace repset {

WeightMatrix::WeightMatrix(Eigen::MatrixXd entries) : entries_(std::move(entries)) {
  if (entries_.rows() < 1 || entries_.cols() < 1) {
    throw InvalidInput("weight matrix must have at least one row and one column");
  }
  for (Eigen::Index j = 0; j < entries_.cols(); ++j) {
    for (Eigen::Index i = 0; i < entries_.rows(); ++i) {
      const double v = entries_(i, j);
      if (!std::isfinite(v)) {
        throw InvalidInput("weight matrix entry (" + std::to_string(i) + ", " +
                           std::to_string(j) + ") is not finite");
      }
      if (v < 0.0) {
        throw InvalidInput("weight matrix entry (" + std::to_string(i) + ", " +
                           std::to_string(j) + ") is negative");
      }
    }
  }
}

Eigen::MatrixXd Assignment::indicator(std::size_t rows, std::size_t cols) const {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows),
                                            static_cast<Eigen::Index>(cols));
  for (const auto& [i, j] : pairs) {
    d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = 1.0;
  }
  return d;
}

const char* to_string(MatchMode mode) noexcept {
  return mode == MatchMode::kExact ? "exact" : "relaxed";
}

MatchMode parse_match_mode(const std::string& text) {
  if (text == "exact") return MatchMode::kExact;
  if (text == "relaxed") return MatchMode::kRelaxed;
  throw InvalidInput("unknown match mode '" + text + "' (expected exact|relaxed)");
}

namespace {

// Keeps only positive-weight pairs, sorts them, and sums the objective in
// pair order so the value is reproducible from `pairs` alone.
Assignment finalize(const WeightMatrix& w, std::vector<MatchedPair> pairs) {
  std::erase_if(pairs, [&](const MatchedPair& p) { return !(w(p.first, p.second) > 0.0); });
  std::sort(pairs.begin(), pairs.end());
  Assignment a;
  a.pairs = std::move(pairs);
  for (const auto& [i, j] : a.pairs) a.objective += w(i, j);
  return a;
}

// Min-cost assignment of every row of an n x m cost matrix (n <= m) to a
// distinct column, using potentials (Kuhn-Munkres, O(n^2 m)). Returns the
// column chosen for each row. 1-based internally; column 0 is the sentinel.
std::vector<std::size_t> hungarian_min(const Eigen::MatrixXd& cost) {
  const auto n = static_cast<std::size_t>(cost.rows());
  const auto m = static_cast<std::size_t>(cost.cols());
  constexpr double kInf = std::numeric_limits<double>::infinity();

  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<std::size_t> owner(m + 1, 0), way(m + 1, 0);
  std::vector<double> minv(m + 1);
  std::vector<char> used(m + 1);

  for (std::size_t row = 1; row <= n; ++row) {
    owner[0] = row;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), kInf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = owner[j0];
      double delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double reduced = cost(static_cast<Eigen::Index>(i0 - 1),
                                    static_cast<Eigen::Index>(j - 1)) - u[i0] - v[j];
        if (reduced < minv[j]) {
          minv[j] = reduced;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= m; ++j) {
        if (used[j]) {
          u[owner[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (owner[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      owner[j0] = owner[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<std::size_t> col_of_row(n, 0);
  for (std::size_t j = 1; j <= m; ++j) {
    if (owner[j] != 0) col_of_row[owner[j] - 1] = j - 1;
  }
  return col_of_row;
}

}  // namespace

Assignment solve_exact(const WeightMatrix& w) {
  const Eigen::MatrixXd& e = w.entries();
  const double top = e.maxCoeff();
  if (!(top > 0.0)) return {};

  // Maximise by minimising (top - w). Rows are matched onto columns, so the
  // smaller side goes first; surplus columns act as zero-weight padding.
  const bool transpose = w.rows() > w.cols();
  const Eigen::MatrixXd cost =
      transpose ? Eigen::MatrixXd((top - e.array()).matrix().transpose())
                : Eigen::MatrixXd((top - e.array()).matrix());
  const std::vector<std::size_t> col_of_row = hungarian_min(cost);

  std::vector<MatchedPair> pairs;
  pairs.reserve(col_of_row.size());
  for (std::size_t r = 0; r < col_of_row.size(); ++r) {
    pairs.emplace_back(transpose ? MatchedPair{col_of_row[r], r} : MatchedPair{r, col_of_row[r]});
  }
  return finalize(w, std::move(pairs));
}

Assignment solve_relaxed(const WeightMatrix& w) {
  const Eigen::MatrixXd& e = w.entries();
  std::vector<MatchedPair> pairs;
  if (w.rows() >= w.cols()) {
    for (Eigen::Index j = 0; j < e.cols(); ++j) {
      Eigen::Index best = 0;
      e.col(j).maxCoeff(&best);  // first maximum wins
      pairs.emplace_back(static_cast<std::size_t>(best), static_cast<std::size_t>(j));
    }
  } else {
    for (Eigen::Index i = 0; i < e.rows(); ++i) {
      Eigen::Index best = 0;
      e.row(i).maxCoeff(&best);
      pairs.emplace_back(static_cast<std::size_t>(i), static_cast<std::size_t>(best));
    }
  }
  return finalize(w, std::move(pairs));
}

Assignment solve(const WeightMatrix& w, MatchMode mode) {
  return mode == MatchMode::kExact ? solve_exact(w) : solve_relaxed(w);
}

Assignment brute_force_oracle(const WeightMatrix& w) {
  if (w.rows() > kBruteForceLimit || w.cols() > kBruteForceLimit) {
    throw InvalidInput("brute_force_oracle is limited to " + std::to_string(kBruteForceLimit) +
                       "x" + std::to_string(kBruteForceLimit) + " matrices");
  }
  const std::size_t rows = w.rows();
  const std::size_t cols = w.cols();
  std::vector<char> col_used(cols, 0);
  std::vector<MatchedPair> current, best;
  double best_value = -1.0;

  // Each row is either left unmatched or takes a free column.
  auto recurse = [&](auto&& self, std::size_t row, double value) -> void {
    if (row == rows) {
      if (value > best_value) {
        best_value = value;
        best = current;
      }
      return;
    }
    self(self, row + 1, value);
    for (std::size_t j = 0; j < cols; ++j) {
      if (col_used[j]) continue;
      col_used[j] = 1;
      current.emplace_back(row, j);
      self(self, row + 1, value + w(row, j));
      current.pop_back();
      col_used[j] = 0;
    }
  };
  recurse(recurse, 0, 0.0);
  return finalize(w, std::move(best));
}

WeightMatrix pad_to_square(const WeightMatrix& w) {
  const auto n = static_cast<Eigen::Index>(std::max(w.rows(), w.cols()));
  Eigen::MatrixXd padded = Eigen::MatrixXd::Zero(n, n);
  padded.topLeftCorner(w.entries().rows(), w.entries().cols()) = w.entries();
  return WeightMatrix(std::move(padded));
}

}  // namespace repset
