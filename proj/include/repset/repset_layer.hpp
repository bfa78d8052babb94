#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "repset/assignment.hpp"

namespace repset {

/// One input example: |X| vectors of dimension d stored as the rows of a
/// matrix. Row order is storage only; any reordering denotes the same set.
class VectorSet {
 public:
  VectorSet() = default;
  /// Throws InvalidInput if there are no rows, no columns, or non-finite entries.
  explicit VectorSet(Eigen::MatrixXd rows);

  std::size_t size() const noexcept { return static_cast<std::size_t>(rows_.rows()); }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(rows_.cols()); }
  const Eigen::MatrixXd& matrix() const noexcept { return rows_; }

 private:
  Eigen::MatrixXd rows_;
};

/// The m trainable hidden sets. Matrix k is d x |Y_k|; its columns are the
/// elements of hidden set k. Cardinalities may differ between sets.
class HiddenSets {
 public:
  HiddenSets() = default;
  /// Throws InvalidInput when empty, when a set has no elements, or when the
  /// row counts disagree.
  explicit HiddenSets(std::vector<Eigen::MatrixXd> matrices);

  std::size_t count() const noexcept { return matrices_.size(); }
  std::size_t dim() const noexcept {
    return matrices_.empty() ? 0 : static_cast<std::size_t>(matrices_.front().rows());
  }
  std::vector<std::size_t> cardinalities() const;

  const Eigen::MatrixXd& operator[](std::size_t k) const { return matrices_[k]; }
  Eigen::MatrixXd& operator[](std::size_t k) { return matrices_[k]; }
  const std::vector<Eigen::MatrixXd>& matrices() const noexcept { return matrices_; }
  std::vector<Eigen::MatrixXd>& matrices() noexcept { return matrices_; }

 private:
  std::vector<Eigen::MatrixXd> matrices_;
};

/// Layer output x plus the assignments that produced it, kept for backward.
struct SetEmbedding {
  Eigen::VectorXd values;
  std::vector<Assignment> assignments;
};

/// dL/dH^(k) for every hidden set, shaped like HiddenSets.
struct LayerGradients {
  std::vector<Eigen::MatrixXd> per_hidden;
};

/// F = ReLU(V H): entry (i, j) is max(0, v_i . u_j).
WeightMatrix score_matrix(const VectorSet& x, const Eigen::MatrixXd& hidden);

/// Solves one matching per hidden set; values[k] = Tr(D_k^T F_k).
SetEmbedding layer_forward(const VectorSet& x, const HiddenSets& h, MatchMode mode);

/// dL/dH^(k) = upstream[k] * V^T (D_k .* 1[V H^(k) > 0]), with the cached
/// assignments held fixed. `emb` must come from layer_forward on (x, h).
LayerGradients layer_backward(const VectorSet& x, const HiddenSets& h, const SetEmbedding& emb,
                              const Eigen::VectorXd& upstream);

}  // namespace repset
