#include "repset/repset_layer.hpp"

#include <string>

#include "repset/errors.hpp"

namespace repset {

VectorSet::VectorSet(Eigen::MatrixXd rows) : rows_(std::move(rows)) {
  if (rows_.rows() < 1) throw InvalidInput("a vector set needs at least one element");
  if (rows_.cols() < 1) throw InvalidInput("vector dimension must be at least 1");
  if (!rows_.allFinite()) throw InvalidInput("vector set contains non-finite entries");
}

HiddenSets::HiddenSets(std::vector<Eigen::MatrixXd> matrices) : matrices_(std::move(matrices)) {
  if (matrices_.empty()) throw InvalidInput("at least one hidden set is required");
  const Eigen::Index d = matrices_.front().rows();
  if (d < 1) throw InvalidInput("hidden set dimension must be at least 1");
  for (std::size_t k = 0; k < matrices_.size(); ++k) {
    if (matrices_[k].rows() != d) {
      throw InvalidInput("hidden set " + std::to_string(k) + " has dimension " +
                         std::to_string(matrices_[k].rows()) + ", expected " + std::to_string(d));
    }
    if (matrices_[k].cols() < 1) {
      throw InvalidInput("hidden set " + std::to_string(k) + " is empty");
    }
  }
}

std::vector<std::size_t> HiddenSets::cardinalities() const {
  std::vector<std::size_t> out;
  out.reserve(matrices_.size());
  for (const auto& h : matrices_) out.push_back(static_cast<std::size_t>(h.cols()));
  return out;
}

WeightMatrix score_matrix(const VectorSet& x, const Eigen::MatrixXd& hidden) {
  if (static_cast<std::size_t>(hidden.rows()) != x.dim()) {
    throw InvalidInput("dimension mismatch: set vectors have d=" + std::to_string(x.dim()) +
                       " but hidden set has d=" + std::to_string(hidden.rows()));
  }
  return WeightMatrix((x.matrix() * hidden).cwiseMax(0.0));
}

SetEmbedding layer_forward(const VectorSet& x, const HiddenSets& h, MatchMode mode) {
  SetEmbedding emb;
  emb.values.resize(static_cast<Eigen::Index>(h.count()));
  emb.assignments.reserve(h.count());
  for (std::size_t k = 0; k < h.count(); ++k) {
    emb.assignments.push_back(solve(score_matrix(x, h[k]), mode));
    emb.values(static_cast<Eigen::Index>(k)) = emb.assignments.back().objective;
  }
  return emb;
}

LayerGradients layer_backward(const VectorSet& x, const HiddenSets& h, const SetEmbedding& emb,
                              const Eigen::VectorXd& upstream) {
  if (emb.assignments.size() != h.count() ||
      static_cast<std::size_t>(upstream.size()) != h.count()) {
    throw InvalidInput("layer_backward: embedding/upstream length does not match hidden set count");
  }
  if (x.dim() != h.dim()) throw InvalidInput("layer_backward: dimension mismatch");

  const Eigen::MatrixXd& v = x.matrix();
  LayerGradients grads;
  grads.per_hidden.reserve(h.count());
  for (std::size_t k = 0; k < h.count(); ++k) {
    const Eigen::MatrixXd& hk = h[k];
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(hk.rows(), hk.cols());
    const double scale = upstream(static_cast<Eigen::Index>(k));
    if (scale != 0.0) {
      // V^T (D .* M) touches column j once per matched row i.
      for (const auto& [i, j] : emb.assignments[k].pairs) {
        const auto row = static_cast<Eigen::Index>(i);
        const auto col = static_cast<Eigen::Index>(j);
        if (v.row(row).dot(hk.col(col)) > 0.0) {
          g.col(col) += scale * v.row(row).transpose();
        }
      }
    }
    grads.per_hidden.push_back(std::move(g));
  }
  return grads;
}

}  // namespace repset
