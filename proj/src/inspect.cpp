#include "repset/inspect.hpp"

#include <algorithm>
#include <numeric>

#include "repset/errors.hpp"

namespace repset {
namespace {

std::vector<Neighbor> rank(const Eigen::VectorXd& query, const Eigen::MatrixXd& vocab,
                           const Eigen::VectorXd& vocab_norms, const EmbeddingTable& table,
                           std::size_t topk) {
  const double qn = query.norm();
  const auto n = static_cast<std::size_t>(vocab.rows());
  std::vector<double> cos(n, 0.0);
  if (qn > 0.0) {
    const Eigen::VectorXd dots = vocab * query;
    for (std::size_t i = 0; i < n; ++i) {
      const double vn = vocab_norms(static_cast<Eigen::Index>(i));
      if (vn > 0.0) cos[i] = dots(static_cast<Eigen::Index>(i)) / (qn * vn);
    }
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t k = std::min(topk, n);
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                    [&](std::size_t a, std::size_t b) { return cos[a] > cos[b] || (cos[a] == cos[b] && a < b); });
  std::vector<Neighbor> out;
  out.reserve(k);
  for (std::size_t r = 0; r < k; ++r) out.push_back({table.tokens()[order[r]], cos[order[r]]});
  return out;
}

}  // namespace

std::vector<Neighbor> nearest_terms(const Eigen::VectorXd& query, const EmbeddingTable& table,
                                    std::size_t topk) {
  if (static_cast<std::size_t>(query.size()) != table.dim()) {
    throw InvalidInput("query dimension does not match the embedding table");
  }
  const Eigen::MatrixXd vocab = table.as_matrix();
  return rank(query, vocab, vocab.rowwise().norm(), table, topk);
}

std::vector<ElementNeighbors> inspect_hidden_sets(const HiddenSets& hidden,
                                                  const EmbeddingTable& table, std::size_t topk) {
  if (hidden.dim() != table.dim()) {
    throw InvalidInput("dimension mismatch: hidden sets have d=" + std::to_string(hidden.dim()) +
                       ", embeddings have d=" + std::to_string(table.dim()));
  }
  const Eigen::MatrixXd vocab = table.as_matrix();
  const Eigen::VectorXd norms = vocab.rowwise().norm();
  std::vector<ElementNeighbors> out;
  for (std::size_t k = 0; k < hidden.count(); ++k) {
    const Eigen::MatrixXd& h = hidden[k];
    for (Eigen::Index j = 0; j < h.cols(); ++j) {
      out.push_back({k, static_cast<std::size_t>(j), rank(h.col(j), vocab, norms, table, topk)});
    }
    out.push_back({k, std::nullopt, rank(h.rowwise().mean(), vocab, norms, table, topk)});
  }
  return out;
}

}  // namespace repset
