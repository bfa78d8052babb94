#pragma once

#include <cstddef>
#include <optional>
#include <span>

#include <Eigen/Dense>

#include "repset/repset_layer.hpp"

namespace repset {

/// Output layer p = softmax(W x + b) with W of shape |C| x m.
struct ClassifierHead {
  Eigen::MatrixXd weights;
  Eigen::VectorXd bias;

  static ClassifierHead zeros(std::size_t num_classes, std::size_t features);
  std::size_t num_classes() const noexcept { return static_cast<std::size_t>(bias.size()); }
  std::size_t features() const noexcept { return static_cast<std::size_t>(weights.cols()); }
};

struct PredictionRecord {
  Eigen::VectorXd logits;  // r = W x + b
  Eigen::VectorXd probs;
  std::optional<std::size_t> label;

  /// Index of the largest probability; ties go to the lowest index.
  std::size_t predicted() const;
};

struct HeadGradients {
  Eigen::MatrixXd weights;  // (p - y) x^T
  Eigen::VectorXd bias;     // p - y
  Eigen::VectorXd input;    // W^T (p - y)
};

Eigen::VectorXd softmax(const Eigen::VectorXd& logits);

PredictionRecord predict(const Eigen::VectorXd& features, const ClassifierHead& head,
                         std::optional<std::size_t> label = std::nullopt);
inline PredictionRecord predict(const SetEmbedding& emb, const ClassifierHead& head,
                                std::optional<std::size_t> label = std::nullopt) {
  return predict(emb.values, head, label);
}

/// -log p_label for one record, computed from the logits (log-sum-exp).
double nll_loss(const PredictionRecord& record);
/// Summed over the batch. Throws InvalidInput on an unlabeled record.
double nll_loss(std::span<const PredictionRecord> batch);

HeadGradients backward_head(const Eigen::VectorXd& features, const ClassifierHead& head,
                            const PredictionRecord& record);

/// Optional fully-connected ReLU layer between the set embedding and the head.
struct DenseLayer {
  Eigen::MatrixXd weights;  // out x in
  Eigen::VectorXd bias;

  Eigen::VectorXd forward(const Eigen::VectorXd& input) const;
};

struct DenseGradients {
  Eigen::MatrixXd weights;
  Eigen::VectorXd bias;
  Eigen::VectorXd input;
};

/// `output` is the forward result for `input`; `upstream` is dL/d(output).
DenseGradients backward_dense(const DenseLayer& layer, const Eigen::VectorXd& input,
                              const Eigen::VectorXd& output, const Eigen::VectorXd& upstream);

}  // namespace repset
