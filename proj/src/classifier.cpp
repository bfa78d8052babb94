#include "repset/classifier.hpp"

#include <cmath>
#include <string>

#include "repset/errors.hpp"

namespace repset {

ClassifierHead ClassifierHead::zeros(std::size_t num_classes, std::size_t features) {
  return {Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(num_classes),
                                static_cast<Eigen::Index>(features)),
          Eigen::VectorXd::Zero(static_cast<Eigen::Index>(num_classes))};
}

std::size_t PredictionRecord::predicted() const {
  Eigen::Index best = 0;
  logits.maxCoeff(&best);
  return static_cast<std::size_t>(best);
}

Eigen::VectorXd softmax(const Eigen::VectorXd& logits) {
  const Eigen::ArrayXd shifted = (logits.array() - logits.maxCoeff()).exp();
  return (shifted / shifted.sum()).matrix();
}

PredictionRecord predict(const Eigen::VectorXd& features, const ClassifierHead& head,
                         std::optional<std::size_t> label) {
  if (static_cast<std::size_t>(features.size()) != head.features() ||
      head.weights.rows() != head.bias.size()) {
    throw InvalidInput("predict: embedding has length " + std::to_string(features.size()) +
                       ", head expects " + std::to_string(head.features()));
  }
  if (label && *label >= head.num_classes()) {
    throw InvalidInput("predict: label " + std::to_string(*label) + " out of range");
  }
  PredictionRecord rec;
  rec.logits = head.weights * features + head.bias;
  rec.probs = softmax(rec.logits);
  rec.label = label;
  return rec;
}

double nll_loss(const PredictionRecord& record) {
  if (!record.label) throw InvalidInput("nll_loss: record has no label");
  const double top = record.logits.maxCoeff();
  const double lse = top + std::log((record.logits.array() - top).exp().sum());
  return lse - record.logits(static_cast<Eigen::Index>(*record.label));
}

double nll_loss(std::span<const PredictionRecord> batch) {
  double total = 0.0;
  for (const auto& rec : batch) total += nll_loss(rec);
  return total;
}

HeadGradients backward_head(const Eigen::VectorXd& features, const ClassifierHead& head,
                            const PredictionRecord& record) {
  if (!record.label) throw InvalidInput("backward_head: record has no label");
  if (static_cast<std::size_t>(features.size()) != head.features() ||
      static_cast<std::size_t>(record.probs.size()) != head.num_classes()) {
    throw InvalidInput("backward_head: shape mismatch");
  }
  Eigen::VectorXd delta = record.probs;
  delta(static_cast<Eigen::Index>(*record.label)) -= 1.0;
  return {delta * features.transpose(), delta, head.weights.transpose() * delta};
}

Eigen::VectorXd DenseLayer::forward(const Eigen::VectorXd& input) const {
  if (input.size() != weights.cols()) throw InvalidInput("dense layer: input size mismatch");
  return (weights * input + bias).cwiseMax(0.0);
}

DenseGradients backward_dense(const DenseLayer& layer, const Eigen::VectorXd& input,
                              const Eigen::VectorXd& output, const Eigen::VectorXd& upstream) {
  if (upstream.size() != layer.weights.rows() || output.size() != upstream.size()) {
    throw InvalidInput("dense layer: upstream size mismatch");
  }
  const Eigen::VectorXd pre = (output.array() > 0.0).select(upstream, 0.0);
  return {pre * input.transpose(), pre, layer.weights.transpose() * pre};
}

}  // namespace repset
