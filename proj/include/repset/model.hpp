#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "repset/assignment.hpp"
#include "repset/classifier.hpp"
#include "repset/repset_layer.hpp"

namespace repset {

/// Full set classifier: matching layer, optional dense ReLU layer, softmax head.
struct Model {
  HiddenSets hidden;
  std::optional<DenseLayer> dense;
  ClassifierHead head;
  MatchMode mode = MatchMode::kExact;
  bool normalize_inputs = false;

  std::size_t dim() const noexcept { return hidden.dim(); }
  std::size_t num_classes() const noexcept { return head.num_classes(); }

  /// Throws InvalidInput if the layer shapes do not chain.
  void check_shapes() const;
};

/// Everything forward computes that backward needs.
struct ForwardPass {
  VectorSet input;         // after optional normalisation
  SetEmbedding embedding;  // x
  Eigen::VectorXd features;  // head input: x, or the dense layer output
  PredictionRecord record;
};

struct ModelGradients {
  std::vector<Eigen::MatrixXd> hidden;
  Eigen::MatrixXd dense_weights;
  Eigen::VectorXd dense_bias;
  Eigen::MatrixXd head_weights;
  Eigen::VectorXd head_bias;

  static ModelGradients zeros_like(const Model& model);
  ModelGradients& operator+=(const ModelGradients& other);
  bool all_finite() const;
};

/// Rows scaled to unit L2 norm; all-zero rows are left as is.
VectorSet normalize_rows(const VectorSet& x);

ForwardPass forward(const Model& model, const VectorSet& x,
                    std::optional<std::size_t> label = std::nullopt);

/// Adds dL/dtheta for the labelled pass into `grads`.
void accumulate_backward(const Model& model, const ForwardPass& pass, ModelGradients& grads);

/// Flat views over every trainable buffer, in a fixed order shared by
/// parameter_views and gradient_views.
std::vector<std::span<double>> parameter_views(Model& model);
std::vector<std::span<double>> gradient_views(ModelGradients& grads);

}  // namespace repset
