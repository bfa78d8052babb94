#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "repset/assignment.hpp"
#include "repset/data_io.hpp"
#include "repset/model.hpp"
#include "repset/optimizer.hpp"

namespace repset {

struct TrainConfig {
  std::size_t m = 30;
  /// One value applies to every hidden set; otherwise exactly m values.
  std::vector<std::size_t> cardinality{20};
  MatchMode mode = MatchMode::kExact;
  double learning_rate = 1e-3;
  std::size_t epochs = 200;
  std::size_t batch_size = 32;
  OptimizerKind optimizer = OptimizerKind::kAdam;
  std::uint64_t seed = 0;
  double val_fraction = 0.1;
  std::size_t patience = 20;
  bool normalize_inputs = false;
  bool hidden_fc = false;
  std::size_t hidden_units = 32;
  /// Worker threads for per-example passes. Results do not depend on it.
  std::size_t threads = 1;

  /// Throws InvalidInput on any violated constraint.
  void validate() const;
  /// Cardinality of each of the m hidden sets.
  std::vector<std::size_t> cardinalities() const;
};

/// Hidden-set entries ~ N(0, 1/d); head (and dense bias) zero; dense weights
/// ~ N(0, 1/m). Deterministic in `seed`.
Model init_params(const TrainConfig& config, std::size_t dim, std::size_t num_classes,
                  std::uint64_t seed);

struct EpochMetrics {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;  // mean NLL over the training split
  double train_accuracy = 0.0;
  std::optional<double> val_accuracy;  // absent without a validation split
  double seconds = 0.0;
};

struct EvalResult {
  double accuracy = 0.0;
  double mean_loss = 0.0;
  std::size_t examples = 0;
};

struct TrainingState {
  Model model;
  std::size_t epoch = 0;
  double best_accuracy = 0.0;  // on the validation split, or training split without one
};

struct TrainResult {
  TrainingState best;
  std::vector<EpochMetrics> log;
  std::vector<std::size_t> train_indices;
  std::vector<std::size_t> val_indices;
};

/// Seeded shuffle of [0, n) split into (train, validation) with
/// floor(val_fraction * n) validation examples; at least one stays in train.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(
    std::size_t n, double val_fraction, std::mt19937_64& rng);

/// Mini-batch trainer over a fixed model. Gradients are summed over each
/// batch, then one optimizer step is taken.
class Trainer {
 public:
  Trainer(Model model, const TrainConfig& config);

  /// One pass over `indices` (visited in the given order). Returns the summed
  /// training loss observed during the pass. Throws NumericError on
  /// non-finite loss or gradients.
  double run_epoch(const Dataset& data, std::span<const std::size_t> indices);

  const Model& model() const noexcept { return model_; }
  Model& model() noexcept { return model_; }

 private:
  ModelGradients batch_gradients(const Dataset& data, std::span<const std::size_t> batch,
                                 double& loss);

  Model model_;
  TrainConfig config_;
  Optimizer optimizer_;
};

/// Full training run with shuffling, validation tracking, best-model
/// retention and early stopping (see README for the selection rule).
TrainResult train(const Dataset& data, const TrainConfig& config);

/// Accuracy and mean NLL over `indices` (all examples when empty).
EvalResult evaluate(const Dataset& data, const Model& model,
                    std::span<const std::size_t> indices = {}, std::size_t threads = 1);

/// Throws DataError if the dataset cannot be scored by the model.
void check_compatible(const Dataset& data, const Model& model);

}  // namespace repset
