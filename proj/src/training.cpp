#include "repset/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <string>
#include <thread>

#include "repset/errors.hpp"

namespace repset {
namespace {

// Runs fn(i) for i in [0, n) on up to `threads` workers, contiguous chunks.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t threads, Fn&& fn) {
  threads = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(n, 1));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(threads);
  {
    std::vector<std::jthread> workers;
    const std::size_t chunk = (n + threads - 1) / threads;
    for (std::size_t t = 0; t < threads; ++t) {
      workers.emplace_back([&, t] {
        try {
          for (std::size_t i = t * chunk; i < std::min(n, (t + 1) * chunk); ++i) fn(i);
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::vector<std::size_t> all_indices(std::size_t n) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  return idx;
}

}  // namespace

void TrainConfig::validate() const {
  if (m < 1) throw InvalidInput("m (number of hidden sets) must be at least 1");
  if (cardinality.empty()) throw InvalidInput("cardinality must be given");
  if (cardinality.size() != 1 && cardinality.size() != m) {
    throw InvalidInput("cardinality list must have 1 or m=" + std::to_string(m) + " entries");
  }
  for (std::size_t c : cardinality) {
    if (c < 1) throw InvalidInput("hidden set cardinality must be at least 1");
  }
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw InvalidInput("learning rate must be finite and nonnegative");
  }
  if (batch_size < 1) throw InvalidInput("batch size must be at least 1");
  if (!(val_fraction >= 0.0 && val_fraction < 1.0)) {
    throw InvalidInput("validation fraction must lie in [0, 1)");
  }
  if (hidden_fc && hidden_units < 1) throw InvalidInput("hidden_units must be at least 1");
  if (threads < 1) throw InvalidInput("threads must be at least 1");
}

std::vector<std::size_t> TrainConfig::cardinalities() const {
  if (cardinality.size() == m) return cardinality;
  return std::vector<std::size_t>(m, cardinality.front());
}

Model init_params(const TrainConfig& config, std::size_t dim, std::size_t num_classes,
                  std::uint64_t seed) {
  config.validate();
  if (dim < 1) throw InvalidInput("init_params: dimension must be at least 1");
  if (num_classes < 1) throw InvalidInput("init_params: need at least one class");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> hidden_dist(0.0, 1.0 / std::sqrt(static_cast<double>(dim)));
  const auto d = static_cast<Eigen::Index>(dim);

  std::vector<Eigen::MatrixXd> hidden;
  for (std::size_t card : config.cardinalities()) {
    Eigen::MatrixXd h(d, static_cast<Eigen::Index>(card));
    for (Eigen::Index j = 0; j < h.cols(); ++j) {
      for (Eigen::Index i = 0; i < d; ++i) h(i, j) = hidden_dist(rng);
    }
    hidden.push_back(std::move(h));
  }

  Model model;
  model.hidden = HiddenSets(std::move(hidden));
  model.mode = config.mode;
  model.normalize_inputs = config.normalize_inputs;
  std::size_t head_in = config.m;
  if (config.hidden_fc) {
    std::normal_distribution<double> dense_dist(0.0, 1.0 / std::sqrt(static_cast<double>(config.m)));
    DenseLayer dense{Eigen::MatrixXd(static_cast<Eigen::Index>(config.hidden_units),
                                     static_cast<Eigen::Index>(config.m)),
                     Eigen::VectorXd::Zero(static_cast<Eigen::Index>(config.hidden_units))};
    for (Eigen::Index j = 0; j < dense.weights.cols(); ++j) {
      for (Eigen::Index i = 0; i < dense.weights.rows(); ++i) dense.weights(i, j) = dense_dist(rng);
    }
    model.dense = std::move(dense);
    head_in = config.hidden_units;
  }
  model.head = ClassifierHead::zeros(num_classes, head_in);
  return model;
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(
    std::size_t n, double val_fraction, std::mt19937_64& rng) {
  std::vector<std::size_t> idx = all_indices(n);
  std::shuffle(idx.begin(), idx.end(), rng);
  std::size_t val = static_cast<std::size_t>(std::floor(val_fraction * static_cast<double>(n)));
  if (n > 0) val = std::min(val, n - 1);
  std::vector<std::size_t> val_idx(idx.end() - static_cast<std::ptrdiff_t>(val), idx.end());
  idx.resize(n - val);
  return {std::move(idx), std::move(val_idx)};
}

void check_compatible(const Dataset& data, const Model& model) {
  if (data.dim != model.dim()) {
    throw DataError("dimension mismatch: data has d=" + std::to_string(data.dim) +
                    " but the model expects d=" + std::to_string(model.dim()));
  }
  for (const auto& ex : data.examples) {
    if (ex.set.dim() != model.dim()) {
      throw DataError("example '" + ex.id + "' has dimension " + std::to_string(ex.set.dim()));
    }
    if (ex.label && *ex.label >= model.num_classes()) {
      throw DataError("example '" + ex.id + "' has a label outside the model's classes");
    }
  }
}

Trainer::Trainer(Model model, const TrainConfig& config)
    : model_(std::move(model)),
      config_(config),
      optimizer_([&] {
        model_.check_shapes();
        std::vector<std::size_t> sizes;
        for (const auto& v : parameter_views(model_)) sizes.push_back(v.size());
        return Optimizer(config.optimizer, config.learning_rate, sizes);
      }()) {}

ModelGradients Trainer::batch_gradients(const Dataset& data, std::span<const std::size_t> batch,
                                        double& loss) {
  // Per-example gradients are reduced in batch order, so the sum does not
  // depend on the number of worker threads.
  std::vector<ModelGradients> per_example(batch.size());
  std::vector<double> losses(batch.size());
  parallel_for(batch.size(), config_.threads, [&](std::size_t b) {
    const LabeledSet& ex = data.examples[batch[b]];
    const ForwardPass pass = forward(model_, ex.set, ex.label);
    losses[b] = nll_loss(pass.record);
    per_example[b] = ModelGradients::zeros_like(model_);
    accumulate_backward(model_, pass, per_example[b]);
  });
  ModelGradients total = ModelGradients::zeros_like(model_);
  for (std::size_t b = 0; b < batch.size(); ++b) {
    total += per_example[b];
    loss += losses[b];
  }
  return total;
}

double Trainer::run_epoch(const Dataset& data, std::span<const std::size_t> indices) {
  double loss = 0.0;
  for (std::size_t start = 0; start < indices.size(); start += config_.batch_size) {
    const std::size_t len = std::min(config_.batch_size, indices.size() - start);
    ModelGradients grads = batch_gradients(data, indices.subspan(start, len), loss);
    if (!std::isfinite(loss) || !grads.all_finite()) {
      throw NumericError("training diverged: non-finite loss or gradient");
    }
    const auto params = parameter_views(model_);
    optimizer_.step(params, gradient_views(grads));
    for (const auto& buf : params) {
      if (!std::all_of(buf.begin(), buf.end(), [](double v) { return std::isfinite(v); })) {
        throw NumericError("training diverged: parameters became non-finite");
      }
    }
  }
  return loss;
}

EvalResult evaluate(const Dataset& data, const Model& model, std::span<const std::size_t> indices,
                    std::size_t threads) {
  check_compatible(data, model);
  std::vector<std::size_t> owned;
  if (indices.empty()) {
    owned = all_indices(data.size());
    indices = owned;
  }
  std::vector<double> losses(indices.size());
  std::vector<char> correct(indices.size());
  parallel_for(indices.size(), threads, [&](std::size_t i) {
    const LabeledSet& ex = data.examples[indices[i]];
    if (!ex.label) throw DataError("example '" + ex.id + "' has no label");
    const ForwardPass pass = forward(model, ex.set, ex.label);
    losses[i] = nll_loss(pass.record);
    correct[i] = pass.record.predicted() == *ex.label;
  });
  EvalResult r;
  r.examples = indices.size();
  if (r.examples == 0) return r;
  double loss = 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < indices.size(); ++i) {
    loss += losses[i];
    hits += correct[i] ? 1 : 0;
  }
  r.accuracy = static_cast<double>(hits) / static_cast<double>(r.examples);
  r.mean_loss = loss / static_cast<double>(r.examples);
  return r;
}

TrainResult train(const Dataset& data, const TrainConfig& config) {
  config.validate();
  if (data.examples.empty()) throw DataError("training dataset is empty");
  if (data.num_classes() < 1) throw DataError("training dataset has no classes");
  if (!data.fully_labeled()) throw DataError("every training example needs a label");
  for (const auto& ex : data.examples) {
    if (ex.set.dim() != data.dim) {
      throw DataError("example '" + ex.id + "' has dimension " + std::to_string(ex.set.dim()) +
                      ", expected " + std::to_string(data.dim));
    }
  }

  std::mt19937_64 rng(config.seed);
  TrainResult result;
  std::tie(result.train_indices, result.val_indices) =
      split_indices(data.size(), config.val_fraction, rng);

  Trainer trainer(init_params(config, data.dim, data.num_classes(), config.seed), config);
  check_compatible(data, trainer.model());

  // Model selection: higher accuracy on the monitored split wins; equal
  // accuracy falls back to lower mean loss.
  double best_loss = std::numeric_limits<double>::infinity();
  bool have_best = false;
  std::size_t stale = 0;
  std::vector<std::size_t> order = result.train_indices;

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    const auto t0 = std::chrono::steady_clock::now();
    trainer.run_epoch(data, order);
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    EpochMetrics row;
    row.epoch = epoch;
    row.seconds = seconds;
    const EvalResult tr = evaluate(data, trainer.model(), result.train_indices, config.threads);
    if (!std::isfinite(tr.mean_loss)) throw NumericError("training loss became non-finite");
    row.train_loss = tr.mean_loss;
    row.train_accuracy = tr.accuracy;
    EvalResult monitor = tr;
    if (!result.val_indices.empty()) {
      monitor = evaluate(data, trainer.model(), result.val_indices, config.threads);
      row.val_accuracy = monitor.accuracy;
    }
    result.log.push_back(row);

    const bool improved = !have_best || monitor.accuracy > result.best.best_accuracy ||
                          (monitor.accuracy == result.best.best_accuracy && monitor.mean_loss < best_loss);
    if (improved) {
      result.best.model = trainer.model();
      result.best.epoch = epoch;
      result.best.best_accuracy = monitor.accuracy;
      best_loss = monitor.mean_loss;
      have_best = true;
      stale = 0;
    } else if (config.patience > 0 && ++stale >= config.patience) {
      break;
    }
  }
  if (!have_best) {
    result.best.model = trainer.model();
    result.best.best_accuracy = evaluate(data, trainer.model(), result.train_indices).accuracy;
  }
  return result;
}

}  // namespace repset
