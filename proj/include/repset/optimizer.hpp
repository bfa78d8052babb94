#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace repset {

enum class OptimizerKind { kSgd, kAdam };

const char* to_string(OptimizerKind kind) noexcept;
OptimizerKind parse_optimizer(const std::string& text);

struct AdamSettings {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Plain SGD or Adam over a fixed list of flat parameter buffers. The moment
/// buffers mirror the parameter layout passed at construction.
class Optimizer {
 public:
  Optimizer(OptimizerKind kind, double learning_rate, std::span<const std::size_t> sizes,
            AdamSettings adam = {});

  /// params[i] -= update(grads[i]). Sizes must match the construction layout.
  void step(std::span<const std::span<double>> params, std::span<const std::span<double>> grads);

  OptimizerKind kind() const noexcept { return kind_; }
  double learning_rate() const noexcept { return learning_rate_; }
  std::uint64_t steps() const noexcept { return steps_; }

 private:
  OptimizerKind kind_;
  double learning_rate_;
  AdamSettings adam_;
  std::uint64_t steps_ = 0;
  std::vector<std::vector<double>> first_moment_;
  std::vector<std::vector<double>> second_moment_;
};

}  // namespace repset
