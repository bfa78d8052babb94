#include "repset/optimizer.hpp"

#include <cmath>

#include "repset/errors.hpp"

namespace repset {

const char* to_string(OptimizerKind kind) noexcept {
  return kind == OptimizerKind::kAdam ? "adam" : "sgd";
}

OptimizerKind parse_optimizer(const std::string& text) {
  if (text == "adam") return OptimizerKind::kAdam;
  if (text == "sgd") return OptimizerKind::kSgd;
  throw InvalidInput("unknown optimizer '" + text + "' (expected adam|sgd)");
}

Optimizer::Optimizer(OptimizerKind kind, double learning_rate, std::span<const std::size_t> sizes,
                     AdamSettings adam)
    : kind_(kind), learning_rate_(learning_rate), adam_(adam) {
  if (kind_ == OptimizerKind::kAdam) {
    for (std::size_t n : sizes) {
      first_moment_.emplace_back(n, 0.0);
      second_moment_.emplace_back(n, 0.0);
    }
  } else {
    first_moment_.resize(sizes.size());
    second_moment_.resize(sizes.size());
  }
}

void Optimizer::step(std::span<const std::span<double>> params,
                     std::span<const std::span<double>> grads) {
  if (params.size() != grads.size() || params.size() != first_moment_.size()) {
    throw InvalidInput("optimizer: parameter layout changed since construction");
  }
  ++steps_;
  if (kind_ == OptimizerKind::kSgd) {
    for (std::size_t b = 0; b < params.size(); ++b) {
      if (grads[b].size() != params[b].size()) {
        throw InvalidInput("optimizer: gradient size does not match parameter size");
      }
      for (std::size_t i = 0; i < params[b].size(); ++i) params[b][i] -= learning_rate_ * grads[b][i];
    }
    return;
  }
  const double t = static_cast<double>(steps_);
  const double correction1 = 1.0 - std::pow(adam_.beta1, t);
  const double correction2 = 1.0 - std::pow(adam_.beta2, t);
  for (std::size_t b = 0; b < params.size(); ++b) {
    auto& m = first_moment_[b];
    auto& v = second_moment_[b];
    if (m.size() != params[b].size() || grads[b].size() != params[b].size()) {
      throw InvalidInput("optimizer: buffer size changed since construction");
    }
    for (std::size_t i = 0; i < m.size(); ++i) {
      const double g = grads[b][i];
      m[i] = adam_.beta1 * m[i] + (1.0 - adam_.beta1) * g;
      v[i] = adam_.beta2 * v[i] + (1.0 - adam_.beta2) * g * g;
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      params[b][i] -= learning_rate_ * m_hat / (std::sqrt(v_hat) + adam_.epsilon);
    }
  }
}

}  // namespace repset
