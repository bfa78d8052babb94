#pragma once

#include <cstddef>
#include <cstdint>

#include "repset/assignment.hpp"

namespace repset {

struct BenchPoint {
  MatchMode mode = MatchMode::kExact;
  std::size_t m = 50;
  std::size_t cardinality = 50;      // |Y_k|
  std::size_t set_cardinality = 50;  // |X_i|
  std::size_t examples = 200;        // N
  std::size_t dim = 20;
};

/// Wall-clock seconds of one training epoch on synthetic data, measured
/// after one untimed warm-up epoch. Averages over `repeats` timed epochs.
double time_epoch(const BenchPoint& point, std::uint64_t seed, std::size_t repeats = 1,
                  std::size_t threads = 1);

}  // namespace repset
