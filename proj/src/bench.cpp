#include "repset/bench.hpp"

#include <chrono>
#include <numeric>
#include <vector>

#include "repset/data_io.hpp"
#include "repset/errors.hpp"
#include "repset/training.hpp"

namespace repset {

double time_epoch(const BenchPoint& point, std::uint64_t seed, std::size_t repeats,
                  std::size_t threads) {
  if (repeats < 1) throw InvalidInput("time_epoch: repeats must be at least 1");
  const Dataset data = synthetic_bench(
      {point.examples, point.set_cardinality, point.dim, 2, seed, 1.0});

  TrainConfig config;
  config.m = point.m;
  config.cardinality = {point.cardinality};
  config.mode = point.mode;
  config.batch_size = 32;
  config.threads = threads;
  config.seed = seed;

  Trainer trainer(init_params(config, point.dim, data.num_classes(), seed), config);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  trainer.run_epoch(data, order);  // warm-up
  const auto t0 = std::chrono::steady_clock::now();
  for (std::size_t r = 0; r < repeats; ++r) trainer.run_epoch(data, order);
  const auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double>(t1 - t0).count() / static_cast<double>(repeats);
}

}  // namespace repset
