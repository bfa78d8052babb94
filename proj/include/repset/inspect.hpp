#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "repset/data_io.hpp"
#include "repset/repset_layer.hpp"

namespace repset {

struct Neighbor {
  std::string term;
  double cosine = 0.0;
};

/// Nearest neighbours of one hidden-set element, or of the set's centroid
/// (column mean) when `element` is empty.
struct ElementNeighbors {
  std::size_t hidden_set = 0;
  std::optional<std::size_t> element;
  std::vector<Neighbor> neighbors;
};

/// Top-k vocabulary terms by cosine similarity, best first; ties keep
/// vocabulary order. Zero-norm vectors have cosine 0 with everything.
std::vector<Neighbor> nearest_terms(const Eigen::VectorXd& query, const EmbeddingTable& table,
                                    std::size_t topk);

/// For each hidden set: one entry per element, then one for its centroid.
/// Throws InvalidInput on a dimension mismatch.
std::vector<ElementNeighbors> inspect_hidden_sets(const HiddenSets& hidden,
                                                  const EmbeddingTable& table, std::size_t topk);

}  // namespace repset
