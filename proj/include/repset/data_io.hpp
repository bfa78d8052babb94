#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <Eigen/Dense>

#include "repset/repset_layer.hpp"

namespace repset {

struct LabeledSet {
  VectorSet set;
  std::optional<std::size_t> label;  // absent only in prediction inputs
  std::string id;
};

struct Dataset {
  std::vector<LabeledSet> examples;
  std::size_t dim = 0;
  std::vector<std::string> class_names;  // index -> name

  std::size_t size() const noexcept { return examples.size(); }
  std::size_t num_classes() const noexcept { return class_names.size(); }
  bool fully_labeled() const;
};

struct SetFileOptions {
  /// Fix the label -> index map (e.g. from a checkpoint). Unknown labels are
  /// then an error. When unset, classes are the sorted distinct labels.
  std::optional<std::vector<std::string>> class_names;
  bool require_labels = true;
};

/// One JSON object per line: {"id": str, "label": str, "vectors": [[...], ...]}.
/// Blank lines are skipped. Throws DataError naming the offending line.
Dataset load_set_file(const std::filesystem::path& path, const SetFileOptions& options = {});
void write_set_file(const Dataset& data, const std::filesystem::path& path);

class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  explicit EmbeddingTable(std::size_t dim) : dim_(dim) {}

  /// Returns false (and keeps the existing vector) if the token is present.
  bool insert(std::string token, const Eigen::VectorXd& vector);
  const Eigen::VectorXd* find(const std::string& token) const;

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return tokens_.size(); }
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }
  const Eigen::VectorXd& vector(std::size_t i) const { return vectors_.at(i); }
  /// Row i is the vector of tokens()[i].
  Eigen::MatrixXd as_matrix() const;

 private:
  std::size_t dim_ = 0;
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<Eigen::VectorXd> vectors_;
};

/// Text table: header "vocab_size dim", then "token v1 ... vd" per line.
/// Duplicate tokens keep the first occurrence and emit a warning.
EmbeddingTable load_embeddings(const std::filesystem::path& path);

/// One token per line; blank lines and lines starting with '#' are ignored.
std::unordered_set<std::string> load_stopwords(const std::filesystem::path& path);

struct Document {
  std::string id;
  std::string text;
  std::string label;
};

/// Tab-separated "id<TAB>label<TAB>text" per line.
std::vector<Document> load_documents(const std::filesystem::path& path);

/// Lowercase, replace ASCII punctuation with spaces, split on whitespace.
std::vector<std::string> tokenize(const std::string& text);

struct VectorizeOptions {
  bool keep_duplicates = false;
};

/// Each document becomes the set of embeddings of its distinct, in-vocabulary,
/// non-stopword terms, in first-occurrence order. Documents left empty are
/// dropped with a warning; throws DataError if every document is dropped.
Dataset vectorize_documents(const std::vector<Document>& docs, const EmbeddingTable& table,
                            const std::unordered_set<std::string>& stopwords,
                            const VectorizeOptions& options = {});

/// Four 2-element sets in R^2, one per class, all with centroid and
/// element-sum exactly (0, 0).
Dataset synthetic_toy();

struct BenchDataSpec {
  std::size_t examples = 200;
  std::size_t set_cardinality = 10;
  std::size_t dim = 20;
  std::size_t num_classes = 2;
  std::uint64_t seed = 0;
  double mean_shift = 1.0;
};

/// Standard-normal sets; class c shifts every element by c * mean_shift along
/// the first axis. Example i
/// has class i mod num_classes.
Dataset synthetic_bench(const BenchDataSpec& spec);

}  // namespace repset
