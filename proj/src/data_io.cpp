#include "repset/data_io.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "json.hpp"
#include "repset/diagnostics.hpp"
#include "repset/errors.hpp"

namespace repset {
namespace {

using nlohmann::json;

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  return in;
}

bool is_blank(const std::string& line) {
  return std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); });
}

struct RawRecord {
  std::string id;
  std::optional<std::string> label;
  Eigen::MatrixXd vectors;
  std::size_t line = 0;
};

RawRecord parse_set_line(const std::string& source, std::size_t line_no, const std::string& line,
                         std::size_t& dim) {
  json doc;
  try {
    doc = json::parse(line);
  } catch (const json::parse_error& e) {
    throw DataError(source, line_no, std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) throw DataError(source, line_no, "record must be a JSON object");

  RawRecord rec;
  rec.line = line_no;
  if (auto it = doc.find("id"); it != doc.end() && !it->is_null()) {
    rec.id = it->is_string() ? it->get<std::string>() : it->dump();
  } else {
    rec.id = std::to_string(line_no);
  }
  if (auto it = doc.find("label"); it != doc.end() && !it->is_null()) {
    rec.label = it->is_string() ? it->get<std::string>() : it->dump();
  }

  auto vit = doc.find("vectors");
  if (vit == doc.end() || !vit->is_array()) {
    throw DataError(source, line_no, "missing 'vectors' array");
  }
  if (vit->empty()) throw DataError(source, line_no, "'vectors' is empty");
  const auto& rows = *vit;
  std::size_t row_dim = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!rows[i].is_array()) throw DataError(source, line_no, "vector " + std::to_string(i) + " is not an array");
    if (i == 0) {
      row_dim = rows[i].size();
    } else if (rows[i].size() != row_dim) {
      throw DataError(source, line_no,
                      "ragged vectors: vector 0 has length " + std::to_string(row_dim) +
                          " but vector " + std::to_string(i) + " has length " +
                          std::to_string(rows[i].size()));
    }
  }
  if (row_dim == 0) throw DataError(source, line_no, "vectors have length 0");
  if (dim == 0) {
    dim = row_dim;
  } else if (row_dim != dim) {
    throw DataError(source, line_no,
                    "dimension " + std::to_string(row_dim) + " differs from " +
                        std::to_string(dim) + " established by the first record");
  }
  rec.vectors.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(row_dim));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < row_dim; ++j) {
      const auto& v = rows[i][j];
      if (!v.is_number()) throw DataError(source, line_no, "non-numeric vector entry");
      const double x = v.get<double>();
      if (!std::isfinite(x)) throw DataError(source, line_no, "non-finite vector entry");
      rec.vectors(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = x;
    }
  }
  return rec;
}

}  // namespace

bool Dataset::fully_labeled() const {
  return std::all_of(examples.begin(), examples.end(),
                     [](const LabeledSet& e) { return e.label.has_value(); });
}

Dataset load_set_file(const std::filesystem::path& path, const SetFileOptions& options) {
  std::ifstream in = open_input(path);
  const std::string source = path.string();

  std::vector<RawRecord> records;
  std::size_t dim = 0;
  std::string line;
  for (std::size_t line_no = 1; std::getline(in, line); ++line_no) {
    if (is_blank(line)) continue;
    records.push_back(parse_set_line(source, line_no, line, dim));
  }
  if (records.empty()) throw DataError("'" + source + "' contains no records");

  Dataset data;
  data.dim = dim;
  if (options.class_names) {
    data.class_names = *options.class_names;
  } else {
    std::set<std::string> names;
    for (const auto& r : records) {
      if (r.label) names.insert(*r.label);
    }
    data.class_names.assign(names.begin(), names.end());
  }
  std::map<std::string, std::size_t> index;
  for (std::size_t c = 0; c < data.class_names.size(); ++c) index.emplace(data.class_names[c], c);

  data.examples.reserve(records.size());
  for (auto& r : records) {
    LabeledSet ex{VectorSet(std::move(r.vectors)), std::nullopt, std::move(r.id)};
    if (r.label) {
      auto it = index.find(*r.label);
      if (it == index.end()) throw DataError(source, r.line, "unknown label '" + *r.label + "'");
      ex.label = it->second;
    } else if (options.require_labels) {
      throw DataError(source, r.line, "record has no label");
    }
    data.examples.push_back(std::move(ex));
  }
  return data;
}

void write_set_file(const Dataset& data, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  for (const auto& ex : data.examples) {
    json rec;
    rec["id"] = ex.id;
    rec["label"] = ex.label ? json(data.class_names.at(*ex.label)) : json(nullptr);
    json rows = json::array();
    const Eigen::MatrixXd& v = ex.set.matrix();
    for (Eigen::Index i = 0; i < v.rows(); ++i) {
      json row = json::array();
      for (Eigen::Index j = 0; j < v.cols(); ++j) row.push_back(v(i, j));
      rows.push_back(std::move(row));
    }
    rec["vectors"] = std::move(rows);
    out << rec.dump() << '\n';
  }
  if (!out) throw DataError("write to '" + path.string() + "' failed");
}

bool EmbeddingTable::insert(std::string token, const Eigen::VectorXd& vector) {
  if (static_cast<std::size_t>(vector.size()) != dim_) {
    throw InvalidInput("embedding for '" + token + "' has the wrong dimension");
  }
  if (index_.contains(token)) return false;
  index_.emplace(token, tokens_.size());
  tokens_.push_back(std::move(token));
  vectors_.push_back(vector);
  return true;
}

const Eigen::VectorXd* EmbeddingTable::find(const std::string& token) const {
  auto it = index_.find(token);
  return it == index_.end() ? nullptr : &vectors_[it->second];
}

Eigen::MatrixXd EmbeddingTable::as_matrix() const {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(vectors_.size()), static_cast<Eigen::Index>(dim_));
  for (std::size_t i = 0; i < vectors_.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = vectors_[i].transpose();
  return out;
}

EmbeddingTable load_embeddings(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  const std::string source = path.string();
  std::string line;
  if (!std::getline(in, line)) throw DataError(source, 1, "missing 'vocab_size dim' header");

  std::istringstream header(line);
  long long declared = -1, dim = -1;
  if (!(header >> declared >> dim) || declared < 0 || dim < 1) {
    throw DataError(source, 1, "header must be 'vocab_size dim' with dim >= 1");
  }

  EmbeddingTable table(static_cast<std::size_t>(dim));
  std::size_t rows = 0;
  Eigen::VectorXd vec(dim);
  for (std::size_t line_no = 2; std::getline(in, line); ++line_no) {
    if (is_blank(line)) continue;
    std::istringstream fields(line);
    std::string token;
    fields >> token;
    for (long long j = 0; j < dim; ++j) {
      if (!(fields >> vec(j))) {
        throw DataError(source, line_no, "expected " + std::to_string(dim) + " values for '" + token + "'");
      }
    }
    std::string extra;
    if (fields >> extra) throw DataError(source, line_no, "too many values for '" + token + "'");
    if (!vec.allFinite()) throw DataError(source, line_no, "non-finite value for '" + token + "'");
    ++rows;
    if (!table.insert(token, vec)) {
      warn(source + ":" + std::to_string(line_no) + ": duplicate token '" + token + "' ignored");
    }
  }
  if (rows != static_cast<std::size_t>(declared)) {
    throw DataError(source, 0, "header declares " + std::to_string(declared) + " tokens but body has " +
                                   std::to_string(rows));
  }
  return table;
}

std::unordered_set<std::string> load_stopwords(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  std::unordered_set<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream fields(line);
    std::string word;
    if (!(fields >> word) || word.front() == '#') continue;
    std::transform(word.begin(), word.end(), word.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    words.insert(std::move(word));
  }
  return words;
}

std::vector<Document> load_documents(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  const std::string source = path.string();
  std::vector<Document> docs;
  std::string line;
  for (std::size_t line_no = 1; std::getline(in, line); ++line_no) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (is_blank(line)) continue;
    const auto tab1 = line.find('\t');
    const auto tab2 = tab1 == std::string::npos ? tab1 : line.find('\t', tab1 + 1);
    if (tab2 == std::string::npos) throw DataError(source, line_no, "expected id<TAB>label<TAB>text");
    docs.push_back({line.substr(0, tab1), line.substr(tab2 + 1), line.substr(tab1 + 1, tab2 - tab1 - 1)});
  }
  return docs;
}

std::vector<std::string> tokenize(const std::string& text) {
  std::string cleaned(text);
  for (char& ch : cleaned) {
    const auto c = static_cast<unsigned char>(ch);
    ch = std::ispunct(c) ? ' ' : static_cast<char>(std::tolower(c));
  }
  std::istringstream words(cleaned);
  std::vector<std::string> out;
  for (std::string w; words >> w;) out.push_back(std::move(w));
  return out;
}

Dataset vectorize_documents(const std::vector<Document>& docs, const EmbeddingTable& table,
                            const std::unordered_set<std::string>& stopwords,
                            const VectorizeOptions& options) {
  if (docs.empty()) throw DataError("no documents to vectorize");

  Dataset data;
  data.dim = table.dim();
  std::set<std::string> names;
  for (const auto& d : docs) names.insert(d.label);
  data.class_names.assign(names.begin(), names.end());

  std::vector<std::string> dropped;
  for (const auto& doc : docs) {
    std::vector<Eigen::VectorXd> vectors;
    std::unordered_set<std::string> seen;
    for (const auto& token : tokenize(doc.text)) {
      if (stopwords.contains(token)) continue;
      const Eigen::VectorXd* v = table.find(token);
      if (v == nullptr) continue;
      if (!options.keep_duplicates && !seen.insert(token).second) continue;
      vectors.push_back(*v);
    }
    if (vectors.empty()) {
      dropped.push_back(doc.id);
      continue;
    }
    Eigen::MatrixXd rows(static_cast<Eigen::Index>(vectors.size()), static_cast<Eigen::Index>(table.dim()));
    for (std::size_t i = 0; i < vectors.size(); ++i) rows.row(static_cast<Eigen::Index>(i)) = vectors[i].transpose();
    const auto label = static_cast<std::size_t>(
        std::distance(data.class_names.begin(),
                      std::lower_bound(data.class_names.begin(), data.class_names.end(), doc.label)));
    data.examples.push_back({VectorSet(std::move(rows)), label, doc.id});
  }
  if (!dropped.empty()) {
    std::string ids;
    for (const auto& id : dropped) ids += (ids.empty() ? "" : ", ") + id;
    warn("dropped " + std::to_string(dropped.size()) + " empty document(s): " + ids);
  }
  if (data.examples.empty()) throw DataError("every document is empty after filtering");
  return data;
}

Dataset synthetic_toy() {
  const double coords[4][2][2] = {
      {{1, 0}, {-1, 0}}, {{0, 1}, {0, -1}}, {{2, 0}, {-2, 0}}, {{0, 2}, {0, -2}}};
  Dataset data;
  data.dim = 2;
  data.class_names = {"0", "1", "2", "3"};
  for (std::size_t c = 0; c < 4; ++c) {
    Eigen::MatrixXd rows(2, 2);
    rows << coords[c][0][0], coords[c][0][1], coords[c][1][0], coords[c][1][1];
    data.examples.push_back({VectorSet(std::move(rows)), c, "toy-" + std::to_string(c)});
  }
  return data;
}

Dataset synthetic_bench(const BenchDataSpec& spec) {
  if (spec.examples < 1 || spec.set_cardinality < 1 || spec.dim < 1 || spec.num_classes < 1) {
    throw InvalidInput("synthetic_bench: all counts must be at least 1");
  }
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  Dataset data;
  data.dim = spec.dim;
  for (std::size_t c = 0; c < spec.num_classes; ++c) data.class_names.push_back(std::to_string(c));
  const auto n = static_cast<Eigen::Index>(spec.set_cardinality);
  const auto d = static_cast<Eigen::Index>(spec.dim);
  for (std::size_t i = 0; i < spec.examples; ++i) {
    const std::size_t c = i % spec.num_classes;
    Eigen::MatrixXd rows(n, d);
    for (Eigen::Index r = 0; r < n; ++r) {
      for (Eigen::Index k = 0; k < d; ++k) rows(r, k) = normal(rng);
    }
    rows.col(0).array() += static_cast<double>(c) * spec.mean_shift;
    data.examples.push_back({VectorSet(std::move(rows)), c, "bench-" + std::to_string(i)});
  }
  return data;
}

}  // namespace repset
