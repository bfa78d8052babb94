#include "repset/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "repset/errors.hpp"

namespace repset {
namespace {

using nlohmann::json;

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(rows)}};
}

json vector_to_json(const Eigen::VectorXd& v) {
  json data = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) data.push_back(v(i));
  return {{"size", v.size()}, {"data", std::move(data)}};
}

Eigen::MatrixXd matrix_from_json(const json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const json& data = j.at("data");
  if (rows < 0 || cols < 0 || data.size() != static_cast<std::size_t>(rows)) {
    throw DataError("matrix row count does not match its 'rows' field");
  }
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const json& row = data[static_cast<std::size_t>(i)];
    if (row.size() != static_cast<std::size_t>(cols)) {
      throw DataError("matrix row length does not match its 'cols' field");
    }
    for (Eigen::Index k = 0; k < cols; ++k) m(i, k) = row[static_cast<std::size_t>(k)].get<double>();
  }
  return m;
}

Eigen::VectorXd vector_from_json(const json& j) {
  const auto size = j.at("size").get<Eigen::Index>();
  const json& data = j.at("data");
  if (size < 0 || data.size() != static_cast<std::size_t>(size)) {
    throw DataError("vector length does not match its 'size' field");
  }
  Eigen::VectorXd v(size);
  for (Eigen::Index i = 0; i < size; ++i) v(i) = data[static_cast<std::size_t>(i)].get<double>();
  return v;
}

json config_to_json(const TrainConfig& c) {
  return {{"m", c.m},
          {"cardinality", c.cardinality},
          {"mode", to_string(c.mode)},
          {"learning_rate", c.learning_rate},
          {"epochs", c.epochs},
          {"batch_size", c.batch_size},
          {"optimizer", to_string(c.optimizer)},
          {"seed", c.seed},
          {"val_fraction", c.val_fraction},
          {"patience", c.patience},
          {"normalize_inputs", c.normalize_inputs},
          {"hidden_fc", c.hidden_fc},
          {"hidden_units", c.hidden_units},
          {"threads", c.threads}};
}

TrainConfig config_from_json(const json& j) {
  TrainConfig c;
  c.m = j.at("m").get<std::size_t>();
  c.cardinality = j.at("cardinality").get<std::vector<std::size_t>>();
  c.mode = parse_match_mode(j.at("mode").get<std::string>());
  c.learning_rate = j.at("learning_rate").get<double>();
  c.epochs = j.at("epochs").get<std::size_t>();
  c.batch_size = j.at("batch_size").get<std::size_t>();
  c.optimizer = parse_optimizer(j.at("optimizer").get<std::string>());
  c.seed = j.at("seed").get<std::uint64_t>();
  c.val_fraction = j.at("val_fraction").get<double>();
  c.patience = j.at("patience").get<std::size_t>();
  c.normalize_inputs = j.at("normalize_inputs").get<bool>();
  c.hidden_fc = j.at("hidden_fc").get<bool>();
  c.hidden_units = j.value("hidden_units", c.hidden_units);
  c.threads = j.value("threads", c.threads);
  return c;
}

}  // namespace

std::string checkpoint_to_string(const Checkpoint& ckpt) {
  const Model& model = ckpt.model;
  json hidden = json::array();
  for (const auto& h : model.hidden.matrices()) hidden.push_back(matrix_to_json(h));

  json doc;
  doc["format_version"] = ckpt.format_version;
  doc["config"] = config_to_json(ckpt.config);
  doc["dim"] = model.dim();
  doc["num_classes"] = model.num_classes();
  doc["class_names"] = ckpt.class_names;
  doc["epoch"] = ckpt.epoch;
  doc["best_val_accuracy"] = ckpt.best_val_accuracy;
  doc["mode"] = to_string(model.mode);
  doc["normalize_inputs"] = model.normalize_inputs;
  doc["hidden_sets"] = std::move(hidden);
  doc["dense"] = model.dense ? json{{"weights", matrix_to_json(model.dense->weights)},
                                   {"bias", vector_to_json(model.dense->bias)}}
                             : json(nullptr);
  doc["head"] = {{"weights", matrix_to_json(model.head.weights)},
                 {"bias", vector_to_json(model.head.bias)}};
  return doc.dump(1) + "\n";
}

Checkpoint checkpoint_from_string(const std::string& text, const std::string& source) {
  try {
    const json doc = json::parse(text);
    Checkpoint ckpt;
    ckpt.format_version = doc.at("format_version").get<int>();
    if (ckpt.format_version != kCheckpointFormatVersion) {
      throw DataError(source + ": unsupported checkpoint format_version " +
                      std::to_string(ckpt.format_version));
    }
    ckpt.config = config_from_json(doc.at("config"));
    ckpt.class_names = doc.at("class_names").get<std::vector<std::string>>();
    ckpt.epoch = doc.at("epoch").get<std::size_t>();
    ckpt.best_val_accuracy = doc.at("best_val_accuracy").get<double>();

    std::vector<Eigen::MatrixXd> hidden;
    for (const auto& h : doc.at("hidden_sets")) hidden.push_back(matrix_from_json(h));
    ckpt.model.hidden = HiddenSets(std::move(hidden));
    ckpt.model.mode = parse_match_mode(doc.at("mode").get<std::string>());
    ckpt.model.normalize_inputs = doc.at("normalize_inputs").get<bool>();
    if (const json& dense = doc.at("dense"); !dense.is_null()) {
      ckpt.model.dense = DenseLayer{matrix_from_json(dense.at("weights")), vector_from_json(dense.at("bias"))};
    }
    ckpt.model.head = {matrix_from_json(doc.at("head").at("weights")),
                       vector_from_json(doc.at("head").at("bias"))};
    ckpt.model.check_shapes();

    if (doc.at("dim").get<std::size_t>() != ckpt.model.dim() ||
        doc.at("num_classes").get<std::size_t>() != ckpt.model.num_classes() ||
        ckpt.class_names.size() != ckpt.model.num_classes()) {
      throw DataError(source + ": declared shapes disagree with stored parameters");
    }
    return ckpt;
  } catch (const json::exception& e) {
    throw DataError(source + ": malformed checkpoint: " + e.what());
  } catch (const InvalidInput& e) {
    throw DataError(source + ": inconsistent checkpoint: " + e.what());
  }
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write checkpoint '" + path.string() + "'");
  out << checkpoint_to_string(ckpt);
  if (!out) throw DataError("write to '" + path.string() + "' failed");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open checkpoint '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return checkpoint_from_string(buf.str(), path.string());
}

}  // namespace repset
