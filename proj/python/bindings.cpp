#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "repset/assignment.hpp"
#include "repset/checkpoint.hpp"
#include "repset/data_io.hpp"
#include "repset/errors.hpp"
#include "repset/model.hpp"
#include "repset/repset_layer.hpp"
#include "repset/training.hpp"

namespace py = pybind11;
using namespace repset;

namespace {

Dataset make_dataset(const std::vector<Eigen::MatrixXd>& sets, const std::vector<std::optional<std::size_t>>& labels,
                     std::vector<std::string> class_names, std::optional<std::vector<std::string>> ids) {
  if (sets.empty()) throw InvalidInput("dataset needs at least one set");
  if (labels.size() != sets.size()) throw InvalidInput("labels and sets differ in length");
  if (ids && ids->size() != sets.size()) throw InvalidInput("ids and sets differ in length");
  Dataset d;
  d.class_names = std::move(class_names);
  d.dim = static_cast<std::size_t>(sets.front().cols());
  for (std::size_t i = 0; i < sets.size(); ++i) {
    if (static_cast<std::size_t>(sets[i].cols()) != d.dim) throw InvalidInput("sets differ in dimension");
    if (labels[i] && *labels[i] >= d.class_names.size()) throw InvalidInput("label out of range");
    d.examples.push_back({VectorSet(sets[i]), labels[i], ids ? (*ids)[i] : "set-" + std::to_string(i)});
  }
  return d;
}

py::dict metrics_dict(const EpochMetrics& m) {
  py::dict d;
  d["epoch"] = m.epoch;
  d["train_loss"] = m.train_loss;
  d["train_accuracy"] = m.train_accuracy;
  d["val_accuracy"] = m.val_accuracy;
  d["seconds"] = m.seconds;
  return d;
}

}  // namespace

PYBIND11_MODULE(_repset, mod) {
  mod.doc() = "Set classification through matching against trainable hidden sets";

  py::register_exception<DataError>(mod, "DataError", PyExc_ValueError);
  py::register_exception<NumericError>(mod, "NumericError", PyExc_ArithmeticError);

  py::enum_<MatchMode>(mod, "MatchMode")
      .value("EXACT", MatchMode::kExact)
      .value("RELAXED", MatchMode::kRelaxed);

  py::class_<Assignment>(mod, "Assignment")
      .def_readonly("pairs", &Assignment::pairs)
      .def_readonly("objective", &Assignment::objective)
      .def("indicator", &Assignment::indicator, py::arg("rows"), py::arg("cols"))
      .def("__repr__", [](const Assignment& a) {
        return "<Assignment objective=" + std::to_string(a.objective) + " pairs=" + std::to_string(a.pairs.size()) + ">";
      });

  mod.def("solve_exact", [](const Eigen::MatrixXd& w) { return solve_exact(WeightMatrix(w)); }, py::arg("weights"));
  mod.def("solve_relaxed", [](const Eigen::MatrixXd& w) { return solve_relaxed(WeightMatrix(w)); }, py::arg("weights"));
  mod.def("brute_force_oracle", [](const Eigen::MatrixXd& w) { return brute_force_oracle(WeightMatrix(w)); },
          py::arg("weights"));
  mod.def("score_matrix",
          [](const Eigen::MatrixXd& x, const Eigen::MatrixXd& hidden) { return score_matrix(VectorSet(x), hidden).entries(); },
          py::arg("vectors"), py::arg("hidden"), "ReLU(X H) for an n x d set and a d x c hidden set.");
  mod.def("layer_forward",
          [](const Eigen::MatrixXd& x, const std::vector<Eigen::MatrixXd>& hidden, MatchMode mode) {
            return layer_forward(VectorSet(x), HiddenSets(hidden), mode).values;
          },
          py::arg("vectors"), py::arg("hidden"), py::arg("mode") = MatchMode::kExact);

  py::class_<Dataset>(mod, "Dataset")
      .def(py::init(&make_dataset), py::arg("sets"), py::arg("labels"), py::arg("class_names"),
           py::arg("ids") = py::none())
      .def("__len__", &Dataset::size)
      .def_readonly("dim", &Dataset::dim)
      .def_readonly("class_names", &Dataset::class_names)
      .def_property_readonly("num_classes", &Dataset::num_classes)
      .def_property_readonly("sets", [](const Dataset& d) {
        std::vector<Eigen::MatrixXd> out;
        for (const auto& ex : d.examples) out.push_back(ex.set.matrix());
        return out;
      })
      .def_property_readonly("labels", [](const Dataset& d) {
        std::vector<std::optional<std::size_t>> out;
        for (const auto& ex : d.examples) out.push_back(ex.label);
        return out;
      })
      .def_property_readonly("ids", [](const Dataset& d) {
        std::vector<std::string> out;
        for (const auto& ex : d.examples) out.push_back(ex.id);
        return out;
      });

  mod.def("synthetic_toy", &synthetic_toy);
  mod.def(
      "synthetic_bench",
      [](std::size_t examples, std::size_t set_cardinality, std::size_t dim, std::size_t num_classes,
         std::uint64_t seed, double mean_shift) {
        return synthetic_bench({examples, set_cardinality, dim, num_classes, seed, mean_shift});
      },
      py::arg("examples") = 200, py::arg("set_cardinality") = 10, py::arg("dim") = 20, py::arg("num_classes") = 2,
      py::arg("seed") = 0, py::arg("mean_shift") = 1.0);
  mod.def(
      "load_set_file",
      [](const std::filesystem::path& path, bool require_labels) {
        SetFileOptions opts;
        opts.require_labels = require_labels;
        return load_set_file(path, opts);
      },
      py::arg("path"), py::arg("require_labels") = false);
  mod.def("write_set_file", &write_set_file, py::arg("dataset"), py::arg("path"));

  py::class_<TrainConfig>(mod, "TrainConfig")
      .def(py::init<>())
      .def_readwrite("m", &TrainConfig::m)
      .def_readwrite("cardinality", &TrainConfig::cardinality)
      .def_readwrite("mode", &TrainConfig::mode)
      .def_readwrite("learning_rate", &TrainConfig::learning_rate)
      .def_readwrite("epochs", &TrainConfig::epochs)
      .def_readwrite("batch_size", &TrainConfig::batch_size)
      .def_property(
          "optimizer", [](const TrainConfig& c) { return std::string(to_string(c.optimizer)); },
          [](TrainConfig& c, const std::string& s) { c.optimizer = parse_optimizer(s); })
      .def_readwrite("seed", &TrainConfig::seed)
      .def_readwrite("val_fraction", &TrainConfig::val_fraction)
      .def_readwrite("patience", &TrainConfig::patience)
      .def_readwrite("normalize_inputs", &TrainConfig::normalize_inputs)
      .def_readwrite("hidden_fc", &TrainConfig::hidden_fc)
      .def_readwrite("hidden_units", &TrainConfig::hidden_units)
      .def_readwrite("threads", &TrainConfig::threads)
      .def("validate", &TrainConfig::validate);

  py::class_<Model>(mod, "Model")
      .def_property_readonly("hidden_sets", [](const Model& m) { return m.hidden.matrices(); })
      .def_property_readonly("head_weights", [](const Model& m) { return m.head.weights; })
      .def_property_readonly("head_bias", [](const Model& m) { return m.head.bias; })
      .def_property_readonly("has_dense", [](const Model& m) { return m.dense.has_value(); })
      .def_readonly("mode", &Model::mode)
      .def_property_readonly("dim", &Model::dim)
      .def_property_readonly("num_classes", &Model::num_classes)
      .def(
          "predict_proba", [](const Model& m, const Eigen::MatrixXd& x) { return forward(m, VectorSet(x)).record.probs; },
          py::arg("vectors"))
      .def(
          "embed", [](const Model& m, const Eigen::MatrixXd& x) { return forward(m, VectorSet(x)).embedding.values; },
          py::arg("vectors"));

  py::class_<EvalResult>(mod, "EvalResult")
      .def_readonly("accuracy", &EvalResult::accuracy)
      .def_readonly("mean_loss", &EvalResult::mean_loss)
      .def_readonly("examples", &EvalResult::examples);

  py::class_<TrainResult>(mod, "TrainResult")
      .def_property_readonly("model", [](const TrainResult& r) { return r.best.model; })
      .def_property_readonly("epoch", [](const TrainResult& r) { return r.best.epoch; })
      .def_property_readonly("best_accuracy", [](const TrainResult& r) { return r.best.best_accuracy; })
      .def_property_readonly("log",
                             [](const TrainResult& r) {
                               py::list out;
                               for (const auto& m : r.log) out.append(metrics_dict(m));
                               return out;
                             })
      .def_readonly("train_indices", &TrainResult::train_indices)
      .def_readonly("val_indices", &TrainResult::val_indices);

  mod.def("train", &train, py::arg("dataset"), py::arg("config"), py::call_guard<py::gil_scoped_release>());
  mod.def(
      "evaluate", [](const Dataset& d, const Model& m, std::size_t threads) { return evaluate(d, m, {}, threads); },
      py::arg("dataset"), py::arg("model"), py::arg("threads") = 1);

  py::class_<Checkpoint>(mod, "Checkpoint")
      .def(py::init([](const TrainConfig& config, const Model& model, std::vector<std::string> class_names,
                       std::size_t epoch, double best_val_accuracy) {
             Checkpoint c;
             c.config = config;
             c.model = model;
             c.class_names = std::move(class_names);
             c.epoch = epoch;
             c.best_val_accuracy = best_val_accuracy;
             return c;
           }),
           py::arg("config"), py::arg("model"), py::arg("class_names"), py::arg("epoch") = 0,
           py::arg("best_val_accuracy") = 0.0)
      .def_readonly("config", &Checkpoint::config)
      .def_readonly("model", &Checkpoint::model)
      .def_readonly("class_names", &Checkpoint::class_names)
      .def_readonly("epoch", &Checkpoint::epoch)
      .def_readonly("best_val_accuracy", &Checkpoint::best_val_accuracy)
      .def("to_json", &checkpoint_to_string)
      .def_static("from_json", [](const std::string& text) { return checkpoint_from_string(text); });

  mod.def("save_checkpoint", &save_checkpoint, py::arg("checkpoint"), py::arg("path"));
  mod.def("load_checkpoint", &load_checkpoint, py::arg("path"));
}
