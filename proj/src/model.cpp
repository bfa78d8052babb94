#include "repset/model.hpp"

#include "repset/errors.hpp"

namespace repset {
namespace {

std::span<double> view(Eigen::MatrixXd& m) {
  return {m.data(), static_cast<std::size_t>(m.size())};
}
std::span<double> view(Eigen::VectorXd& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

}  // namespace

void Model::check_shapes() const {
  const std::size_t m = hidden.count();
  std::size_t head_in = m;
  if (dense) {
    if (static_cast<std::size_t>(dense->weights.cols()) != m ||
        dense->weights.rows() != dense->bias.size()) {
      throw InvalidInput("dense layer shape does not match the number of hidden sets");
    }
    head_in = static_cast<std::size_t>(dense->weights.rows());
  }
  if (head.features() != head_in || head.weights.rows() != head.bias.size()) {
    throw InvalidInput("classifier head shape does not match its input");
  }
}

ModelGradients ModelGradients::zeros_like(const Model& model) {
  ModelGradients g;
  for (const auto& h : model.hidden.matrices()) {
    g.hidden.push_back(Eigen::MatrixXd::Zero(h.rows(), h.cols()));
  }
  if (model.dense) {
    g.dense_weights = Eigen::MatrixXd::Zero(model.dense->weights.rows(), model.dense->weights.cols());
    g.dense_bias = Eigen::VectorXd::Zero(model.dense->bias.size());
  }
  g.head_weights = Eigen::MatrixXd::Zero(model.head.weights.rows(), model.head.weights.cols());
  g.head_bias = Eigen::VectorXd::Zero(model.head.bias.size());
  return g;
}

ModelGradients& ModelGradients::operator+=(const ModelGradients& other) {
  for (std::size_t k = 0; k < hidden.size(); ++k) hidden[k] += other.hidden[k];
  if (dense_weights.size() > 0) {
    dense_weights += other.dense_weights;
    dense_bias += other.dense_bias;
  }
  head_weights += other.head_weights;
  head_bias += other.head_bias;
  return *this;
}

bool ModelGradients::all_finite() const {
  for (const auto& h : hidden) {
    if (!h.allFinite()) return false;
  }
  return dense_weights.allFinite() && dense_bias.allFinite() && head_weights.allFinite() &&
         head_bias.allFinite();
}

VectorSet normalize_rows(const VectorSet& x) {
  Eigen::MatrixXd v = x.matrix();
  for (Eigen::Index i = 0; i < v.rows(); ++i) {
    const double norm = v.row(i).norm();
    if (norm > 0.0) v.row(i) /= norm;
  }
  return VectorSet(std::move(v));
}

ForwardPass forward(const Model& model, const VectorSet& x, std::optional<std::size_t> label) {
  if (x.dim() != model.dim()) {
    throw InvalidInput("dimension mismatch: input has d=" + std::to_string(x.dim()) +
                       ", model expects d=" + std::to_string(model.dim()));
  }
  ForwardPass pass;
  pass.input = model.normalize_inputs ? normalize_rows(x) : x;
  pass.embedding = layer_forward(pass.input, model.hidden, model.mode);
  pass.features = model.dense ? model.dense->forward(pass.embedding.values) : pass.embedding.values;
  pass.record = predict(pass.features, model.head, label);
  return pass;
}

void accumulate_backward(const Model& model, const ForwardPass& pass, ModelGradients& grads) {
  const HeadGradients head = backward_head(pass.features, model.head, pass.record);
  grads.head_weights += head.weights;
  grads.head_bias += head.bias;

  Eigen::VectorXd upstream = head.input;
  if (model.dense) {
    const DenseGradients dense =
        backward_dense(*model.dense, pass.embedding.values, pass.features, upstream);
    grads.dense_weights += dense.weights;
    grads.dense_bias += dense.bias;
    upstream = dense.input;
  }

  const LayerGradients layer = layer_backward(pass.input, model.hidden, pass.embedding, upstream);
  for (std::size_t k = 0; k < grads.hidden.size(); ++k) grads.hidden[k] += layer.per_hidden[k];
}

std::vector<std::span<double>> parameter_views(Model& model) {
  std::vector<std::span<double>> out;
  for (auto& h : model.hidden.matrices()) out.push_back(view(h));
  if (model.dense) {
    out.push_back(view(model.dense->weights));
    out.push_back(view(model.dense->bias));
  }
  out.push_back(view(model.head.weights));
  out.push_back(view(model.head.bias));
  return out;
}

std::vector<std::span<double>> gradient_views(ModelGradients& grads) {
  std::vector<std::span<double>> out;
  for (auto& h : grads.hidden) out.push_back(view(h));
  if (grads.dense_weights.size() > 0) {
    out.push_back(view(grads.dense_weights));
    out.push_back(view(grads.dense_bias));
  }
  out.push_back(view(grads.head_weights));
  out.push_back(view(grads.head_bias));
  return out;
}

}  // namespace repset
