#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "actmon/error.hpp"

namespace actmon {

enum class Activation { kRelu, kNone };

template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Fully-connected layer. `weights` is d_in x d_out, so the layer computes
/// act(weights^T x + bias) and weights(i, j) connects input i to output j.
template <typename Scalar>
struct DenseLayer {
  Mat<Scalar> weights;
  Vec<Scalar> bias;
  Activation activation = Activation::kNone;

  Eigen::Index in_dim() const { return weights.rows(); }
  Eigen::Index out_dim() const { return weights.cols(); }
};

/// Hyperparameters of the run that produced a model.
struct TrainingRecord {
  std::uint64_t seed = 0;
  int epochs = 0;
  int batch_size = 0;
  double learning_rate = 0.0;
  double final_accuracy = 0.0;
};

template <typename Scalar>
struct Network {
  std::vector<DenseLayer<Scalar>> layers;
  std::optional<TrainingRecord> training;

  std::size_t depth() const { return layers.size(); }
  Eigen::Index input_dim() const { return layers.front().in_dim(); }
  Eigen::Index class_count() const { return layers.back().out_dim(); }
  Eigen::Index width(std::size_t layer) const { return layers.at(layer).out_dim(); }
  bool is_relu(std::size_t layer) const {
    return layer < layers.size() && layers[layer].activation == Activation::kRelu;
  }

  /// Throws InvalidArgument unless dimensions chain, C >= 2 and the final
  /// layer is linear.
  void validate() const {
    if (layers.empty()) throw InvalidArgument("model has no layers");
    for (std::size_t l = 0; l < layers.size(); ++l) {
      const auto& layer = layers[l];
      if (layer.weights.size() == 0) throw InvalidArgument("layer " + std::to_string(l) + " is empty");
      if (layer.bias.size() != layer.out_dim()) {
        throw InvalidArgument("layer " + std::to_string(l) + ": bias width mismatch");
      }
      if (l > 0 && layer.in_dim() != layers[l - 1].out_dim()) {
        throw InvalidArgument("layer " + std::to_string(l) + ": input width mismatch");
      }
    }
    if (class_count() < 2) throw InvalidArgument("model must have at least two classes");
    if (layers.back().activation != Activation::kNone) {
      throw InvalidArgument("final layer must be linear");
    }
  }

  template <typename Other>
  Network<Other> cast() const {
    Network<Other> out;
    out.training = training;
    for (const auto& l : layers) {
      out.layers.push_back({l.weights.template cast<Other>(), l.bias.template cast<Other>(),
                            l.activation});
    }
    return out;
  }
};

using ModelSpec = Network<double>;

/// Output of every layer, f^(1)..f^(L), for one input.
template <typename Scalar>
using LayerTrace = std::vector<Vec<Scalar>>;

template <typename Scalar>
Vec<Scalar> apply_layer(const DenseLayer<Scalar>& layer, const Vec<Scalar>& x) {
  Vec<Scalar> z = layer.weights.transpose() * x + layer.bias;
  if (layer.activation == Activation::kRelu) z = z.cwiseMax(Scalar(0));
  return z;
}

template <typename Scalar, typename Derived>
LayerTrace<Scalar> forward(const Network<Scalar>& net, const Eigen::MatrixBase<Derived>& expr) {
  const Vec<Scalar> input = expr;
  if (input.size() != net.input_dim()) {
    throw InvalidArgument("input width " + std::to_string(input.size()) + " != model input " +
                          std::to_string(net.input_dim()));
  }
  if (!input.allFinite()) throw NumericError("non-finite value in model input");
  LayerTrace<Scalar> trace;
  trace.reserve(net.depth());
  const Vec<Scalar>* x = &input;
  for (std::size_t l = 0; l < net.depth(); ++l) {
    trace.push_back(apply_layer(net.layers[l], *x));
    if (!trace.back().allFinite()) {
      throw NumericError("non-finite value in output of layer " + std::to_string(l));
    }
    x = &trace.back();
  }
  return trace;
}

/// Argmax with ties resolved to the lowest index.
template <typename Derived>
std::size_t decide(const Eigen::MatrixBase<Derived>& scores) {
  if (scores.size() == 0) throw InvalidArgument("decide: empty score vector");
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < scores.size(); ++i) {
    if (scores(i) > scores(best)) best = i;
  }
  return static_cast<std::size_t>(best);
}

inline std::size_t decide(std::span<const double> scores) {
  return decide(Eigen::Map<const Eigen::VectorXd>(scores.data(),
                                                  static_cast<Eigen::Index>(scores.size())));
}

/// d(output_c) / d(f^(layer)) given the post-activation output of `layer`.
/// Only layers after `layer` take part, so the layer's activations suffice.
/// ReLU derivative at exactly zero pre-activation is taken as 0.
template <typename Scalar, typename Derived>
Vec<Scalar> gradient_from_layer(const Network<Scalar>& net,
                                const Eigen::MatrixBase<Derived>& activations, std::size_t layer,
                                std::size_t cls) {
  if (!net.is_relu(layer)) {
    throw InvalidArgument("layer " + std::to_string(layer) + " is not ReLU");
  }
  if (cls >= static_cast<std::size_t>(net.class_count())) {
    throw InvalidArgument("class " + std::to_string(cls) + " out of range");
  }
  if (activations.size() != net.width(layer)) {
    throw InvalidArgument("activation width does not match layer " + std::to_string(layer));
  }

  // Forward through the downstream layers, keeping pre-activations.
  std::vector<Vec<Scalar>> pre;
  Vec<Scalar> x = activations;
  for (std::size_t l = layer + 1; l < net.depth(); ++l) {
    const auto& dl = net.layers[l];
    pre.push_back(dl.weights.transpose() * x + dl.bias);
    x = dl.activation == Activation::kRelu ? Vec<Scalar>(pre.back().cwiseMax(Scalar(0)))
                                           : pre.back();
  }

  Vec<Scalar> grad = Vec<Scalar>::Zero(net.class_count());
  grad(static_cast<Eigen::Index>(cls)) = Scalar(1);
  for (std::size_t l = net.depth(); l-- > layer + 1;) {
    const auto& dl = net.layers[l];
    if (dl.activation == Activation::kRelu) {
      const auto& z = pre[l - layer - 1];
      grad = (z.array() > Scalar(0)).select(grad.array(), Scalar(0)).matrix();
    }
    grad = dl.weights * grad;
  }
  return grad;
}

template <typename Scalar, typename Derived>
Vec<Scalar> layer_gradient(const Network<Scalar>& net, const Eigen::MatrixBase<Derived>& input,
                           std::size_t layer, std::size_t cls) {
  if (layer >= net.depth()) throw InvalidArgument("layer index out of range");
  auto trace = forward(net, input);
  return gradient_from_layer(net, trace[layer], layer, cls);
}

// --- training -------------------------------------------------------------

/// Row-per-sample inputs with integer labels.
struct LabeledData {
  Eigen::MatrixXd inputs;
  std::vector<std::size_t> labels;
  std::vector<std::string> ids;

  std::size_t size() const { return labels.size(); }
  Eigen::Index dim() const { return inputs.cols(); }
};

struct TrainConfig {
  std::vector<std::size_t> hidden{24, 12};
  std::uint64_t seed = 7;
  int epochs = 40;
  int batch_size = 32;
  double learning_rate = 0.05;
};

/// Minibatch SGD on softmax cross-entropy. Deterministic given the seed.
/// Throws NumericError if the loss becomes non-finite.
ModelSpec train_toy(const LabeledData& data, std::size_t class_count, const TrainConfig& config);

/// Fraction of samples whose decide(forward(x)) matches the label.
double accuracy(const ModelSpec& model, const LabeledData& data);

// --- model files ------------------------------------------------------------

inline constexpr int kModelFormatVersion = 1;

std::string model_to_json(const ModelSpec& model);
ModelSpec model_from_json(std::string_view text);
void save_model(const ModelSpec& model, const std::string& path);
ModelSpec load_model(const std::string& path);

}  // namespace actmon
