#include "actmon/network.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "actmon/dataset.hpp"

namespace actmon {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

void shuffle(std::vector<std::size_t>& order, NormalSampler& rng) {
  for (std::size_t i = order.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.bits() % i);
    std::swap(order[i - 1], order[j]);
  }
}

}  // namespace

ModelSpec train_toy(const LabeledData& data, std::size_t class_count, const TrainConfig& config) {
  if (data.size() == 0) throw InvalidArgument("train_toy: empty dataset");
  if (class_count < 2) throw InvalidArgument("train_toy: need at least two classes");
  if (config.epochs < 0 || config.batch_size < 1 || !(config.learning_rate > 0.0)) {
    throw InvalidArgument("train_toy: invalid hyperparameters");
  }
  for (auto label : data.labels) {
    if (label >= class_count) throw InvalidArgument("train_toy: label out of range");
  }

  NormalSampler rng(config.seed);
  ModelSpec model;
  std::vector<std::size_t> dims{static_cast<std::size_t>(data.dim())};
  dims.insert(dims.end(), config.hidden.begin(), config.hidden.end());
  dims.push_back(class_count);
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const auto in = static_cast<Index>(dims[l]);
    const auto out = static_cast<Index>(dims[l + 1]);
    const double scale = std::sqrt(2.0 / static_cast<double>(in));
    DenseLayer<double> layer{MatrixXd(in, out), VectorXd::Zero(out),
                             l + 2 == dims.size() ? Activation::kNone : Activation::kRelu};
    for (Index i = 0; i < in; ++i) {
      for (Index j = 0; j < out; ++j) layer.weights(i, j) = scale * rng.normal();
    }
    model.layers.push_back(std::move(layer));
  }

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t depth = model.depth();

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    shuffle(order, rng);
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t stop =
          std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
      std::vector<MatrixXd> grad_w;
      std::vector<VectorXd> grad_b;
      for (const auto& l : model.layers) {
        grad_w.push_back(MatrixXd::Zero(l.in_dim(), l.out_dim()));
        grad_b.push_back(VectorXd::Zero(l.out_dim()));
      }
      double loss = 0.0;

      for (std::size_t s = start; s < stop; ++s) {
        const std::size_t idx = order[s];
        const VectorXd x = data.inputs.row(static_cast<Index>(idx)).transpose();
        std::vector<VectorXd> acts{x};
        std::vector<VectorXd> pre;
        for (const auto& l : model.layers) {
          pre.push_back(l.weights.transpose() * acts.back() + l.bias);
          acts.push_back(l.activation == Activation::kRelu ? VectorXd(pre.back().cwiseMax(0.0))
                                                           : pre.back());
        }
        // Softmax cross-entropy.
        const VectorXd& logits = acts.back();
        const double shift = logits.maxCoeff();
        VectorXd prob = (logits.array() - shift).exp();
        prob /= prob.sum();
        const auto label = static_cast<Index>(data.labels[idx]);
        loss -= std::log(std::max(prob(label), 1e-300));

        VectorXd delta = prob;
        delta(label) -= 1.0;
        for (std::size_t l = depth; l-- > 0;) {
          const auto& layer = model.layers[l];
          if (layer.activation == Activation::kRelu) {
            delta = (pre[l].array() > 0.0).select(delta.array(), 0.0).matrix();
          }
          grad_w[l].noalias() += acts[l] * delta.transpose();
          grad_b[l] += delta;
          if (l > 0) delta = layer.weights * delta;
        }
      }

      if (!std::isfinite(loss)) {
        throw NumericError("training diverged (non-finite loss) in epoch " +
                           std::to_string(epoch));
      }
      const double step = config.learning_rate / static_cast<double>(stop - start);
      for (std::size_t l = 0; l < depth; ++l) {
        model.layers[l].weights -= step * grad_w[l];
        model.layers[l].bias -= step * grad_b[l];
      }
    }
  }

  for (const auto& l : model.layers) {
    if (!l.weights.allFinite() || !l.bias.allFinite()) {
      throw NumericError("training diverged (non-finite weights)");
    }
  }
  model.training = TrainingRecord{config.seed, config.epochs, config.batch_size,
                                  config.learning_rate, accuracy(model, data)};
  return model;
}

double accuracy(const ModelSpec& model, const LabeledData& data) {
  if (data.size() == 0) return 0.0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const VectorXd x = data.inputs.row(static_cast<Index>(i)).transpose();
    if (decide(forward(model, x).back()) == data.labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

std::string model_to_json(const ModelSpec& model) {
  using ojson = nlohmann::ordered_json;
  ojson layers = ojson::array();
  for (const auto& l : model.layers) {
    ojson rows = ojson::array();
    for (Index i = 0; i < l.in_dim(); ++i) {
      const auto r = l.weights.row(i);
      rows.push_back(std::vector<double>(r.begin(), r.end()));
    }
    layers.push_back(ojson{{"weights", std::move(rows)},
                           {"bias", std::vector<double>(l.bias.begin(), l.bias.end())},
                           {"activation", l.activation == Activation::kRelu ? "relu" : "none"}});
  }
  ojson doc{{"version", kModelFormatVersion}, {"layers", std::move(layers)}};
  if (model.training) {
    const auto& t = *model.training;
    doc["training"] = ojson{{"optimizer", "minibatch-sgd"},
                            {"loss", "softmax-cross-entropy"},
                            {"seed", t.seed},
                            {"epochs", t.epochs},
                            {"batch_size", t.batch_size},
                            {"learning_rate", t.learning_rate},
                            {"train_accuracy", t.final_accuracy}};
  }
  return doc.dump() + "\n";
}

ModelSpec model_from_json(std::string_view text) {
  ModelSpec model;
  try {
    const auto doc = nlohmann::json::parse(text);
    if (!doc.is_object() || !doc.contains("version")) throw MalformedError("model: missing version");
    if (doc.at("version") != kModelFormatVersion) {
      throw VersionError("model: unsupported version " + doc.at("version").dump());
    }
    for (const auto& jl : doc.at("layers")) {
      const auto rows = jl.at("weights").get<std::vector<std::vector<double>>>();
      const auto bias = jl.at("bias").get<std::vector<double>>();
      const auto act = jl.at("activation").get<std::string>();
      if (act != "relu" && act != "none") throw MalformedError("model: unknown activation " + act);
      if (rows.empty() || rows.front().empty()) throw MalformedError("model: empty weight matrix");
      DenseLayer<double> layer;
      layer.weights.resize(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
      for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != rows.front().size()) throw MalformedError("model: ragged weights");
        for (std::size_t j = 0; j < rows[i].size(); ++j) {
          layer.weights(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
        }
      }
      layer.bias = Eigen::Map<const VectorXd>(bias.data(), static_cast<Index>(bias.size()));
      layer.activation = act == "relu" ? Activation::kRelu : Activation::kNone;
      model.layers.push_back(std::move(layer));
    }
    if (doc.contains("training")) {
      const auto& t = doc.at("training");
      model.training = TrainingRecord{t.at("seed").get<std::uint64_t>(), t.at("epochs").get<int>(),
                                      t.at("batch_size").get<int>(),
                                      t.at("learning_rate").get<double>(),
                                      t.at("train_accuracy").get<double>()};
    }
  } catch (const nlohmann::json::exception& e) {
    throw MalformedError(std::string("model: ") + e.what());
  }
  try {
    model.validate();
  } catch (const InvalidArgument& e) {
    throw MalformedError(std::string("model: ") + e.what());
  }
  return model;
}

void save_model(const ModelSpec& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << model_to_json(model);
  if (!out) throw IoError("failed writing " + path);
}

ModelSpec load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return model_from_json(buf.str());
}

}  // namespace actmon
