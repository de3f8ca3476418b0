#include "actmon/scoring.hpp"

#include "actmon/error.hpp"

namespace actmon {

std::vector<double> mean_abs_gradient(const ModelSpec& model,
                                      std::span<const TraceRecord> samples, std::size_t layer,
                                      ClassId cls) {
  if (samples.empty()) throw InvalidArgument("score_neurons: empty sample set");
  if (!model.is_relu(layer)) {
    throw InvalidArgument("layer " + std::to_string(layer) + " is not ReLU");
  }
  // Running mean: stays bit-exact when every sample gives the same gradient,
  // as with a linear output layer.
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(model.width(layer));
  double k = 0.0;
  for (const auto& s : samples) {
    if (static_cast<Eigen::Index>(s.activations.size()) != model.width(layer)) {
      throw InvalidArgument("score_neurons: activation width does not match layer");
    }
    const Eigen::VectorXd a = Eigen::Map<const Eigen::VectorXd>(
        s.activations.data(), static_cast<Eigen::Index>(s.activations.size()));
    k += 1.0;
    mean += (gradient_from_layer(model, a, layer, cls).cwiseAbs() - mean) / k;
  }
  return {mean.begin(), mean.end()};
}

std::vector<double> score_neurons(const ModelSpec& model, std::span<const TraceRecord> samples,
                                  std::size_t layer, ClassId cls) {
  std::vector<TraceRecord> correct;
  std::vector<TraceRecord> labelled;
  for (const auto& s : samples) {
    if (s.true_label != cls) continue;
    labelled.push_back(s);
    if (s.pred_label == cls) correct.push_back(s);
  }
  if (labelled.empty()) {
    throw InvalidArgument("score_neurons: no samples of class " + std::to_string(cls));
  }
  return mean_abs_gradient(model, correct.empty() ? labelled : correct, layer, cls);
}

std::map<ClassId, NeuronSelection> select_per_class(const ModelSpec& model,
                                                    std::span<const TraceRecord> samples,
                                                    std::size_t layer,
                                                    std::span<const ClassId> classes,
                                                    double fraction) {
  std::map<ClassId, NeuronSelection> out;
  for (ClassId c : classes) {
    const auto scores = score_neurons(model, samples, layer, c);
    out.emplace(c, select_top_fraction(scores, fraction, layer));
  }
  return out;
}

}  // namespace actmon
