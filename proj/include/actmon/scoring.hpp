#pragma once

#include <map>
#include <span>
#include <vector>

#include "actmon/network.hpp"
#include "actmon/pattern.hpp"
#include "actmon/trace.hpp"

namespace actmon {

/// Mean of |d output_cls / d f^(layer)_i| over `samples` (layer outputs).
std::vector<double> mean_abs_gradient(const ModelSpec& model,
                                      std::span<const TraceRecord> samples, std::size_t layer,
                                      ClassId cls);

/// Importance of each neuron of `layer` for class `cls`. Gradients are
/// averaged over correctly classified records of the class, or over all
/// records labelled `cls` if none was classified correctly.
std::vector<double> score_neurons(const ModelSpec& model, std::span<const TraceRecord> samples,
                                  std::size_t layer, ClassId cls);

/// score_neurons + select_top_fraction for each class.
std::map<ClassId, NeuronSelection> select_per_class(const ModelSpec& model,
                                                    std::span<const TraceRecord> samples,
                                                    std::size_t layer,
                                                    std::span<const ClassId> classes,
                                                    double fraction);

}  // namespace actmon
