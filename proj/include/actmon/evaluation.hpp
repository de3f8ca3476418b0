#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "actmon/monitor.hpp"

namespace actmon {

/// Out-of-pattern statistics of one monitor on a labelled evaluation set.
/// Records whose predicted class has no zone are counted in n_nozone only.
struct GammaRow {
  std::size_t gamma = 0;
  std::size_t n_total = 0;  ///< records with a zone for their predicted class
  std::size_t n_out = 0;
  double out_rate = 0.0;
  std::size_t n_out_misclassified = 0;
  /// n_out_misclassified / n_out; empty when n_out == 0.
  std::optional<double> misclassified_within_out_rate;
  /// Over every evaluation record, NoZone ones included.
  double overall_misclassification_rate = 0.0;
  std::size_t n_nozone = 0;
};

using GammaReport = std::vector<GammaRow>;

GammaRow evaluate(const Monitor& monitor, std::span<const TraceRecord> eval);

/// Builds the gamma = 0 zones once and enlarges step by step, evaluating at
/// each requested gamma. `gammas` must be ascending.
GammaReport gamma_sweep(std::span<const TraceRecord> train, std::span<const TraceRecord> eval,
                        const NeuronSelection& selection, std::span<const std::size_t> gammas,
                        std::span<const ClassId> classes, const BuildOptions& options = {});
GammaReport gamma_sweep(std::span<const TraceRecord> train, std::span<const TraceRecord> eval,
                        const std::map<ClassId, NeuronSelection>& selections,
                        std::span<const std::size_t> gammas, const BuildOptions& options = {});

struct GammaChoice {
  std::size_t gamma = 0;
  bool qualified = false;
};

/// Smallest gamma whose warnings are precise enough and rare enough. If no
/// row qualifies, falls back to the row with the highest precision.
GammaChoice choose_gamma(const GammaReport& report, double min_precision = 0.3,
                         double max_out_rate = 0.05);

std::string report_csv(const GammaReport& report);

}  // namespace actmon
