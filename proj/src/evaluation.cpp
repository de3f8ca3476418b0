#include "actmon/evaluation.hpp"

#include <algorithm>
#include <cstdio>

#include "actmon/error.hpp"

namespace actmon {

GammaRow evaluate(const Monitor& monitor, std::span<const TraceRecord> eval) {
  if (eval.empty()) throw InvalidArgument("evaluate: empty evaluation set");
  GammaRow row;
  row.gamma = monitor.gamma();
  std::size_t misclassified = 0;
  for (const auto& r : eval) {
    const bool wrong = r.pred_label != r.true_label;
    if (wrong) ++misclassified;
    switch (monitor.query(r)) {
      case Verdict::kNoZone:
        ++row.n_nozone;
        break;
      case Verdict::kOutOfZone:
        ++row.n_total;
        ++row.n_out;
        if (wrong) ++row.n_out_misclassified;
        break;
      case Verdict::kInZone:
        ++row.n_total;
        break;
    }
  }
  row.out_rate = row.n_total ? static_cast<double>(row.n_out) / static_cast<double>(row.n_total) : 0.0;
  if (row.n_out) {
    row.misclassified_within_out_rate =
        static_cast<double>(row.n_out_misclassified) / static_cast<double>(row.n_out);
  }
  row.overall_misclassification_rate =
      static_cast<double>(misclassified) / static_cast<double>(eval.size());
  return row;
}

namespace {

GammaReport sweep(ZoneBuilder& builder, std::span<const TraceRecord> eval,
                  std::span<const std::size_t> gammas) {
  if (gammas.empty()) throw InvalidArgument("gamma_sweep: no gamma values");
  if (!std::is_sorted(gammas.begin(), gammas.end())) {
    throw InvalidArgument("gamma_sweep: gamma values must be ascending");
  }
  GammaReport report;
  for (std::size_t g : gammas) {
    while (builder.gamma() < g) builder.enlarge();
    report.push_back(evaluate(builder.snapshot(), eval));
  }
  return report;
}

}  // namespace

GammaReport gamma_sweep(std::span<const TraceRecord> train, std::span<const TraceRecord> eval,
                        const NeuronSelection& selection, std::span<const std::size_t> gammas,
                        std::span<const ClassId> classes, const BuildOptions& options) {
  ZoneBuilder builder(train, selection, classes, options);
  return sweep(builder, eval, gammas);
}

GammaReport gamma_sweep(std::span<const TraceRecord> train, std::span<const TraceRecord> eval,
                        const std::map<ClassId, NeuronSelection>& selections,
                        std::span<const std::size_t> gammas, const BuildOptions& options) {
  ZoneBuilder builder(train, selections, options);
  return sweep(builder, eval, gammas);
}

GammaChoice choose_gamma(const GammaReport& report, double min_precision, double max_out_rate) {
  if (report.empty()) throw InvalidArgument("choose_gamma: empty report");
  if (!(min_precision >= 0.0 && min_precision <= 1.0) ||
      !(max_out_rate > 0.0 && max_out_rate <= 1.0)) {
    throw InvalidArgument("choose_gamma: thresholds out of range");
  }
  const GammaRow* best = nullptr;
  for (const auto& row : report) {
    // A row without warnings has no precision; it only qualifies when
    // no precision is demanded.
    const double precision = row.misclassified_within_out_rate.value_or(0.0);
    const bool precise = row.misclassified_within_out_rate ? precision >= min_precision
                                                           : min_precision <= 0.0;
    if (precise && row.out_rate <= max_out_rate) {
      if (!best || row.gamma < best->gamma) best = &row;
    }
  }
  if (best) return {best->gamma, true};

  const GammaRow* fallback = &report.front();
  for (const auto& row : report) {
    const double p = row.misclassified_within_out_rate.value_or(-1.0);
    const double q = fallback->misclassified_within_out_rate.value_or(-1.0);
    if (p > q || (p == q && row.gamma < fallback->gamma)) fallback = &row;
  }
  return {fallback->gamma, false};
}

std::string report_csv(const GammaReport& report) {
  std::string out =
      "gamma,n_total,n_out,out_rate,n_out_misclassified,misclassified_within_out_rate,"
      "overall_misclassification_rate,n_nozone\n";
  char buf[256];
  for (const auto& r : report) {
    char precision[32] = "null";
    if (r.misclassified_within_out_rate) {
      std::snprintf(precision, sizeof precision, "%.6f", *r.misclassified_within_out_rate);
    }
    std::snprintf(buf, sizeof buf, "%zu,%zu,%zu,%.6f,%zu,%s,%.6f,%zu\n", r.gamma, r.n_total,
                  r.n_out, r.out_rate, r.n_out_misclassified, precision,
                  r.overall_misclassification_rate, r.n_nozone);
    out += buf;
  }
  return out;
}

}  // namespace actmon
