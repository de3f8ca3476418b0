#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "actmon/bdd.hpp"
#include "actmon/network.hpp"

namespace actmon {

/// One sample as seen by the monitor: the monitored layer's output plus
/// ground-truth and predicted labels.
struct TraceRecord {
  std::string id;
  ClassId true_label = 0;
  ClassId pred_label = 0;
  std::vector<double> activations;

  bool correct() const noexcept { return true_label == pred_label; }
};

struct TraceHeader {
  std::size_t layer = 0;
  std::size_t width = 0;
  std::size_t classes = 0;
};

struct TraceFile {
  TraceHeader header;
  std::vector<TraceRecord> records;
};

inline constexpr int kTraceFormatVersion = 1;

/// JSON lines: `{"format":"actmon-trace","version":1,"layer":L,"width":W,
/// "classes":C}` followed by one record per line. Throws MalformedError or
/// VersionError on bad content.
TraceFile read_traces(std::istream& in, const std::string& source = "<stream>");
TraceFile read_traces(const std::string& path);
void write_traces(std::ostream& out, const TraceFile& traces);
void write_traces(const std::string& path, const TraceFile& traces);

/// Runs every sample through `model`, recording the output of ReLU layer
/// `layer` and the model's decision.
TraceFile extract_traces(const ModelSpec& model, const LabeledData& data, std::size_t layer,
                         std::size_t classes);

}  // namespace actmon
