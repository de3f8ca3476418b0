#include "actmon/trace.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include <nlohmann/json.hpp>

namespace actmon {

TraceFile read_traces(std::istream& in, const std::string& source) {
  std::string line;
  if (!std::getline(in, line)) throw MalformedError(source + ": missing trace header");
  TraceFile tf;
  std::size_t lineno = 1;
  auto where = [&] { return source + ":" + std::to_string(lineno); };
  try {
    const auto header = nlohmann::json::parse(line);
    if (!header.is_object() || header.value("format", "") != "actmon-trace") {
      throw MalformedError(where() + ": not an actmon-trace header");
    }
    if (!header.contains("version") || header.at("version") != kTraceFormatVersion) {
      throw VersionError(where() + ": unsupported trace version");
    }
    tf.header.layer = header.at("layer").get<std::size_t>();
    tf.header.width = header.at("width").get<std::size_t>();
    tf.header.classes = header.at("classes").get<std::size_t>();
    if (tf.header.width == 0) throw MalformedError(where() + ": zero width");

    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      const auto j = nlohmann::json::parse(line);
      TraceRecord r;
      r.id = j.at("id").get<std::string>();
      r.true_label = j.at("true_label").get<ClassId>();
      r.pred_label = j.at("pred_label").get<ClassId>();
      r.activations = j.at("activations").get<std::vector<double>>();
      if (r.activations.size() != tf.header.width) {
        throw MalformedError(where() + ": activation width " +
                             std::to_string(r.activations.size()) + " != header width " +
                             std::to_string(tf.header.width));
      }
      if (r.true_label >= tf.header.classes || r.pred_label >= tf.header.classes) {
        throw MalformedError(where() + ": label out of range");
      }
      tf.records.push_back(std::move(r));
    }
  } catch (const nlohmann::json::exception& e) {
    throw MalformedError(where() + ": " + e.what());
  }
  return tf;
}

TraceFile read_traces(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return read_traces(in, path);
}

void write_traces(std::ostream& out, const TraceFile& traces) {
  nlohmann::ordered_json header{{"format", "actmon-trace"},
                                {"version", kTraceFormatVersion},
                                {"layer", traces.header.layer},
                                {"width", traces.header.width},
                                {"classes", traces.header.classes}};
  out << header.dump() << '\n';
  for (const auto& r : traces.records) {
    nlohmann::ordered_json j{{"id", r.id},
                             {"true_label", r.true_label},
                             {"pred_label", r.pred_label},
                             {"activations", r.activations}};
    out << j.dump() << '\n';
  }
}

void write_traces(const std::string& path, const TraceFile& traces) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  write_traces(out, traces);
  if (!out) throw IoError("failed writing " + path);
}

TraceFile extract_traces(const ModelSpec& model, const LabeledData& data, std::size_t layer,
                         std::size_t classes) {
  if (!model.is_relu(layer)) {
    throw InvalidArgument("layer " + std::to_string(layer) + " is not ReLU");
  }
  if (data.dim() != model.input_dim()) {
    throw InvalidArgument("data dimension does not match model input");
  }
  TraceFile tf;
  tf.header = {layer, static_cast<std::size_t>(model.width(layer)), classes};
  tf.records.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const Eigen::VectorXd x = data.inputs.row(static_cast<Eigen::Index>(i)).transpose();
    const auto trace = forward(model, x);
    TraceRecord r;
    r.id = data.ids.empty() ? "s" + std::to_string(i) : data.ids[i];
    r.true_label = data.labels[i];
    r.pred_label = decide(trace.back());
    r.activations.assign(trace[layer].begin(), trace[layer].end());
    tf.records.push_back(std::move(r));
  }
  return tf;
}

}  // namespace actmon
