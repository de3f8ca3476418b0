#include "actmon/dataset.hpp"

#include <cmath>
#include <fstream>
#include <numbers>

#include <nlohmann/json.hpp>

#include "actmon/error.hpp"

namespace actmon {

double NormalSampler::uniform() {
  return static_cast<double>(rng_() >> 11) * 0x1.0p-53;
}

double NormalSampler::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = 0.0;
  do {
    u1 = uniform();
  } while (u1 <= 0.0);
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

LabeledData make_blobs(const BlobsConfig& config, std::uint64_t seed) {
  if (config.classes < 2 || config.per_class == 0 || config.dim < 2) {
    throw InvalidArgument("blobs need >= 2 classes, >= 1 sample per class and dim >= 2");
  }
  NormalSampler rng(seed);
  const std::size_t n = config.classes * config.per_class;
  LabeledData data;
  data.inputs.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(config.dim));
  data.labels.reserve(n);
  data.ids.reserve(n);

  // Interleave classes so any prefix is roughly balanced.
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t cls = i % config.classes;
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(cls) /
                         static_cast<double>(config.classes);
    const auto row = static_cast<Eigen::Index>(i);
    for (std::size_t d = 0; d < config.dim; ++d) {
      double centre = 0.0;
      if (d == 0) centre = config.radius * std::cos(angle);
      if (d == 1) centre = config.radius * std::sin(angle);
      data.inputs(row, static_cast<Eigen::Index>(d)) = centre + config.sigma * rng.normal();
    }
    data.inputs(row, 0) += config.shift_sigmas * config.sigma;
    data.labels.push_back(cls);
    data.ids.push_back("s" + std::to_string(i));
  }
  return data;
}

void save_dataset(const LabeledData& data, std::size_t classes, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  nlohmann::ordered_json header{{"format", "actmon-data"},
                                {"version", kDataFormatVersion},
                                {"dim", data.dim()},
                                {"classes", classes}};
  out << header.dump() << '\n';
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto row = data.inputs.row(static_cast<Eigen::Index>(i));
    nlohmann::ordered_json rec{{"id", data.ids.empty() ? "s" + std::to_string(i) : data.ids[i]},
                               {"label", data.labels[i]},
                               {"input", std::vector<double>(row.begin(), row.end())}};
    out << rec.dump() << '\n';
  }
  if (!out) throw IoError("failed writing " + path);
}

LabeledData load_dataset(const std::string& path, std::size_t* classes) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw MalformedError(path + ": missing header line");

  LabeledData data;
  std::size_t dim = 0;
  std::size_t n_classes = 0;
  std::vector<std::vector<double>> rows;
  try {
    const auto header = nlohmann::json::parse(line);
    if (header.value("format", "") != "actmon-data") {
      throw MalformedError(path + ": not an actmon-data file");
    }
    if (header.value("version", 0) != kDataFormatVersion) {
      throw VersionError(path + ": unsupported data version");
    }
    dim = header.at("dim").get<std::size_t>();
    n_classes = header.at("classes").get<std::size_t>();
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      const auto rec = nlohmann::json::parse(line);
      auto input = rec.at("input").get<std::vector<double>>();
      const auto label = rec.at("label").get<std::size_t>();
      if (input.size() != dim) {
        throw MalformedError(path + ":" + std::to_string(lineno) + ": input width mismatch");
      }
      if (label >= n_classes) {
        throw MalformedError(path + ":" + std::to_string(lineno) + ": label out of range");
      }
      rows.push_back(std::move(input));
      data.labels.push_back(label);
      data.ids.push_back(rec.at("id").get<std::string>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw MalformedError(path + ": " + e.what());
  }
  data.inputs.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t d = 0; d < dim; ++d) {
      data.inputs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d)) = rows[i][d];
    }
  }
  if (classes) *classes = n_classes;
  return data;
}

}  // namespace actmon
