#pragma once

#include <cstdint>
#include <random>
#include <string>

#include "actmon/network.hpp"

namespace actmon {

/// Isotropic Gaussian blobs with centres evenly spaced on a circle in the
/// first two input coordinates.
struct BlobsConfig {
  std::size_t classes = 3;
  std::size_t per_class = 500;
  std::size_t dim = 2;
  double radius = 4.0;
  double sigma = 1.0;
  /// Translation of every sample along the first coordinate, in units of sigma.
  double shift_sigmas = 0.0;
};

LabeledData make_blobs(const BlobsConfig& config, std::uint64_t seed);

/// Standard normal draws from a 64-bit Mersenne twister via Box-Muller, so
/// the sequence does not depend on the standard library's distributions.
class NormalSampler {
 public:
  explicit NormalSampler(std::uint64_t seed) : rng_(seed) {}

  double uniform();  ///< in [0, 1)
  double normal();
  std::uint64_t bits() { return rng_(); }

 private:
  std::mt19937_64 rng_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

inline constexpr int kDataFormatVersion = 1;

/// JSON-lines dataset: a header `{"format":"actmon-data","version":1,
/// "dim":D,"classes":C}` then one `{"id":..,"label":..,"input":[..]}` per line.
void save_dataset(const LabeledData& data, std::size_t classes, const std::string& path);
LabeledData load_dataset(const std::string& path, std::size_t* classes = nullptr);

}  // namespace actmon
