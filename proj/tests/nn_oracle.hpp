#pragma once
// Test-only network helpers: a plain-loop evaluator and finite differences,
// kept separate from the Eigen code under test.

#include <cmath>
#include <random>
#include <vector>

#include "actmon/network.hpp"

namespace oracle {

/// Evaluates layers `first..L-1` on `x` with scalar loops in long double.
inline std::vector<long double> run_from(const actmon::ModelSpec& net, std::size_t first,
                                         std::vector<long double> x) {
  for (std::size_t l = first; l < net.depth(); ++l) {
    const auto& layer = net.layers[l];
    std::vector<long double> y(static_cast<std::size_t>(layer.out_dim()));
    for (Eigen::Index j = 0; j < layer.out_dim(); ++j) {
      long double s = layer.bias(j);
      for (Eigen::Index i = 0; i < layer.in_dim(); ++i) {
        s += static_cast<long double>(layer.weights(i, j)) * x[static_cast<std::size_t>(i)];
      }
      if (layer.activation == actmon::Activation::kRelu && s < 0) s = 0;
      y[static_cast<std::size_t>(j)] = s;
    }
    x = std::move(y);
  }
  return x;
}

/// Central differences of output `cls` w.r.t. the input of layer `first`.
inline std::vector<double> finite_difference(const actmon::ModelSpec& net, std::size_t first,
                                             const std::vector<double>& at, std::size_t cls,
                                             long double eps = 1e-4L) {
  std::vector<double> g(at.size());
  for (std::size_t i = 0; i < at.size(); ++i) {
    std::vector<long double> up(at.begin(), at.end());
    std::vector<long double> down(at.begin(), at.end());
    up[i] += eps;
    down[i] -= eps;
    const long double d = run_from(net, first, up)[cls] - run_from(net, first, down)[cls];
    g[i] = static_cast<double>(d / (2 * eps));
  }
  return g;
}

/// Smallest |pre-activation| over ReLU units in layers `first..L-1`, when
/// evaluated from `at`; used to stay clear of kinks.
inline long double kink_margin(const actmon::ModelSpec& net, std::size_t first,
                               std::vector<long double> x) {
  long double margin = INFINITY;
  for (std::size_t l = first; l < net.depth(); ++l) {
    const auto& layer = net.layers[l];
    std::vector<long double> y(static_cast<std::size_t>(layer.out_dim()));
    for (Eigen::Index j = 0; j < layer.out_dim(); ++j) {
      long double s = layer.bias(j);
      for (Eigen::Index i = 0; i < layer.in_dim(); ++i) {
        s += static_cast<long double>(layer.weights(i, j)) * x[static_cast<std::size_t>(i)];
      }
      if (layer.activation == actmon::Activation::kRelu) {
        margin = std::min(margin, std::fabs(s));
        if (s < 0) s = 0;
      }
      y[static_cast<std::size_t>(j)] = s;
    }
    x = std::move(y);
  }
  return margin;
}

inline actmon::ModelSpec random_net(std::mt19937_64& rng, const std::vector<std::size_t>& dims) {
  std::normal_distribution<double> nd(0.0, 1.0);
  actmon::ModelSpec net;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const auto in = static_cast<Eigen::Index>(dims[l]);
    const auto out = static_cast<Eigen::Index>(dims[l + 1]);
    actmon::DenseLayer<double> layer{Eigen::MatrixXd(in, out), Eigen::VectorXd(out),
                                     l + 2 == dims.size() ? actmon::Activation::kNone
                                                          : actmon::Activation::kRelu};
    for (Eigen::Index i = 0; i < in; ++i)
      for (Eigen::Index j = 0; j < out; ++j) layer.weights(i, j) = nd(rng) / std::sqrt(double(in));
    for (Eigen::Index j = 0; j < out; ++j) layer.bias(j) = 0.1 * nd(rng);
    net.layers.push_back(std::move(layer));
  }
  return net;
}

}  // namespace oracle
