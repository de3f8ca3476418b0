#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "actmon/error.hpp"
#include "actmon/pattern.hpp"
#include "actmon/scoring.hpp"
#include "nn_oracle.hpp"
#include "oracle.hpp"

using actmon::NeuronSelection;
using actmon::Pattern;

TEST_CASE("pattern strings and ordering") {
  const Pattern p = Pattern::from_string("001");
  CHECK(p.width() == 3);
  CHECK_FALSE(p[0]);
  CHECK(p[2]);
  CHECK(p.to_string() == "001");
  CHECK(Pattern::from_string("001") < Pattern::from_string("010"));
  CHECK(Pattern::from_string("011") < Pattern::from_string("100"));
  CHECK_THROWS_AS(Pattern(0), actmon::InvalidArgument);
  CHECK_THROWS_AS(Pattern::from_string("01x"), actmon::InvalidArgument);

  // Ordering across a word boundary still follows the string form.
  std::mt19937_64 rng(3);
  for (int i = 0; i < 200; ++i) {
    const auto a = oracle::random_pattern(rng, 100);
    const auto b = oracle::random_pattern(rng, 100);
    CHECK((a < b) == (a.to_string() < b.to_string()));
  }
}

TEST_CASE("binarize") {
  const double v1[] = {0.5, 0.0, -3.1};
  CHECK(actmon::binarize(v1, NeuronSelection::identity(0, 3)).to_string() == "100");

  const double v2[] = {0.0, 0.0};
  CHECK(actmon::binarize(v2, NeuronSelection::identity(0, 2)).to_string() == "00");

  NeuronSelection sel;
  sel.layer_width = 4;
  sel.indices = {3, 0};
  const double v3[] = {1.0, -1.0, 2.0, 3.0};
  CHECK(actmon::binarize(v3, sel).to_string() == "11");

  const double short_v[] = {1.0};
  CHECK_THROWS_AS(actmon::binarize(short_v, sel), actmon::InvalidArgument);
  const double nan_v[] = {1.0, NAN, 0.0, 1.0};
  CHECK_THROWS_AS(actmon::binarize(nan_v, NeuronSelection::identity(0, 4)), actmon::InvalidArgument);
}

TEST_CASE("property: binarize is invariant under positive scaling") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::uniform_real_distribution<double> scale(1e-3, 1e3);
  const auto sel = NeuronSelection::identity(0, 30);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> v(30);
    for (auto& x : v) x = (rng() % 5 == 0) ? 0.0 : u(rng);
    const double a = scale(rng);
    std::vector<double> w(v);
    for (auto& x : w) x *= a;
    CHECK(actmon::binarize(v, sel) == actmon::binarize(w, sel));
  }
}

TEST_CASE("hamming") {
  CHECK(actmon::hamming(Pattern::from_string("001"), Pattern::from_string("101")) == 1);
  const auto p = Pattern::from_string("0110");
  CHECK(actmon::hamming(p, p) == 0);
  CHECK(actmon::hamming(Pattern::from_string("000"), Pattern::from_string("111")) == 3);
  CHECK_THROWS_AS(actmon::hamming(Pattern(3), Pattern(4)), actmon::InvalidArgument);
}

TEST_CASE("property: hamming is a metric") {
  std::mt19937_64 rng(21);
  for (int t = 0; t < 500; ++t) {
    const std::size_t n = 1 + rng() % 150;
    const auto a = oracle::random_pattern(rng, n);
    const auto b = oracle::random_pattern(rng, n);
    const auto c = oracle::random_pattern(rng, n);
    std::size_t naive = 0;
    for (std::size_t i = 0; i < n; ++i) naive += a[i] != b[i];
    CHECK(actmon::hamming(a, b) == naive);
    CHECK(actmon::hamming(a, b) == actmon::hamming(b, a));
    CHECK((actmon::hamming(a, b) == 0) == (a == b));
    CHECK(actmon::hamming(a, c) <= actmon::hamming(a, b) + actmon::hamming(b, c));
  }
}

TEST_CASE("select_top_fraction") {
  std::vector<double> scores(84);
  for (std::size_t i = 0; i < scores.size(); ++i) scores[i] = static_cast<double>((i * 37) % 84);
  CHECK(actmon::select_top_fraction(scores, 0.25).size() == 21);

  const std::vector<double> s3{0.9, 0.1, 0.5};
  auto sel = actmon::select_top_fraction(s3, 2.0 / 3.0);
  CHECK(sel.indices == std::vector<std::size_t>{0, 2});
  CHECK(sel.scores == std::vector<double>{0.9, 0.5});

  const std::vector<double> flat(4, 1.0);
  CHECK(actmon::select_top_fraction(flat, 0.5).indices == std::vector<std::size_t>{0, 1});

  CHECK(actmon::select_top_fraction(s3, 0.01).size() == 1);
  CHECK(actmon::select_top_fraction(s3, 1.0).indices == std::vector<std::size_t>{0, 2, 1});
  CHECK_THROWS_AS(actmon::select_top_fraction(s3, 0.0), actmon::InvalidArgument);
  CHECK_THROWS_AS(actmon::select_top_fraction(s3, 1.5), actmon::InvalidArgument);
  CHECK_THROWS_AS(actmon::select_top_fraction(std::vector<double>{}, 0.5), actmon::InvalidArgument);
}

TEST_CASE("property: selection is deterministic and ordered") {
  std::mt19937_64 rng(4);
  for (int t = 0; t < 100; ++t) {
    std::vector<double> s(1 + rng() % 60);
    for (auto& x : s) x = static_cast<double>(rng() % 7);
    const double f = 0.05 + 0.95 * static_cast<double>(rng() % 1000) / 1000.0;
    const auto a = actmon::select_top_fraction(s, f);
    CHECK(a == actmon::select_top_fraction(s, f));
    a.validate();
    for (std::size_t i = 1; i < a.size(); ++i) {
      const bool ordered = s[a.indices[i - 1]] > s[a.indices[i]] ||
                           (s[a.indices[i - 1]] == s[a.indices[i]] && a.indices[i - 1] < a.indices[i]);
      CHECK(ordered);
    }
  }
}

TEST_CASE("selection validation") {
  NeuronSelection s;
  s.layer_width = 4;
  s.indices = {1, 1};
  CHECK_THROWS_AS(s.validate(), actmon::InvalidArgument);
  s.indices = {4};
  CHECK_THROWS_AS(s.validate(), actmon::InvalidArgument);
  s.indices = {};
  CHECK_THROWS_AS(s.validate(), actmon::InvalidArgument);
  s.indices = {0, 1, 2};
  CHECK_THROWS_AS(s.validate(2), actmon::InvalidArgument);
}

namespace {

actmon::TraceRecord record(actmon::ClassId t, actmon::ClassId p, std::vector<double> a) {
  return {"r", t, p, std::move(a)};
}

}  // namespace

TEST_CASE("score_neurons on the penultimate layer is the output weight magnitude") {
  std::mt19937_64 rng(17);
  const auto net = oracle::random_net(rng, {3, 6, 5, 4});
  std::vector<actmon::TraceRecord> samples;
  std::uniform_real_distribution<double> u(0.0, 3.0);
  for (int k = 0; k < 10; ++k) {
    std::vector<double> a(5);
    for (auto& x : a) x = u(rng);
    samples.push_back(record(2, 2, a));
  }
  const auto scores = actmon::score_neurons(net, samples, 1, 2);
  for (Eigen::Index i = 0; i < 5; ++i) {
    CHECK(scores[static_cast<std::size_t>(i)] == std::fabs(net.layers[2].weights(i, 2)));
  }
}

TEST_CASE("score_neurons on a unit chain") {
  actmon::ModelSpec net;
  net.layers.push_back({Eigen::MatrixXd::Ones(1, 1), Eigen::VectorXd::Zero(1), actmon::Activation::kRelu});
  net.layers.push_back({Eigen::MatrixXd::Ones(1, 1), Eigen::VectorXd::Zero(1), actmon::Activation::kRelu});
  Eigen::MatrixXd out(1, 2);
  out << 1.0, -1.0;
  net.layers.push_back({out, Eigen::VectorXd::Zero(2), actmon::Activation::kNone});
  const std::vector<actmon::TraceRecord> s{record(0, 0, {2.0})};
  CHECK(actmon::score_neurons(net, s, 0, 0) == std::vector<double>{1.0});
}

TEST_CASE("score_neurons matches finite differences on a two-hidden-layer net") {
  std::mt19937_64 rng(23);
  const auto net = oracle::random_net(rng, {4, 8, 6, 3});
  std::uniform_real_distribution<double> u(0.05, 2.0);
  int checked = 0;
  while (checked < 20) {
    std::vector<double> a(8);
    for (auto& x : a) x = u(rng);
    if (oracle::kink_margin(net, 1, {a.begin(), a.end()}) < 1e-3) continue;
    const std::vector<actmon::TraceRecord> s{record(1, 1, a)};
    const auto scores = actmon::score_neurons(net, s, 0, 1);
    const auto fd = oracle::finite_difference(net, 1, a, 1);
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(scores[i] == doctest::Approx(std::fabs(fd[i])).epsilon(1e-4).scale(1e-8));
    }
    ++checked;
  }
}

TEST_CASE("score_neurons aggregation rule") {
  actmon::ModelSpec net;
  Eigen::MatrixXd w1(1, 1);
  w1 << 1.0;
  net.layers.push_back({w1, Eigen::VectorXd::Zero(1), actmon::Activation::kRelu});
  Eigen::MatrixXd w2(1, 1);
  w2 << 2.0;
  net.layers.push_back({w2, Eigen::VectorXd::Constant(1, -1.0), actmon::Activation::kRelu});
  Eigen::MatrixXd w3(1, 2);
  w3 << 3.0, -3.0;
  net.layers.push_back({w3, Eigen::VectorXd::Zero(2), actmon::Activation::kNone});
  // Gradient through the middle ReLU is 6 when 2a - 1 > 0, else 0.
  const std::vector<actmon::TraceRecord> mixed{record(0, 0, {1.0}), record(0, 1, {0.1}),
                                               record(1, 1, {0.1})};
  CHECK(actmon::score_neurons(net, mixed, 0, 0) == std::vector<double>{6.0});
  // No correct sample of class 0: fall back to every class-0 sample.
  const std::vector<actmon::TraceRecord> wrong{record(0, 1, {1.0}), record(0, 1, {0.1})};
  CHECK(actmon::score_neurons(net, wrong, 0, 0) == std::vector<double>{3.0});
  CHECK_THROWS_AS(actmon::score_neurons(net, wrong, 0, 1), actmon::InvalidArgument);
  CHECK_THROWS_AS(actmon::mean_abs_gradient(net, {}, 0, 0), actmon::InvalidArgument);
  CHECK_THROWS_AS(actmon::score_neurons(net, mixed, 2, 0), actmon::InvalidArgument);
}
