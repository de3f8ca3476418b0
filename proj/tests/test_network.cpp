#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "actmon/dataset.hpp"
#include "actmon/network.hpp"
#include "actmon/pattern.hpp"
#include "nn_oracle.hpp"

using actmon::Activation;
using actmon::ModelSpec;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

VectorXd vec(std::initializer_list<double> v) {
  VectorXd x(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double d : v) x(i++) = d;
  return x;
}

}  // namespace

TEST_CASE("forward") {
  ModelSpec id;
  id.layers.push_back({MatrixXd::Identity(2, 2), VectorXd::Zero(2), Activation::kRelu});
  CHECK(actmon::forward(id, vec({1, -1}))[0] == vec({1, 0}));

  ModelSpec stacked;
  stacked.layers.push_back({MatrixXd::Identity(1, 1), VectorXd::Zero(1), Activation::kRelu});
  stacked.layers.push_back({MatrixXd::Identity(1, 1), VectorXd::Zero(1), Activation::kRelu});
  CHECK(actmon::forward(stacked, vec({-5})).back() == vec({0}));

  ModelSpec lin;
  MatrixXd w(2, 2);
  w << 1, 2, 3, 4;
  lin.layers.push_back({w, VectorXd::Zero(2), Activation::kNone});
  CHECK(actmon::forward(lin, vec({1, 1}))[0] == vec({4, 6}));

  CHECK_THROWS_AS(actmon::forward(lin, vec({1})), actmon::InvalidArgument);
  CHECK_THROWS_AS(actmon::forward(lin, vec({1, NAN})), actmon::NumericError);

  ModelSpec blowup;
  blowup.layers.push_back({MatrixXd::Constant(1, 1, 1e308), VectorXd::Zero(1), Activation::kNone});
  blowup.layers.push_back({MatrixXd::Constant(1, 2, 1e308), VectorXd::Zero(2), Activation::kNone});
  try {
    actmon::forward(blowup, vec({1.0}));
    FAIL("expected NumericError");
  } catch (const actmon::NumericError& e) {
    CHECK(std::string(e.what()).find("layer 1") != std::string::npos);
  }
}

TEST_CASE("decide") {
  CHECK(actmon::decide(vec({0.1, 0.9, 0.3})) == 1);
  CHECK(actmon::decide(vec({0.5, 0.5})) == 0);
  CHECK(actmon::decide(vec({-1, -2})) == 0);
  const std::vector<double> s{0.0, 2.0, 2.0};
  CHECK(actmon::decide(std::span<const double>(s)) == 1);
}

TEST_CASE("property: decide is invariant under shifts and positive scaling") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-5, 5);
  for (int t = 0; t < 300; ++t) {
    VectorXd s(7);
    for (auto& x : s) x = std::round(u(rng));  // integer scores produce ties
    const double c = std::round(u(rng));
    const double a = 0.5 + std::fabs(u(rng));
    VectorXd shifted = s.array() + c;
    VectorXd scaled = s * a;
    CHECK(actmon::decide(shifted) == actmon::decide(s));
    CHECK(actmon::decide(scaled) == actmon::decide(s));
  }
}

TEST_CASE("layer_gradient") {
  std::mt19937_64 rng(5);
  const ModelSpec net = oracle::random_net(rng, {3, 5, 4, 3});

  SUBCASE("penultimate layer gives the output weights, independent of input") {
    for (int t = 0; t < 5; ++t) {
      VectorXd x = VectorXd::Random(3);
      for (std::size_t c = 0; c < 3; ++c) {
        const VectorXd g = actmon::layer_gradient(net, x, 1, c);
        CHECK(g == net.layers[2].weights.col(static_cast<Eigen::Index>(c)));
      }
    }
  }

  SUBCASE("zero weight column gives a zero gradient") {
    ModelSpec z = net;
    z.layers[2].weights.col(0).setZero();
    CHECK(actmon::layer_gradient(z, VectorXd::Ones(3), 1, 0).isZero(0.0));
  }

  SUBCASE("errors") {
    CHECK_THROWS_AS(actmon::layer_gradient(net, VectorXd::Ones(3), 2, 0), actmon::InvalidArgument);
    CHECK_THROWS_AS(actmon::layer_gradient(net, VectorXd::Ones(3), 1, 3), actmon::InvalidArgument);
    CHECK_THROWS_AS(actmon::layer_gradient(net, VectorXd::Ones(3), 7, 0), actmon::InvalidArgument);
  }
}

TEST_CASE("layer_gradient matches central finite differences") {
  std::mt19937_64 rng(31);
  int checked = 0;
  for (int attempt = 0; attempt < 400 && checked < 30; ++attempt) {
    const ModelSpec net = oracle::random_net(rng, {4, 7, 6, 5, 3});
    std::normal_distribution<double> nd;
    VectorXd x(4);
    for (auto& v : x) v = nd(rng);
    const auto trace = actmon::forward(net, x);
    const std::vector<double> a(trace[0].begin(), trace[0].end());
    std::vector<long double> la(a.begin(), a.end());
    // Perturbing a zero (clamped) activation is still valid input to the
    // downstream layers, so only downstream kinks matter.
    if (oracle::kink_margin(net, 1, la) < 1e-3) continue;
    const std::size_t cls = rng() % 3;
    const VectorXd g = actmon::layer_gradient(net, x, 0, cls);
    const auto fd = oracle::finite_difference(net, 1, a, cls);
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(g(static_cast<Eigen::Index>(i)) == doctest::Approx(fd[i]).epsilon(1e-4).scale(1e-8));
    }
    ++checked;
  }
  CHECK(checked == 30);
}

TEST_CASE("forward trace is consistent with binarize") {
  std::mt19937_64 rng(9);
  const ModelSpec net = oracle::random_net(rng, {3, 10, 8, 2});
  for (int t = 0; t < 50; ++t) {
    const VectorXd x = VectorXd::Random(3);
    const auto tr = actmon::forward(net, x);
    CHECK(actmon::forward(net, x)[1] == tr[1]);
    const std::vector<double> a(tr[1].begin(), tr[1].end());
    const auto p = actmon::binarize(a, actmon::NeuronSelection::identity(1, 8));
    for (std::size_t i = 0; i < 8; ++i) CHECK(p[i] == (a[i] > 0.0));
    CHECK((tr[1].array() >= 0).all());
  }
}

TEST_CASE("model validation") {
  ModelSpec m;
  CHECK_THROWS_AS(m.validate(), actmon::InvalidArgument);
  m.layers.push_back({MatrixXd::Ones(2, 3), VectorXd::Zero(3), Activation::kRelu});
  m.layers.push_back({MatrixXd::Ones(3, 2), VectorXd::Zero(2), Activation::kNone});
  CHECK_NOTHROW(m.validate());
  m.layers.back().activation = Activation::kRelu;
  CHECK_THROWS_AS(m.validate(), actmon::InvalidArgument);
  m.layers.back().activation = Activation::kNone;
  m.layers.back().weights = MatrixXd::Ones(4, 2);
  CHECK_THROWS_AS(m.validate(), actmon::InvalidArgument);
  m.layers.back().weights = MatrixXd::Ones(3, 1);
  m.layers.back().bias = VectorXd::Zero(1);
  CHECK_THROWS_AS(m.validate(), actmon::InvalidArgument);
}

TEST_CASE("train_toy reaches 90% on blobs and is deterministic") {
  actmon::BlobsConfig bc;
  const auto data = actmon::make_blobs(bc, 7);
  CHECK(data.size() == 1500);
  actmon::TrainConfig tc;
  tc.seed = 7;
  const ModelSpec a = actmon::train_toy(data, 3, tc);
  CHECK(actmon::accuracy(a, data) >= 0.90);
  CHECK(a.training->final_accuracy == actmon::accuracy(a, data));
  const ModelSpec b = actmon::train_toy(data, 3, tc);
  CHECK(actmon::model_to_json(a) == actmon::model_to_json(b));
  CHECK_NOTHROW(a.validate());
  CHECK(a.width(1) == 12);

  tc.epochs = 0;
  const ModelSpec untrained = actmon::train_toy(data, 3, tc);
  CHECK(actmon::accuracy(untrained, data) < 0.90);

  tc.epochs = 5;
  tc.learning_rate = 1e200;
  CHECK_THROWS_AS(actmon::train_toy(data, 3, tc), actmon::NumericError);
}

TEST_CASE("blobs are seed-deterministic and shiftable") {
  actmon::BlobsConfig bc;
  bc.per_class = 20;
  const auto a = actmon::make_blobs(bc, 3);
  CHECK(a.inputs == actmon::make_blobs(bc, 3).inputs);
  CHECK(a.inputs != actmon::make_blobs(bc, 4).inputs);
  bc.shift_sigmas = 2.0;
  const auto s = actmon::make_blobs(bc, 3);
  CHECK((s.inputs.col(0) - a.inputs.col(0)).isApproxToConstant(2.0));
  CHECK(s.inputs.col(1) == a.inputs.col(1));
}

TEST_CASE("model json round trip") {
  std::mt19937_64 rng(12);
  ModelSpec net = oracle::random_net(rng, {3, 4, 2});
  net.training = actmon::TrainingRecord{1, 2, 3, 0.1, 0.5};
  const std::string text = actmon::model_to_json(net);
  const ModelSpec back = actmon::model_from_json(text);
  CHECK(back.layers[0].weights == net.layers[0].weights);
  CHECK(back.layers[1].bias == net.layers[1].bias);
  CHECK(back.layers[0].activation == Activation::kRelu);
  CHECK(actmon::model_to_json(back) == text);

  CHECK_THROWS_AS(actmon::model_from_json(R"({"version":2,"layers":[]})"), actmon::VersionError);
  CHECK_THROWS_AS(actmon::model_from_json(R"({"version":1,"layers":[]})"), actmon::MalformedError);
  CHECK_THROWS_AS(actmon::model_from_json(R"({"version":1,"layers":[{"weights":[[1,2]],"bias":[0],"activation":"none"}]})"),
                  actmon::MalformedError);
  CHECK_THROWS_AS(actmon::model_from_json("{"), actmon::MalformedError);
  CHECK_THROWS_AS(actmon::load_model("/nonexistent/model.json"), actmon::IoError);
}

TEST_CASE("long double networks run through the same templates") {
  std::mt19937_64 rng(12);
  const ModelSpec net = oracle::random_net(rng, {3, 4, 4, 2});
  const auto wide = net.cast<long double>();
  const actmon::Vec<long double> x = actmon::Vec<long double>::Ones(3);
  const auto g = actmon::layer_gradient(wide, x, 1, 1);
  CHECK(g == wide.layers[2].weights.col(1));
  CHECK(actmon::decide(actmon::forward(wide, x).back()) ==
        actmon::decide(actmon::forward(net, VectorXd::Ones(3)).back()));
}
