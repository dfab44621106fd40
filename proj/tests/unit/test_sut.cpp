#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <numbers>
#include <numeric>
#include <vector>

#include "illumine/digit/mnist.hpp"
#include "illumine/road/features.hpp"
#include "illumine/road/geometry.hpp"
#include "illumine/sut/classifier.hpp"
#include "illumine/sut/driver.hpp"
#include "illumine/sut/external.hpp"
#include "illumine/sut/fitness.hpp"
#include "support.hpp"

using namespace illumine;
using namespace illumine::sut;
using road::Vec2;

namespace {

constexpr double kPi = std::numbers::pi;

std::array<double, 10> uniform() {
  std::array<double, 10> c;
  c.fill(0.1);
  return c;
}

// straight lead-in, a left turn of `radius` through `degrees`, straight lead-out
road::RoadGeometry turn_road(double radius, double degrees, double lead = 40.0) {
  std::vector<Vec2> pts;
  for (double x = 0.0; x < lead; x += 1.0) pts.push_back({x, 0.0});
  const double sweep = degrees * kPi / 180.0;
  const int n = static_cast<int>(std::ceil(sweep * radius / 0.5));
  for (int k = 0; k <= n; ++k) {
    const double a = -kPi / 2 + sweep * k / n;
    pts.push_back({lead + radius * std::cos(a), radius + radius * std::sin(a)});
  }
  const Vec2 end = pts.back();
  const double h = sweep;
  for (double s = 1.0; s <= lead; s += 1.0) pts.push_back({end.x + s * std::cos(h), end.y + s * std::sin(h)});
  return road::geometry_from_polyline(pts, 4.0, 1.0);
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

} // namespace

TEST(FitnessClassification, Examples) {
  auto c = uniform();
  EXPECT_EQ(fitness_classification(c, 5), 0.0);
  c.fill(0.0);
  c[5] = 0.6;
  c[6] = 0.3;
  c[0] = 0.1;
  EXPECT_NEAR(fitness_classification(c, 5), 0.3, 1e-15);
  c[5] = 0.4;
  c[6] = 0.5;
  EXPECT_NEAR(fitness_classification(c, 5), -0.1, 1e-15);
}

TEST(FitnessClassification, InvalidDistributions) {
  std::vector<double> nine(9, 1.0 / 9);
  EXPECT_THROW(fitness_classification(nine, 5), std::invalid_argument);
  auto c = uniform();
  c[0] = 0.2;
  EXPECT_THROW(fitness_classification(c, 5), std::invalid_argument);
  c = uniform();
  c[1] = std::nan("");
  EXPECT_THROW(fitness_classification(c, 5), std::invalid_argument);
  EXPECT_THROW(fitness_classification(uniform(), 10), std::invalid_argument);
}

TEST(FitnessClassification, NegativeIffArgmaxDiffers) {
  Rng rng(3);
  for (int i = 0; i < 2000; ++i) {
    std::array<double, 10> c;
    double sum = 0.0;
    for (double& v : c) sum += v = rng.uniform();
    for (double& v : c) v /= sum;
    const int label = static_cast<int>(rng.below(10));
    const auto argmax = std::max_element(c.begin(), c.end()) - c.begin();
    EXPECT_EQ(fitness_classification(c, label) < 0.0, argmax != label);
  }
}

TEST(Classifier, SoftmaxSumsToOne) {
  Mlp<float> net;
  Rng rng(1);
  net.initialise(rng);
  for (int i = 0; i < 50; ++i) {
    digit::RasterDigit r;
    for (auto& p : r.pixels) p = static_cast<std::uint8_t>(rng.below(256));
    const auto p = net.predict(r);
    EXPECT_NEAR(std::accumulate(p.begin(), p.end(), 0.0), 1.0, 1e-6);
    for (double v : p) EXPECT_GE(v, 0.0);
  }
}

TEST(Classifier, GradientMatchesCentralDifferences) {
  Mlp<double> net(16);
  Rng rng(7);
  net.initialise(rng);
  for (auto& b : net.b1()) b = rng.uniform(-0.1, 0.1);
  for (auto& b : net.b2()) b = rng.uniform(-0.1, 0.1);
  std::vector<double> x1(kInputs), x2(kInputs);
  for (auto& v : x1) v = rng.uniform();
  for (auto& v : x2) v = rng.uniform();
  const std::vector<const double*> batch{x1.data(), x2.data()};
  const std::vector<int> labels{3, 8};

  Mlp<double>::Gradients g;
  net.loss(batch, labels, &g);
  const double h = 1e-6;
  double worst = 0.0;
  auto check = [&](std::vector<double>& w, const std::vector<double>& grad, std::size_t stride) {
    for (std::size_t i = 0; i < w.size(); i += stride) {
      const double keep = w[i];
      w[i] = keep + h;
      const double up = net.loss(batch, labels);
      w[i] = keep - h;
      const double down = net.loss(batch, labels);
      w[i] = keep;
      const double numeric = (up - down) / (2 * h);
      const double scale = std::abs(numeric) + std::abs(grad[i]);
      if (scale < 1e-7) continue;
      worst = std::max(worst, std::abs(numeric - grad[i]) / scale);
    }
  };
  check(net.w1(), g.w1, 37);
  check(net.b1(), g.b1, 1);
  check(net.w2(), g.w2, 1);
  check(net.b2(), g.b2, 1);
  EXPECT_LT(worst, 1e-4);
}

TEST(Classifier, ModelJsonRoundTrip) {
  ClassifierModel m{Mlp<float>(8), {2, 0.05, 16, 9, 0.5}};
  Rng rng(2);
  m.net.initialise(rng);
  m.net.b2()[3] = -1.25f;
  const ClassifierModel back = model_from_json(model_to_json(m));
  EXPECT_EQ(back.net.w1(), m.net.w1());
  EXPECT_EQ(back.net.b2(), m.net.b2());
  EXPECT_EQ(back.info.seed, 9u);
  EXPECT_DOUBLE_EQ(back.info.test_accuracy, 0.5);
  auto j = model_to_json(m);
  j["weights"]["b1"] = model_io::pack({1.0f});
  EXPECT_THROW(model_from_json(j), std::runtime_error);
}

TEST(Classifier, TrainingIsDeterministicAndZeroEpochsIsChance) {
  const auto dir = support::mnist_dir();
  if (dir.empty() || !digit::mnist_available(dir)) GTEST_SKIP() << "MNIST not available";
  const auto m = digit::load_mnist(dir);
  const std::span<const digit::RasterDigit> train(m.train.images.data(), 3000);
  const std::span<const std::uint8_t> train_labels(m.train.labels.data(), 3000);
  TrainOptions opt;
  opt.epochs = 1;
  const auto a = train_classifier(train, train_labels, m.test.images, m.test.labels, opt);
  const auto b = train_classifier(train, train_labels, m.test.images, m.test.labels, opt);
  EXPECT_EQ(a.net.w1(), b.net.w1());
  EXPECT_EQ(a.net.w2(), b.net.w2());
  EXPECT_EQ(a.info.test_accuracy, b.info.test_accuracy);
  EXPECT_GT(a.info.test_accuracy, 0.7);

  opt.epochs = 0;
  const auto untrained = train_classifier(train, train_labels, m.test.images, m.test.labels, opt);
  EXPECT_NEAR(untrained.info.test_accuracy, 0.10, 0.03);
  EXPECT_TRUE(untrained.net.all_finite());
}

TEST(Driver, StraightRoadIsCentered) {
  const auto geo = road::geometry_from_polyline({{0, 0}, {50, 0}, {100, 0}, {150, 0}}, 4.0, 1.0);
  const auto resampled = road::geometry_from_polyline(road::resample(geo.center_line, 1.0), 4.0, 1.0);
  const SimulationTrace t = drive(resampled, {}, 1);
  EXPECT_TRUE(t.completed);
  EXPECT_LT(max_abs(t.lateral_distances), 0.2);
  EXPECT_LT(max_abs(t.steering_angles), 1e-6);
  EXPECT_GT(fitness_driving(t, 4.0), 1.8);
}

TEST(Driver, SharpTurnsGoOutOfBounds) {
  for (double radius : {4.0, 6.0, 8.0}) {
    const auto geo = turn_road(radius, 90.0);
    ASSERT_LE(road::feat_min_radius(geo), 8.1);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const SimulationTrace t = drive(geo, {}, seed);
      EXPECT_FALSE(t.completed) << radius;
      EXPECT_LT(fitness_driving(t, 4.0), 0.0) << radius;
    }
  }
}

TEST(Driver, GentleTurnsStayInLane) {
  const auto geo = turn_road(30.0, 90.0);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const SimulationTrace t = drive(geo, {}, seed);
    EXPECT_TRUE(t.completed);
    EXPECT_GT(fitness_driving(t, 4.0), 0.0);
  }
}

TEST(Driver, SameSeedSameTrace) {
  const auto geo = turn_road(12.0, 120.0);
  const SimulationTrace a = drive(geo, {}, 77), b = drive(geo, {}, 77);
  EXPECT_EQ(a.steering_angles, b.steering_angles);
  EXPECT_EQ(a.lateral_distances, b.lateral_distances);
  EXPECT_EQ(a.completed, b.completed);
  EXPECT_EQ(a.steering_angles.size(), a.lateral_distances.size());
}

TEST(Driver, ParamsJsonRoundTrip) {
  DriverParams p;
  p.steer_lag = 0.7;
  p.noise_gain = 0.25;
  EXPECT_EQ(driver_params_from_json(to_json(p)), p);
  EXPECT_EQ(driver_params_from_json(nlohmann::json::object()), DriverParams{});
}

TEST(DrivingFitness, Examples) {
  SimulationTrace t;
  t.lateral_distances = {0.0, 0.0, 0.0};
  t.steering_angles = {0.0, 0.0, 0.0};
  EXPECT_DOUBLE_EQ(fitness_driving(t, 4.0), 2.0);
  t.lateral_distances = {0.5, -2.5, 1.0};
  EXPECT_DOUBLE_EQ(fitness_driving(t, 4.0), -0.5);
  t.lateral_distances = {0.5, -1.0, 1.0};
  EXPECT_DOUBLE_EQ(fitness_driving(t, 4.0), 1.0);
  EXPECT_THROW(fitness_driving(SimulationTrace{}, 4.0), std::invalid_argument);
}

TEST(DrivingFitness, NegativeIffSomeStepOutOfLane) {
  Rng rng(4);
  for (int i = 0; i < 500; ++i) {
    SimulationTrace t;
    bool out = false;
    for (int k = 0; k < 20; ++k) {
      const double d = rng.uniform(-2.3, 2.3);
      out |= std::abs(d) > 2.0;
      t.lateral_distances.push_back(d);
      t.steering_angles.push_back(0.0);
    }
    EXPECT_EQ(fitness_driving(t, 4.0) < 0.0, out);
  }
}

TEST(BehaviourFeatures, StdSteering) {
  SimulationTrace t;
  t.steering_angles = {0.3, 0.3, 0.3, 0.3};
  t.lateral_distances.assign(4, 0.0);
  EXPECT_DOUBLE_EQ(feat_std_steering(t), 0.0);
  t.steering_angles = {-0.2, 0.2, -0.2, 0.2};
  EXPECT_NEAR(feat_std_steering(t), 0.2, 1e-15);

  Rng rng(9);
  t.steering_angles.clear();
  for (int k = 0; k < 1000; ++k) t.steering_angles.push_back(rng.normal(0.05, 0.3));
  t.lateral_distances.assign(1000, 0.0);
  const double n = 1000.0;
  double mean = 0.0;
  for (double v : t.steering_angles) mean += v;
  mean /= n;
  double ss = 0.0;
  for (double v : t.steering_angles) ss += (v - mean) * (v - mean);
  EXPECT_NEAR(feat_std_steering(t), std::sqrt(ss / n), 1e-12);
}

TEST(BehaviourFeatures, MeanLateralPosition) {
  SimulationTrace t;
  t.steering_angles.assign(3, 0.0);
  t.lateral_distances = {0.0, 0.0, 0.0};
  EXPECT_DOUBLE_EQ(feat_mean_lateral_position(t), 0.0);
  t.lateral_distances = {1.5, -1.5, 1.5};
  EXPECT_DOUBLE_EQ(feat_mean_lateral_position(t), 1.5);
  Rng rng(10);
  t.lateral_distances.clear();
  double sum = 0.0;
  for (int k = 0; k < 300; ++k) {
    t.lateral_distances.push_back(rng.uniform(-2, 2));
    sum += std::abs(t.lateral_distances.back());
  }
  t.steering_angles.assign(300, 0.0);
  EXPECT_NEAR(feat_mean_lateral_position(t), sum / 300, 1e-12);
}

TEST(ExternalSut, UniformStubGivesZeroFitness) {
  ExternalSut sut(support::stub_sut() + " uniform", std::chrono::seconds(10));
  const Confidences c = sut.classify(digit::RasterDigit{});
  EXPECT_EQ(fitness_classification(c, 5), 0.0);
  // several requests on one process keep their order
  for (int i = 0; i < 5; ++i) EXPECT_EQ(sut.classify(digit::RasterDigit{}), c);
  const SimulationTrace t = sut.drive({{{0, 0}, {25, 0}, {50, 0}, {75, 0}}, 4.0});
  EXPECT_EQ(t.steps(), 3u);
  EXPECT_TRUE(t.completed);
  EXPECT_DOUBLE_EQ(fitness_driving(t, 4.0), 2.0);
}

TEST(ExternalSut, NineConfidencesIsAProtocolError) {
  ExternalSut sut(support::stub_sut() + " nine", std::chrono::seconds(10));
  EXPECT_THROW(sut.classify(digit::RasterDigit{}), SutError);
}

TEST(ExternalSut, OutOfOrderResponseIsAProtocolError) {
  ExternalSut sut(support::stub_sut() + " reorder", std::chrono::seconds(10));
  EXPECT_THROW(sut.classify(digit::RasterDigit{}), SutError);
}

TEST(ExternalSut, GarbageIsAProtocolError) {
  ExternalSut sut(support::stub_sut() + " garbage", std::chrono::seconds(10));
  EXPECT_THROW(sut.classify(digit::RasterDigit{}), SutError);
}

TEST(ExternalSut, SilentProcessTimesOut) {
  ExternalSut sut(support::stub_sut() + " silent", std::chrono::milliseconds(200));
  const auto start = std::chrono::steady_clock::now();
  EXPECT_THROW(sut.classify(digit::RasterDigit{}), SutError);
  EXPECT_LT(std::chrono::steady_clock::now() - start, std::chrono::seconds(5));
}

TEST(ExternalSut, ExitingProcessIsAnErrorAndIsRelaunched) {
  ExternalSut sut(support::stub_sut() + " exit", std::chrono::seconds(10));
  EXPECT_THROW(sut.classify(digit::RasterDigit{}), SutError);
  EXPECT_THROW(sut.classify(digit::RasterDigit{}), SutError);
}

TEST(ExternalSut, MissingCommandFailsOnFirstRequest) {
  ExternalSut sut("/nonexistent/illumine-sut", std::chrono::seconds(10));
  EXPECT_THROW(sut.classify(digit::RasterDigit{}), SutError);
}

TEST(ExternalSut, ResponseParsers) {
  using nlohmann::json;
  EXPECT_THROW(ExternalSut::parse_confidences(json{{"confidences", {0.1, 0.2}}}), SutError);
  EXPECT_THROW(ExternalSut::parse_confidences(json{{"x", 1}}), SutError);
  std::vector<double> ten(10, 0.1);
  EXPECT_EQ(ExternalSut::parse_confidences(json{{"confidences", ten}})[9], 0.1);
  json trace = {{"steering", {0.0, 0.1}}, {"lateral", {0.0, 0.2}}, {"dt", 0.1}, {"completed", false}};
  EXPECT_EQ(ExternalSut::parse_trace(trace).steps(), 2u);
  trace["lateral"] = {0.0};
  EXPECT_THROW(ExternalSut::parse_trace(trace), SutError);
  trace["lateral"] = {0.0, 0.2};
  trace["completed"] = "yes";
  EXPECT_THROW(ExternalSut::parse_trace(trace), SutError);
}

TEST(ExternalSut, PoolOwnsOneProcessPerWorker) {
  ExternalSutPool pool(support::stub_sut() + " uniform", 3, std::chrono::seconds(10));
  ASSERT_EQ(pool.size(), 3u);
  for (std::size_t w = 0; w < 3; ++w) EXPECT_EQ(fitness_classification(pool.at(w).classify({}), 1), 0.0);
}
