#include <doctest.h>

#include <random>
#include <sstream>

#include "dal/document.hpp"
#include "dal/error.hpp"
#include "dal/evaluation.hpp"
#include "dal/local_models.hpp"
#include "support.hpp"

using namespace dal;
using namespace dal::testing;

namespace {

const std::vector<LocalModelSpec> kAllKinds{LocalModelSpec::linear(), LocalModelSpec::cart_local(),
                                            LocalModelSpec::regularized_net()};

}  // namespace

TEST_CASE("kind names") {
  CHECK(parse_local_model_kind("linear") == LocalModelKind::Linear);
  CHECK(parse_local_model_kind("cart") == LocalModelKind::CartLocal);
  CHECK(parse_local_model_kind("net") == LocalModelKind::RegularizedNet);
  CHECK_FALSE(parse_local_model_kind("svr"));
  for (const auto& spec : kAllKinds) CHECK(parse_local_model_kind(to_string(spec.kind)) == spec.kind);
}

TEST_CASE("min-max scaling round-trips") {
  const std::vector<double> v{3.5, -2.0, 17.25, 4.0};
  const MinMax mm = MinMax::of(v);
  for (double x : v) CHECK(std::abs(mm.unscale(mm.scale(x)) - x) <= 1e-12);
  const std::vector<double> flat{9.0, 9.0};
  CHECK(MinMax::of(flat).unscale(0.3) == 9.0);
}

TEST_CASE("linear recovers an exact line") {
  std::vector<Row> x;
  std::vector<double> y;
  for (int i = 1; i <= 8; ++i) {
    x.push_back({double(i)});
    y.push_back(3.0 + 2.0 * i);
  }
  const auto model = train_local(x, y, LocalModelSpec::linear(), 0);
  const auto coef = model.linear_coefficients();
  REQUIRE(coef);
  CHECK(std::abs(coef->intercept - 3.0) <= 1e-6);
  CHECK(std::abs(coef->weights[0] - 2.0) <= 1e-6);
  CHECK(std::abs(predict_local(model, Row{4.0}) - 11.0) <= 1e-9);
}

TEST_CASE("linear falls back to ridge on collinear options") {
  std::vector<Row> x;
  std::vector<double> y;
  for (int i = 1; i <= 6; ++i) {
    x.push_back({double(i), double(i), 1.0});
    y.push_back(10.0 + i);
  }
  const auto model = train_local(x, y, LocalModelSpec::linear(), 0);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(std::abs(predict_local(model, x[i]) - y[i]) < 1e-3);
}

TEST_CASE("cart_local reproduces its training targets") {
  const std::vector<Row> pair{{0.0, 1.0}, {1.0, 3.0}};
  const std::vector<double> targets{5.0, 8.0};
  const auto small = train_local(pair, targets, LocalModelSpec::cart_local(), 0);
  CHECK(predict_local(small, pair[0]) == 5.0);
  CHECK(predict_local(small, pair[1]) == 8.0);

  std::mt19937_64 rng(4);
  const RandomData data = random_set(rng, 40, 4);
  std::vector<Row> unique_x;
  std::vector<double> unique_y;
  for (std::size_t i = 0; i < data.features.size(); ++i) {
    if (std::find(unique_x.begin(), unique_x.end(), data.features[i]) != unique_x.end()) continue;
    unique_x.push_back(data.features[i]);
    unique_y.push_back(data.targets[i]);
  }
  const auto model = train_local(unique_x, unique_y, LocalModelSpec::cart_local(), 0);
  for (std::size_t i = 0; i < unique_x.size(); ++i) {
    CHECK(std::abs(predict_local(model, unique_x[i]) - unique_y[i]) <= 1e-9 * unique_y[i]);
  }
}

TEST_CASE("constant targets are predicted by every kind") {
  std::vector<Row> x;
  for (int i = 0; i < 9; ++i) x.push_back({double(i % 3), double(i / 3)});
  const std::vector<double> y(9, 42.0);
  for (const auto& spec : kAllKinds) {
    const auto model = train_local(x, y, spec, 1);
    for (const auto& row : x) CHECK(std::abs(predict_local(model, row) - 42.0) <= 1e-6);
  }
}

TEST_CASE("too few samples") {
  const std::vector<Row> x{{1.0}};
  const std::vector<double> y{1.0};
  CHECK_THROWS_AS(train_local(x, y, LocalModelSpec::linear(), 0), Error);
  std::vector<Row> four{{1}, {2}, {3}, {4}};
  std::vector<double> y4{1, 2, 3, 4};
  CHECK_THROWS_AS(train_local(four, y4, LocalModelSpec::regularized_net(), 0), Error);
}

TEST_CASE("network gradient matches central differences") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) CHECK(net_gradient_error(seed, 1e-5) < 1e-4);
}

TEST_CASE("network learns a smooth one-option function") {
  std::vector<Row> x;
  std::vector<double> y;
  auto truth = [](double v) { return 100.0 + 8.0 * v + 0.5 * v * v; };
  for (int i = 0; i <= 20; ++i) {
    x.push_back({double(i)});
    y.push_back(truth(i));
  }
  const auto model = train_local(x, y, LocalModelSpec::regularized_net(), 7);
  std::vector<double> actual, predicted;
  for (double q = 0.5; q < 20.0; q += 1.0) {
    actual.push_back(truth(q));
    predicted.push_back(predict_local(model, Row{q}));
  }
  CHECK(mre(actual, predicted) < 20.0);
}

TEST_CASE("training is deterministic and documents round-trip") {
  std::mt19937_64 rng(9);
  const RandomData data = random_set(rng, 30, 3);
  for (const auto& spec : kAllKinds) {
    const auto a = train_local(data.features, data.targets, spec, 5);
    const auto b = train_local(data.features, data.targets, spec, 5);
    CHECK(a == b);
    std::ostringstream out;
    a.write(out);
    std::istringstream in(out.str());
    DocumentReader reader(in);
    const auto back = TrainedLocalModel::read(reader);
    std::ostringstream again;
    back.write(again);
    CHECK(again.str() == out.str());
    for (const auto& row : data.features) CHECK(predict_local(back, row) == predict_local(a, row));
  }
}
