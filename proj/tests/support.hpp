#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "dal/cart.hpp"
#include "dal/dataset.hpp"
#include "dal/local_models.hpp"

namespace dal::testing {

/// Two options, 18 samples: rtQuality in {0,1}, threads in 1..10.
///   rtQuality=0, threads 1..8   -> 400 s   (8 samples, pure)
///   rtQuality=1, threads 1..5   -> 122 s   (5 samples)
///   rtQuality=1, threads 6..10  -> 150 s   (5 samples)
inline Dataset runtime_example() {
  std::vector<ConfigSample> rows;
  for (int t = 1; t <= 8; ++t) rows.push_back({{0.0, double(t)}, 400.0});
  for (int t = 1; t <= 10; ++t) rows.push_back({{1.0, double(t)}, t <= 5 ? 122.0 : 150.0});
  return Dataset({"rtQuality", "threads"}, std::move(rows));
}

struct RandomData {
  std::vector<Row> features;
  std::vector<double> targets;
};

/// Mixed binary and small-integer options with continuous targets.
inline RandomData random_set(std::mt19937_64& rng, std::size_t n, std::size_t p) {
  std::uniform_int_distribution<int> coin(0, 1);
  std::uniform_int_distribution<int> level(1, 6);
  std::uniform_real_distribution<double> perf(10.0, 1000.0);
  std::vector<bool> binary(p);
  for (std::size_t j = 0; j < p; ++j) binary[j] = coin(rng) == 1;
  RandomData out;
  for (std::size_t i = 0; i < n; ++i) {
    Row r(p);
    for (std::size_t j = 0; j < p; ++j) r[j] = binary[j] ? coin(rng) : level(rng);
    out.features.push_back(std::move(r));
    out.targets.push_back(perf(rng));
  }
  return out;
}

inline long double oracle_mse(const std::vector<double>& y, const std::vector<std::size_t>& idx) {
  if (idx.empty()) return 0.0L;
  long double sum = 0.0L;
  for (auto i : idx) sum += y[i];
  const long double m = sum / idx.size();
  long double ss = 0.0L;
  for (auto i : idx) ss += (y[i] - m) * (y[i] - m);
  return ss / idx.size();
}

struct OracleSplit {
  std::size_t option = 0;
  double threshold = 0.0;
  long double loss = 0.0L;
};

inline long double oracle_split_loss(const std::vector<Row>& x, const std::vector<double>& y,
                                     const std::vector<std::size_t>& idx, std::size_t option, double threshold) {
  std::vector<std::size_t> left, right;
  for (auto i : idx) (x[i][option] <= threshold ? left : right).push_back(i);
  return oracle_mse(y, left) + oracle_mse(y, right);
}

/// Exhaustive search over every (option, midpoint) pair leaving at least
/// `min_leaf` samples on each side.
inline std::optional<OracleSplit> brute_force_split(const std::vector<Row>& x, const std::vector<double>& y,
                                                    const std::vector<std::size_t>& idx, std::size_t min_leaf) {
  std::optional<OracleSplit> best;
  for (std::size_t j = 0; j < x.front().size(); ++j) {
    std::vector<double> values;
    for (auto i : idx) values.push_back(x[i][j]);
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    for (std::size_t v = 0; v + 1 < values.size(); ++v) {
      const double t = 0.5 * (values[v] + values[v + 1]);
      std::size_t n_left = 0;
      for (auto i : idx) n_left += x[i][j] <= t;
      if (n_left < min_leaf || idx.size() - n_left < min_leaf) continue;
      const long double loss = oracle_split_loss(x, y, idx, j, t);
      if (!best || loss < best->loss) best = OracleSplit{j, t, loss};
    }
  }
  return best;
}

inline double rel_diff(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

/// Walk the tree from the root and stop at the first node in `stops`.
inline std::size_t route_to(const CartTree& tree, const std::vector<std::size_t>& stops, const Row& config) {
  std::size_t id = 0;
  for (;;) {
    if (std::find(stops.begin(), stops.end(), id) != stops.end()) return id;
    const auto& node = tree.node(id);
    if (node.is_leaf()) return id;
    id = config[node.split->option_index] <= node.split->threshold ? *node.left : *node.right;
  }
}

/// Largest relative gap between the analytic objective gradient and central
/// differences with step `step`, at one random parameter point.
inline double net_gradient_error(std::uint64_t seed, double step, std::size_t inputs = 3, std::size_t hidden = 16) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> weight(-1.0, 1.0);
  std::vector<Row> x(20, Row(inputs));
  std::vector<double> y(20);
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (auto& v : x[i]) v = unit(rng);
    y[i] = unit(rng);
  }
  NetParams params{inputs, hidden, 0.01, std::vector<double>(net::parameter_count(inputs, hidden))};
  for (auto& v : params.values) {
    do v = weight(rng);
    while (std::abs(v) < 1e-3);
  }
  std::vector<double> analytic;
  net::objective_gradient(params, x, y, analytic);
  double worst = 0.0;
  for (std::size_t k = 0; k < params.values.size(); ++k) {
    NetParams up = params, down = params;
    up.values[k] += step;
    down.values[k] -= step;
    const double numeric = (net::objective(up, x, y) - net::objective(down, x, y)) / (2.0 * step);
    const double scale = std::max({std::abs(analytic[k]), std::abs(numeric), 1e-6});
    worst = std::max(worst, std::abs(analytic[k] - numeric) / scale);
  }
  return worst;
}

}  // namespace dal::testing
