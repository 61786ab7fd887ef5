#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "dal/cart.hpp"
#include "dal/dataset.hpp"
#include "dal/random.hpp"

namespace dal {

class DocumentReader;

enum class LocalModelKind { Linear, CartLocal, RegularizedNet };

std::string to_string(LocalModelKind kind);
std::optional<LocalModelKind> parse_local_model_kind(std::string_view name);

/// Which regressor to train per division, its hyperparameters and the
/// smallest division it can be trained on.
///
/// Recognized hyperparameters:
///   linear:          ridge (1e-6, only used for rank-deficient systems)
///   regularized_net: hidden (16), steps (2000), learning_rate (0.01),
///                    folds (3), l1 (when set, skips the grid search)
struct LocalModelSpec {
  LocalModelKind kind = LocalModelKind::Linear;
  std::map<std::string, double> hyperparameters;
  std::size_t min_samples = 2;

  static LocalModelSpec linear();
  static LocalModelSpec cart_local();
  static LocalModelSpec regularized_net();
  static LocalModelSpec of_kind(LocalModelKind kind);

  double param(const std::string& key, double fallback) const;
  bool operator==(const LocalModelSpec&) const = default;
};

struct MinMax {
  double min = 0.0;
  double max = 0.0;

  static MinMax of(std::span<const double> values);
  double scale(double v) const { return max > min ? (v - min) / (max - min) : 0.0; }
  double unscale(double s) const { return max > min ? min + s * (max - min) : min; }
  bool operator==(const MinMax&) const = default;
};

struct LinearParams {
  double intercept = 0.0;
  std::vector<double> weights;  // on scaled features and targets

  bool operator==(const LinearParams&) const = default;
};

/// One-hidden-layer ReLU network. Parameters are flattened as
/// [w1 (hidden x inputs, row-major), b1 (hidden), w2 (hidden), b2].
struct NetParams {
  std::size_t inputs = 0;
  std::size_t hidden = 0;
  double l1 = 0.0;
  std::vector<double> values;

  bool operator==(const NetParams&) const = default;
};

/// Coefficients of a linear model in the original feature/target units.
struct LinearCoefficients {
  double intercept = 0.0;
  std::vector<double> weights;
};

class TrainedLocalModel {
 public:
  using Params = std::variant<LinearParams, CartTree, NetParams>;

  TrainedLocalModel() = default;
  TrainedLocalModel(std::vector<MinMax> feature_scaling, MinMax target_scaling, Params params);

  LocalModelKind kind() const;
  const std::vector<MinMax>& feature_scaling() const { return feature_scaling_; }
  const MinMax& target_scaling() const { return target_scaling_; }
  const Params& params() const { return params_; }
  std::size_t option_count() const { return feature_scaling_.size(); }

  double predict(std::span<const double> config) const;
  std::optional<LinearCoefficients> linear_coefficients() const;

  void write(std::ostream& out) const;
  static TrainedLocalModel read(DocumentReader& in);

  bool operator==(const TrainedLocalModel&) const = default;

 private:
  std::vector<MinMax> feature_scaling_;
  MinMax target_scaling_;
  Params params_;
};

TrainedLocalModel train_local(const std::vector<Row>& features, std::span<const double> targets,
                              const LocalModelSpec& spec, std::uint64_t seed);
TrainedLocalModel train_local(const TrainingSet& samples, const LocalModelSpec& spec, std::uint64_t seed);

double predict_local(const TrainedLocalModel& model, std::span<const double> config);

namespace net {

inline std::size_t parameter_count(std::size_t inputs, std::size_t hidden) { return hidden * inputs + 2 * hidden + 1; }

NetParams initialize(std::size_t inputs, std::size_t hidden, double l1, Rng& rng);
double forward(const NetParams& net, std::span<const double> x);

/// Mean squared error over the rows plus l1 * sum of |weight| (biases are
/// not penalized).
double objective(const NetParams& net, const std::vector<Row>& x, std::span<const double> y);

/// Objective and its (sub)gradient with respect to net.values.
double objective_gradient(const NetParams& net, const std::vector<Row>& x, std::span<const double> y,
                          std::vector<double>& gradient);

/// Full-batch Adam on already scaled data.
NetParams fit(const std::vector<Row>& x, std::span<const double> y, std::size_t hidden, double l1,
              std::size_t steps, double learning_rate, std::uint64_t seed);

}  // namespace net

}  // namespace dal
