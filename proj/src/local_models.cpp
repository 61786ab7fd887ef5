#include "dal/local_models.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

#include "dal/document.hpp"
#include "dal/error.hpp"

namespace dal {

std::string to_string(LocalModelKind kind) {
  switch (kind) {
    case LocalModelKind::Linear: return "linear";
    case LocalModelKind::CartLocal: return "cart";
    case LocalModelKind::RegularizedNet: return "net";
  }
  return "unknown";
}

std::optional<LocalModelKind> parse_local_model_kind(std::string_view name) {
  if (name == "linear" || name == "lr") return LocalModelKind::Linear;
  if (name == "cart" || name == "cart_local") return LocalModelKind::CartLocal;
  if (name == "net" || name == "regularized_net") return LocalModelKind::RegularizedNet;
  return std::nullopt;
}

LocalModelSpec LocalModelSpec::linear() { return {LocalModelKind::Linear, {}, 2}; }
LocalModelSpec LocalModelSpec::cart_local() { return {LocalModelKind::CartLocal, {}, 2}; }
LocalModelSpec LocalModelSpec::regularized_net() { return {LocalModelKind::RegularizedNet, {}, 5}; }

LocalModelSpec LocalModelSpec::of_kind(LocalModelKind kind) {
  switch (kind) {
    case LocalModelKind::Linear: return linear();
    case LocalModelKind::CartLocal: return cart_local();
    case LocalModelKind::RegularizedNet: return regularized_net();
  }
  return linear();
}

double LocalModelSpec::param(const std::string& key, double fallback) const {
  auto it = hyperparameters.find(key);
  return it == hyperparameters.end() ? fallback : it->second;
}

MinMax MinMax::of(std::span<const double> values) {
  MinMax m;
  if (values.empty()) return m;
  m.min = m.max = values.front();
  for (double v : values) {
    m.min = std::min(m.min, v);
    m.max = std::max(m.max, v);
  }
  return m;
}

namespace {

struct ScaledData {
  std::vector<MinMax> feature_scaling;
  MinMax target_scaling;
  std::vector<Row> x;
  std::vector<double> y;
};

ScaledData scale_data(const std::vector<Row>& features, std::span<const double> targets) {
  ScaledData d;
  const std::size_t p = features.front().size();
  d.feature_scaling.resize(p);
  std::vector<double> column(features.size());
  for (std::size_t j = 0; j < p; ++j) {
    for (std::size_t i = 0; i < features.size(); ++i) column[i] = features[i][j];
    d.feature_scaling[j] = MinMax::of(column);
  }
  d.target_scaling = MinMax::of(targets);
  d.x.resize(features.size(), Row(p));
  d.y.resize(targets.size());
  for (std::size_t i = 0; i < features.size(); ++i) {
    for (std::size_t j = 0; j < p; ++j) d.x[i][j] = d.feature_scaling[j].scale(features[i][j]);
    d.y[i] = d.target_scaling.scale(targets[i]);
  }
  return d;
}

LinearParams fit_linear(const std::vector<Row>& x, std::span<const double> y, double ridge) {
  const auto n = static_cast<Eigen::Index>(x.size());
  const auto p = static_cast<Eigen::Index>(x.front().size());
  Eigen::MatrixXd a(n, p + 1);
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    a(i, 0) = 1.0;
    for (Eigen::Index j = 0; j < p; ++j) a(i, j + 1) = x[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    b(i) = y[static_cast<std::size_t>(i)];
  }
  Eigen::VectorXd beta;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  if (qr.rank() == p + 1) {
    beta = qr.solve(b);
  } else {
    // rank-deficient: ridge on the weights, intercept left free
    Eigen::MatrixXd normal = a.transpose() * a;
    for (Eigen::Index j = 1; j <= p; ++j) normal(j, j) += ridge;
    beta = normal.ldlt().solve(a.transpose() * b);
  }
  LinearParams params;
  params.intercept = beta(0);
  params.weights.resize(static_cast<std::size_t>(p));
  for (Eigen::Index j = 0; j < p; ++j) params.weights[static_cast<std::size_t>(j)] = beta(j + 1);
  return params;
}

double relative_error(double actual, double predicted) {
  const double denom = std::abs(actual) > 0.0 ? std::abs(actual) : 1.0;
  return std::abs(actual - predicted) / denom;
}

TrainedLocalModel train_net_model(const std::vector<Row>& features, std::span<const double> targets,
                                  std::size_t hidden, double l1, std::size_t steps, double lr,
                                  std::uint64_t seed) {
  ScaledData d = scale_data(features, targets);
  NetParams params = net::fit(d.x, d.y, hidden, l1, steps, lr, seed);
  return TrainedLocalModel(std::move(d.feature_scaling), d.target_scaling, std::move(params));
}

double select_l1(const std::vector<Row>& features, std::span<const double> targets, std::size_t hidden,
                 std::size_t steps, double lr, std::size_t folds, std::uint64_t seed) {
  static constexpr std::array<double, 3> kGrid{0.001, 0.01, 0.1};
  const std::size_t n = features.size();
  folds = std::clamp<std::size_t>(folds, 2, n);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(derive_seed(seed, {0xF01D}));
  shuffle(std::span(order), rng);

  double best_l1 = kGrid.front();
  double best_error = std::numeric_limits<double>::infinity();
  for (double l1 : kGrid) {
    double error_sum = 0.0;
    for (std::size_t f = 0; f < folds; ++f) {
      std::vector<Row> train_x, test_x;
      std::vector<double> train_y, test_y;
      for (std::size_t k = 0; k < n; ++k) {
        const std::size_t i = order[k];
        if (k % folds == f) {
          test_x.push_back(features[i]);
          test_y.push_back(targets[i]);
        } else {
          train_x.push_back(features[i]);
          train_y.push_back(targets[i]);
        }
      }
      auto model = train_net_model(train_x, train_y, hidden, l1, steps, lr, derive_seed(seed, {f}));
      double fold_error = 0.0;
      for (std::size_t i = 0; i < test_x.size(); ++i) fold_error += relative_error(test_y[i], model.predict(test_x[i]));
      error_sum += fold_error / static_cast<double>(test_x.size());
    }
    const double mean_error = error_sum / static_cast<double>(folds);
    if (mean_error < best_error) {
      best_error = mean_error;
      best_l1 = l1;
    }
  }
  return best_l1;
}

}  // namespace

TrainedLocalModel::TrainedLocalModel(std::vector<MinMax> feature_scaling, MinMax target_scaling, Params params)
    : feature_scaling_(std::move(feature_scaling)), target_scaling_(target_scaling), params_(std::move(params)) {}

LocalModelKind TrainedLocalModel::kind() const {
  switch (params_.index()) {
    case 0: return LocalModelKind::Linear;
    case 1: return LocalModelKind::CartLocal;
    default: return LocalModelKind::RegularizedNet;
  }
}

double TrainedLocalModel::predict(std::span<const double> config) const {
  if (config.size() != feature_scaling_.size()) {
    throw Error(ErrorCode::DimensionMismatch, "configuration has " + std::to_string(config.size()) +
                                                  " options, model expects " + std::to_string(feature_scaling_.size()));
  }
  Row x(config.size());
  for (std::size_t j = 0; j < x.size(); ++j) x[j] = feature_scaling_[j].scale(config[j]);

  double scaled = 0.0;
  if (const auto* lin = std::get_if<LinearParams>(&params_)) {
    scaled = lin->intercept;
    for (std::size_t j = 0; j < x.size(); ++j) scaled += lin->weights[j] * x[j];
  } else if (const auto* tree = std::get_if<CartTree>(&params_)) {
    scaled = predict_mean(*tree, x);
  } else {
    scaled = net::forward(std::get<NetParams>(params_), x);
  }
  double value = target_scaling_.unscale(scaled);
  // a diverged regressor must still answer with a finite number
  if (!std::isfinite(value)) value = 0.5 * (target_scaling_.min + target_scaling_.max);
  return value;
}

std::optional<LinearCoefficients> TrainedLocalModel::linear_coefficients() const {
  const auto* lin = std::get_if<LinearParams>(&params_);
  if (lin == nullptr) return std::nullopt;
  const double y_range = target_scaling_.max - target_scaling_.min;
  LinearCoefficients c;
  c.weights.resize(lin->weights.size());
  double offset = lin->intercept;
  for (std::size_t j = 0; j < lin->weights.size(); ++j) {
    const auto& fs = feature_scaling_[j];
    const double x_range = fs.max - fs.min;
    if (x_range > 0.0) {
      c.weights[j] = lin->weights[j] * y_range / x_range;
      offset -= lin->weights[j] * fs.min / x_range;
    }
  }
  c.intercept = target_scaling_.min + y_range * offset;
  return c;
}

TrainedLocalModel train_local(const std::vector<Row>& features, std::span<const double> targets,
                              const LocalModelSpec& spec, std::uint64_t seed) {
  if (features.size() != targets.size()) throw Error(ErrorCode::LengthMismatch, "features and targets differ in length");
  if (features.size() < spec.min_samples || features.empty()) {
    throw Error(ErrorCode::InsufficientSamples, to_string(spec.kind) + " needs at least " +
                                                    std::to_string(spec.min_samples) + " samples, got " +
                                                    std::to_string(features.size()));
  }
  switch (spec.kind) {
    case LocalModelKind::Linear: {
      ScaledData d = scale_data(features, targets);
      auto params = fit_linear(d.x, d.y, spec.param("ridge", 1e-6));
      return TrainedLocalModel(std::move(d.feature_scaling), d.target_scaling, std::move(params));
    }
    case LocalModelKind::CartLocal: {
      ScaledData d = scale_data(features, targets);
      auto tree = train_cart(d.x, d.y, 1);
      return TrainedLocalModel(std::move(d.feature_scaling), d.target_scaling, std::move(tree));
    }
    case LocalModelKind::RegularizedNet: {
      const auto hidden = static_cast<std::size_t>(spec.param("hidden", 16));
      const auto steps = static_cast<std::size_t>(spec.param("steps", 2000));
      const double lr = spec.param("learning_rate", 0.01);
      double l1 = spec.param("l1", -1.0);
      if (l1 < 0.0) {
        l1 = select_l1(features, targets, hidden, steps, lr, static_cast<std::size_t>(spec.param("folds", 3)), seed);
      }
      return train_net_model(features, targets, hidden, l1, steps, lr, seed);
    }
  }
  throw Error(ErrorCode::InvalidSpec, "unknown local model kind");
}

TrainedLocalModel train_local(const TrainingSet& samples, const LocalModelSpec& spec, std::uint64_t seed) {
  return train_local(samples.features, samples.targets, spec, seed);
}

double predict_local(const TrainedLocalModel& model, std::span<const double> config) { return model.predict(config); }

void TrainedLocalModel::write(std::ostream& out) const {
  out << "local " << to_string(kind()) << '\n';
  out << "feature_scaling " << feature_scaling_.size();
  for (const auto& s : feature_scaling_) {
    out << ' ';
    write_real(out, s.min);
    out << ' ';
    write_real(out, s.max);
  }
  out << "\ntarget_scaling ";
  write_real(out, target_scaling_.min);
  out << ' ';
  write_real(out, target_scaling_.max);
  out << '\n';
  if (const auto* lin = std::get_if<LinearParams>(&params_)) {
    out << "linear " << lin->weights.size() << ' ';
    write_real(out, lin->intercept);
    for (double w : lin->weights) {
      out << ' ';
      write_real(out, w);
    }
    out << '\n';
  } else if (const auto* tree = std::get_if<CartTree>(&params_)) {
    tree->write(out);
  } else {
    const auto& n = std::get<NetParams>(params_);
    out << "net " << n.inputs << ' ' << n.hidden << ' ';
    write_real(out, n.l1);
    out << ' ' << n.values.size();
    for (double v : n.values) {
      out << ' ';
      write_real(out, v);
    }
    out << '\n';
  }
}

TrainedLocalModel TrainedLocalModel::read(DocumentReader& in) {
  in.expect("local");
  const std::string kind_name = in.word();
  auto kind = parse_local_model_kind(kind_name);
  if (!kind) throw Error(ErrorCode::CorruptDocument, "unknown local model kind '" + kind_name + "'");
  in.expect("feature_scaling");
  std::vector<MinMax> fs(in.count());
  for (auto& s : fs) {
    s.min = in.real();
    s.max = in.real();
  }
  in.expect("target_scaling");
  MinMax ts;
  ts.min = in.real();
  ts.max = in.real();
  switch (*kind) {
    case LocalModelKind::Linear: {
      in.expect("linear");
      LinearParams p;
      p.weights.resize(in.count());
      if (p.weights.size() != fs.size()) throw Error(ErrorCode::CorruptDocument, "linear weight count mismatch");
      p.intercept = in.real();
      for (auto& w : p.weights) w = in.real();
      return TrainedLocalModel(std::move(fs), ts, std::move(p));
    }
    case LocalModelKind::CartLocal: {
      auto tree = CartTree::read(in);
      if (tree.option_count() != fs.size()) throw Error(ErrorCode::CorruptDocument, "local tree dimension mismatch");
      return TrainedLocalModel(std::move(fs), ts, std::move(tree));
    }
    case LocalModelKind::RegularizedNet: {
      in.expect("net");
      NetParams p;
      p.inputs = in.count();
      p.hidden = in.count();
      p.l1 = in.real();
      p.values.resize(in.count());
      if (p.inputs != fs.size() || p.values.size() != net::parameter_count(p.inputs, p.hidden)) {
        throw Error(ErrorCode::CorruptDocument, "network shape mismatch");
      }
      for (auto& v : p.values) v = in.real();
      return TrainedLocalModel(std::move(fs), ts, std::move(p));
    }
  }
  throw Error(ErrorCode::CorruptDocument, "unknown local model kind");
}

namespace net {

NetParams initialize(std::size_t inputs, std::size_t hidden, double l1, Rng& rng) {
  NetParams p;
  p.inputs = inputs;
  p.hidden = hidden;
  p.l1 = l1;
  p.values.assign(parameter_count(inputs, hidden), 0.0);
  const double a1 = std::sqrt(6.0 / static_cast<double>(std::max<std::size_t>(inputs, 1)));
  const double a2 = std::sqrt(6.0 / static_cast<double>(hidden + 1));
  for (std::size_t k = 0; k < hidden * inputs; ++k) p.values[k] = a1 * (2.0 * uniform01(rng) - 1.0);
  // hidden biases start slightly positive
  for (std::size_t h = 0; h < hidden; ++h) p.values[hidden * inputs + h] = 0.01;
  for (std::size_t h = 0; h < hidden; ++h) p.values[hidden * inputs + hidden + h] = a2 * (2.0 * uniform01(rng) - 1.0);
  return p;
}

double forward(const NetParams& net, std::span<const double> x) {
  const double* w1 = net.values.data();
  const double* b1 = w1 + net.hidden * net.inputs;
  const double* w2 = b1 + net.hidden;
  const double b2 = w2[net.hidden];
  double out = b2;
  for (std::size_t h = 0; h < net.hidden; ++h) {
    double a = b1[h];
    for (std::size_t j = 0; j < net.inputs; ++j) a += w1[h * net.inputs + j] * x[j];
    if (a > 0.0) out += w2[h] * a;
  }
  return out;
}

namespace {

double l1_penalty(const NetParams& net) {
  double sum = 0.0;
  const std::size_t w1_count = net.hidden * net.inputs;
  for (std::size_t k = 0; k < w1_count; ++k) sum += std::abs(net.values[k]);
  for (std::size_t h = 0; h < net.hidden; ++h) sum += std::abs(net.values[w1_count + net.hidden + h]);
  return net.l1 * sum;
}

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

}  // namespace

double objective(const NetParams& net, const std::vector<Row>& x, std::span<const double> y) {
  double sse = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = forward(net, x[i]) - y[i];
    sse += r * r;
  }
  return sse / static_cast<double>(x.size()) + l1_penalty(net);
}

double objective_gradient(const NetParams& net, const std::vector<Row>& x, std::span<const double> y,
                          std::vector<double>& gradient) {
  const std::size_t hidden = net.hidden, inputs = net.inputs;
  const std::size_t w1_count = hidden * inputs;
  const double* w1 = net.values.data();
  const double* b1 = w1 + w1_count;
  const double* w2 = b1 + hidden;
  const double b2 = w2[hidden];

  gradient.assign(net.values.size(), 0.0);
  double* g_w1 = gradient.data();
  double* g_b1 = g_w1 + w1_count;
  double* g_w2 = g_b1 + hidden;
  double& g_b2 = g_w2[hidden];

  std::vector<double> act(hidden);
  const double scale = 2.0 / static_cast<double>(x.size());
  double sse = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const auto& xi = x[i];
    double out = b2;
    for (std::size_t h = 0; h < hidden; ++h) {
      double a = b1[h];
      for (std::size_t j = 0; j < inputs; ++j) a += w1[h * inputs + j] * xi[j];
      act[h] = a;
      if (a > 0.0) out += w2[h] * a;
    }
    const double r = out - y[i];
    sse += r * r;
    const double d_out = scale * r;
    g_b2 += d_out;
    for (std::size_t h = 0; h < hidden; ++h) {
      if (act[h] <= 0.0) continue;
      g_w2[h] += d_out * act[h];
      const double d_a = d_out * w2[h];
      g_b1[h] += d_a;
      for (std::size_t j = 0; j < inputs; ++j) g_w1[h * inputs + j] += d_a * xi[j];
    }
  }
  for (std::size_t k = 0; k < w1_count; ++k) g_w1[k] += net.l1 * sign(w1[k]);
  for (std::size_t h = 0; h < hidden; ++h) g_w2[h] += net.l1 * sign(w2[h]);
  return sse / static_cast<double>(x.size()) + l1_penalty(net);
}

NetParams fit(const std::vector<Row>& x, std::span<const double> y, std::size_t hidden, double l1,
              std::size_t steps, double learning_rate, std::uint64_t seed) {
  Rng rng(seed);
  NetParams net = initialize(x.empty() ? 0 : x.front().size(), hidden, l1, rng);
  constexpr double beta1 = 0.9, beta2 = 0.999, epsilon = 1e-8;
  std::vector<double> m(net.values.size(), 0.0), v(net.values.size(), 0.0), g;
  double b1_power = 1.0, b2_power = 1.0;
  for (std::size_t step = 0; step < steps; ++step) {
    objective_gradient(net, x, y, g);
    b1_power *= beta1;
    b2_power *= beta2;
    for (std::size_t k = 0; k < net.values.size(); ++k) {
      m[k] = beta1 * m[k] + (1.0 - beta1) * g[k];
      v[k] = beta2 * v[k] + (1.0 - beta2) * g[k] * g[k];
      const double m_hat = m[k] / (1.0 - b1_power);
      const double v_hat = v[k] / (1.0 - b2_power);
      net.values[k] -= learning_rate * m_hat / (std::sqrt(v_hat) + epsilon);
    }
  }
  return net;
}

}  // namespace net

}  // namespace dal
