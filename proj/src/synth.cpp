#include "dal/synth.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "dal/error.hpp"
#include "dal/random.hpp"

namespace dal {

namespace {

constexpr int kNumericLevels = 10;

void validate(const LandscapeSpec& spec) {
  auto fail = [](const std::string& why) { throw Error(ErrorCode::InvalidSpec, why); };
  if (spec.mode_count < 2) fail("mode_count must be at least 2");
  const std::size_t bits = selector_bits(spec.mode_count);
  if (spec.binary_count < bits) fail("binary_count cannot hold the mode selector");
  if (spec.option_count != bits + 2 + spec.inert_option_count) {
    fail("option_count must equal selector bits + 2 influential options + inert options");
  }
  if (spec.binary_count - bits > spec.inert_option_count) fail("more binary options than inert slots");
  if (spec.mode_base.size() != spec.mode_count || spec.mode_spread.size() != spec.mode_count) {
    fail("mode_base and mode_spread need one entry per mode");
  }
  double widest = 0.0;
  for (double s : spec.mode_spread) {
    if (!(s >= 0.0)) fail("spreads must be non-negative");
    widest = std::max(widest, s);
  }
  for (std::size_t a = 0; a < spec.mode_count; ++a) {
    for (std::size_t b = a + 1; b < spec.mode_count; ++b) {
      if (std::abs(spec.mode_base[a] - spec.mode_base[b]) < 10.0 * widest) fail("mode bases closer than 10x spread");
    }
  }
  if (!(spec.slope >= 0.0)) fail("slope must be non-negative");
  for (std::size_t m = 0; m < spec.mode_count; ++m) {
    const double lowest = spec.mode_base[m] - 2.0 * spec.slope * kNumericLevels - spec.mode_spread[m];
    if (!(lowest > 0.0)) fail("mode " + std::to_string(m) + " could produce non-positive performance");
  }
}

}  // namespace

std::size_t selector_bits(std::size_t mode_count) {
  std::size_t bits = 0;
  while ((std::size_t{1} << bits) < mode_count) ++bits;
  return bits;
}

Landscape make_landscape(const LandscapeSpec& spec) {
  validate(spec);
  Landscape l;
  l.spec = spec;
  Rng rng(derive_seed(spec.seed, {0xC0EF}));
  for (std::size_t m = 0; m < spec.mode_count; ++m) {
    std::array<double, 2> c{};
    for (auto& v : c) v = spec.slope * (2.0 * uniform01(rng) - 1.0);
    l.coefficients.push_back(c);
  }
  return l;
}

std::size_t Landscape::mode_of(std::span<const double> options) const {
  const std::size_t bits = selector_bits(spec.mode_count);
  std::size_t mode = 0;
  for (std::size_t b = 0; b < bits; ++b) {
    if (options[b] != 0.0) mode |= std::size_t{1} << b;
  }
  return std::min(mode, spec.mode_count - 1);
}

double Landscape::evaluate(std::span<const double> options, double noise) const {
  const std::size_t bits = selector_bits(spec.mode_count);
  const std::size_t m = mode_of(options);
  return spec.mode_base[m] + coefficients[m][0] * options[bits] + coefficients[m][1] * options[bits + 1] + noise;
}

GeneratedLandscape generate(const LandscapeSpec& spec, std::size_t n_samples) {
  GeneratedLandscape out{make_landscape(spec), {}, {}, {}};
  if (n_samples < 4 * spec.mode_count) throw Error(ErrorCode::InvalidSpec, "need at least 4 samples per mode");
  const std::size_t bits = selector_bits(spec.mode_count);
  const std::size_t inert_binary = spec.binary_count - bits;
  const std::size_t numeric_count = spec.option_count - spec.binary_count;
  const double space = std::pow(2.0, static_cast<double>(inert_binary)) *
                       std::pow(static_cast<double>(kNumericLevels), static_cast<double>(numeric_count)) *
                       static_cast<double>(spec.mode_count);
  if (space < 2.0 * static_cast<double>(n_samples)) {
    throw Error(ErrorCode::InvalidSpec, "configuration space too small for " + std::to_string(n_samples) + " distinct samples");
  }

  Rng rng(derive_seed(spec.seed, {0xDA7A}));
  std::set<Row> seen;
  std::vector<ConfigSample> samples;
  while (samples.size() < n_samples) {
    const std::size_t mode = uniform_index(rng, spec.mode_count);
    Row x(spec.option_count);
    for (std::size_t b = 0; b < bits; ++b) x[b] = static_cast<double>((mode >> b) & 1U);
    x[bits] = static_cast<double>(1 + uniform_index(rng, kNumericLevels));
    x[bits + 1] = static_cast<double>(1 + uniform_index(rng, kNumericLevels));
    for (std::size_t k = 0; k < spec.inert_option_count; ++k) {
      x[bits + 2 + k] = k < inert_binary ? static_cast<double>(uniform_index(rng, 2))
                                         : static_cast<double>(1 + uniform_index(rng, kNumericLevels));
    }
    const double noise = spec.mode_spread[mode] * (2.0 * uniform01(rng) - 1.0);
    if (!seen.insert(x).second) continue;
    const double perf = out.landscape.evaluate(x, noise);
    samples.push_back({std::move(x), perf});
    out.modes.push_back(mode);
    out.noise.push_back(noise);
  }

  std::vector<std::string> names;
  for (std::size_t b = 0; b < bits; ++b) names.push_back("mode" + std::to_string(b));
  names.push_back("influence0");
  names.push_back("influence1");
  for (std::size_t k = 0; k < spec.inert_option_count; ++k) names.push_back("inert" + std::to_string(k));
  out.dataset = Dataset(std::move(names), std::move(samples));
  return out;
}

LandscapeSpec bimodal_spec(std::uint64_t seed) {
  LandscapeSpec spec;
  spec.option_count = 7;
  spec.binary_count = 3;
  spec.mode_count = 2;
  spec.mode_base = {1000.0, 5000.0};
  const double spread = 0.02 * (spec.mode_base[1] - spec.mode_base[0]);
  spec.mode_spread = {spread, spread};
  spec.inert_option_count = 4;
  spec.slope = 40.0;
  spec.seed = seed;
  return spec;
}

}  // namespace dal
