#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "dal/dataset.hpp"

namespace dal {

/// Sparse synthetic configuration landscape. Options are laid out as
///   [mode selector bits][2 influential numeric options][inert options]
/// where the inert block holds (binary_count - selector bits) binary options
/// followed by numeric ones. Numeric options take integer values 1..10.
struct LandscapeSpec {
  std::size_t option_count = 6;
  std::size_t binary_count = 3;
  std::size_t mode_count = 2;
  std::vector<double> mode_base{1000.0, 5000.0};
  std::vector<double> mode_spread{0.0, 0.0};
  std::size_t inert_option_count = 3;
  /// Upper bound on |coefficient| of each influential option within a mode.
  double slope = 20.0;
  std::uint64_t seed = 0;
};

std::size_t selector_bits(std::size_t mode_count);

/// Per-mode affine surfaces drawn from the spec's seed.
struct Landscape {
  LandscapeSpec spec;
  std::vector<std::array<double, 2>> coefficients;  // per mode

  std::size_t mode_of(std::span<const double> options) const;
  /// Noise-free performance plus `noise`; inert options are never read.
  double evaluate(std::span<const double> options, double noise) const;
};

Landscape make_landscape(const LandscapeSpec& spec);

struct GeneratedLandscape {
  Landscape landscape;
  Dataset dataset;
  std::vector<std::size_t> modes;  // ground-truth mode per sample
  std::vector<double> noise;       // per sample, within +-spread of its mode
};

GeneratedLandscape generate(const LandscapeSpec& spec, std::size_t n_samples);

/// Two modes, 1000 configurations, spread at 2% of the mode gap.
LandscapeSpec bimodal_spec(std::uint64_t seed);

}  // namespace dal
