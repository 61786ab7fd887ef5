#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "dal/cart.hpp"

namespace dal {

/// Division objectives, both minimized: h is the MSE around the division
/// mean and z is the negated sample count.
struct ObjectivePoint {
  double h = 0.0;
  double z = 0.0;

  bool operator==(const ObjectivePoint&) const = default;
};

struct ReferencePoint {
  double h = 0.0;
  double z = 0.0;
};

struct DepthScore {
  std::size_t d = 0;
  double mu_hv = 0.0;
  std::size_t division_count = 0;
};

struct DepthAdaptation {
  std::vector<DepthScore> scores;  // one per candidate d, ascending
  ReferencePoint reference;
  std::size_t chosen = 0;  // index into scores

  const DepthScore& best() const { return scores[chosen]; }
};

/// Guard used for the h coordinate of the nadir when every h is zero.
inline constexpr double kDegenerateHeight = 1e-9;

ObjectivePoint division_objectives(std::span<const std::size_t> members, std::span<const double> performances);

/// Nadir point weakly worse than every point: 1.1 x the worst h and
/// 0.9 x the worst (negative) z.
ReferencePoint nadir_reference(std::span<const ObjectivePoint> points);

/// Mean over divisions of the rectangle area spanned by each point and the
/// reference. Dominated points contribute like any other.
double mu_hv(std::span<const ObjectivePoint> points, const ReferencePoint& reference);

/// Argmax over scored depths; ties go to the smaller d.
std::size_t select_depth(std::span<const DepthScore> scores);

/// Scores every d in 1..max_depth against one nadir shared by all depths and
/// picks the best. Trees without splits yield the single candidate d = 0
/// with a score of 0.
DepthAdaptation adapt_depth(const CartTree& tree, std::span<const double> performances,
                            std::size_t min_samples);

}  // namespace dal
