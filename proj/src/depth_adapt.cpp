#include "dal/depth_adapt.hpp"

#include <algorithm>
#include <cmath>

#include "dal/error.hpp"

namespace dal {

ObjectivePoint division_objectives(std::span<const std::size_t> members, std::span<const double> performances) {
  if (members.empty()) throw Error(ErrorCode::EmptyDivision, "division has no samples");
  return {subset_mse(performances, members), -static_cast<double>(members.size())};
}

ReferencePoint nadir_reference(std::span<const ObjectivePoint> points) {
  if (points.empty()) throw Error(ErrorCode::NoPoints, "nadir needs at least one point");
  double worst_h = points.front().h;
  double worst_z = points.front().z;
  for (const auto& p : points) {
    worst_h = std::max(worst_h, p.h);
    worst_z = std::max(worst_z, p.z);
  }
  ReferencePoint r;
  r.h = worst_h > 0.0 ? 1.1 * worst_h : kDegenerateHeight;
  r.z = 0.9 * worst_z;
  return r;
}

double mu_hv(std::span<const ObjectivePoint> points, const ReferencePoint& reference) {
  if (points.empty()) throw Error(ErrorCode::NoPoints, "no divisions to score");
  double total = 0.0;
  for (const auto& p : points) {
    if (p.h > reference.h || p.z > reference.z) {
      throw Error(ErrorCode::PointBeyondReference, "division objective lies beyond the reference point");
    }
    total += std::abs(reference.h - p.h) * std::abs(reference.z - p.z);
  }
  return total / static_cast<double>(points.size());
}

std::size_t select_depth(std::span<const DepthScore> scores) {
  if (scores.empty()) throw Error(ErrorCode::NoPoints, "no candidate depths");
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    const bool better = scores[i].mu_hv > scores[best].mu_hv ||
                        (scores[i].mu_hv == scores[best].mu_hv && scores[i].d < scores[best].d);
    if (better) best = i;
  }
  return best;
}

DepthAdaptation adapt_depth(const CartTree& tree, std::span<const double> performances,
                            std::size_t min_samples) {
  DepthAdaptation result;
  if (tree.max_depth() == 0) {
    result.scores.push_back({0, 0.0, 1});
    return result;
  }

  // Objectives of every candidate division set; the nadir pool keeps
  // each distinct (h, z) pair once.
  std::vector<std::vector<ObjectivePoint>> per_depth;
  std::vector<ObjectivePoint> pool;
  for (std::size_t d = 1; d <= tree.max_depth(); ++d) {
    const DivisionSet set = extract_divisions(tree, d, min_samples);
    std::vector<ObjectivePoint> points;
    points.reserve(set.divisions.size());
    for (const auto& div : set.divisions) {
      const ObjectivePoint p = division_objectives(div.sample_indices, performances);
      points.push_back(p);
      if (std::find(pool.begin(), pool.end(), p) == pool.end()) pool.push_back(p);
    }
    per_depth.push_back(std::move(points));
  }

  // One reference for all depths, then score each.
  result.reference = nadir_reference(pool);
  for (std::size_t i = 0; i < per_depth.size(); ++i) {
    result.scores.push_back({i + 1, mu_hv(per_depth[i], result.reference), per_depth[i].size()});
  }

  result.chosen = select_depth(result.scores);
  return result;
}

}  // namespace dal
