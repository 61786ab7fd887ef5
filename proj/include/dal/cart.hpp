#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "dal/dataset.hpp"

namespace dal {

class DocumentReader;

struct SplitRecord {
  std::size_t option_index = 0;
  double threshold = 0.0;  // value <= threshold routes left

  bool operator==(const SplitRecord&) const = default;
};

struct SplitCandidate {
  SplitRecord split;
  double loss = 0.0;  // MSE(left) + MSE(right), unweighted
};

struct CartNode {
  std::vector<std::size_t> sample_indices;  // ascending, into the training set
  std::size_t depth = 0;
  double mean_performance = 0.0;
  double mse = 0.0;
  std::optional<SplitRecord> split;
  std::optional<std::size_t> left;
  std::optional<std::size_t> right;
  std::optional<std::size_t> parent;

  bool is_leaf() const { return !split.has_value(); }
  bool operator==(const CartNode&) const = default;
};

/// Regression tree used to divide the training samples. Nodes are stored in
/// preorder (a node precedes its left subtree, which precedes its right).
class CartTree {
 public:
  CartTree() = default;
  CartTree(std::vector<CartNode> nodes, std::size_t option_count, std::size_t min_leaf_size);

  const CartNode& root() const { return nodes_.front(); }
  const CartNode& node(std::size_t id) const { return nodes_.at(id); }
  const std::vector<CartNode>& nodes() const { return nodes_; }
  std::size_t max_depth() const { return max_depth_; }
  std::size_t option_count() const { return option_count_; }
  std::size_t min_leaf_size() const { return min_leaf_size_; }
  std::size_t sample_count() const { return nodes_.empty() ? 0 : root().sample_indices.size(); }

  /// Id of the leaf reached by routing `config` down the split predicates.
  std::size_t leaf_for(std::span<const double> config) const;

  void write(std::ostream& out) const;
  static CartTree read(DocumentReader& in);

  bool operator==(const CartTree&) const = default;

 private:
  std::vector<CartNode> nodes_;
  std::size_t max_depth_ = 0;
  std::size_t option_count_ = 0;
  std::size_t min_leaf_size_ = 2;
};

/// Mean of targets[i] over `indices`, accumulated in the given order. Returns
/// the common value exactly when all members are equal.
double subset_mean(std::span<const double> targets, std::span<const std::size_t> indices);

/// Two-pass mean squared deviation from the subset mean; exactly 0 for a
/// constant subset.
double subset_mse(std::span<const double> targets, std::span<const std::size_t> indices);

/// Split of the node holding `indices` (ascending) that minimizes
/// MSE(left) + MSE(right) over every option and every midpoint between
/// consecutive distinct values, subject to both sides holding at least
/// `min_leaf_size` samples. Ties go to the lowest option, then the lowest
/// threshold. Absent for pure or too-small nodes or when nothing is admissible.
std::optional<SplitCandidate> best_split(std::span<const std::size_t> indices,
                                         const std::vector<Row>& features,
                                         std::span<const double> targets,
                                         std::size_t min_leaf_size = 2);

/// Greedy recursive growth until a node is pure or smaller than
/// 2 * min_leaf_size. No pruning.
CartTree train_cart(const std::vector<Row>& features, std::span<const double> targets,
                    std::size_t min_leaf_size = 2);
CartTree train_cart(const TrainingSet& train, std::size_t min_leaf_size = 2);

struct Division {
  std::vector<std::size_t> sample_indices;
  std::size_t label = 0;
  double h = 0.0;  // MSE around the division mean
  double z = 0.0;  // -(sample count)
  std::size_t node = 0;  // generating tree node

  bool operator==(const Division&) const = default;
};

struct DivisionSet {
  std::size_t depth = 0;
  std::vector<Division> divisions;
  std::size_t premerge_count = 0;

  bool operator==(const DivisionSet&) const = default;
};

/// Leaves shallower than d plus every node at depth d, left to right. A
/// division with fewer than `min_samples` members is merged with its sibling
/// (the whole parent node), cascading upward while the result stays small.
DivisionSet extract_divisions(const CartTree& tree, std::size_t d, std::size_t min_samples);

/// Mean performance of the leaf reached by `config`. Diagnostic only.
double predict_mean(const CartTree& tree, std::span<const double> config);

}  // namespace dal
