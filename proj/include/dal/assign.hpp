#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "dal/cart.hpp"
#include "dal/dataset.hpp"
#include "dal/random.hpp"

namespace dal {

class DocumentReader;

/// Training configurations tagged with the label of the division holding
/// them. Performance values are deliberately absent.
struct PseudoLabeledSet {
  std::vector<Row> features;
  std::vector<std::size_t> labels;
  std::size_t class_count = 0;
};

PseudoLabeledSet make_pseudo_labels(const DivisionSet& divisions, const std::vector<Row>& train_features);

struct SyntheticOrigin {
  std::size_t row = 0;       // index of the synthetic row in the balanced set
  std::size_t base = 0;      // original row it was grown from
  std::size_t neighbor = 0;  // same-class neighbour it moved towards
  double u = 0.0;
};

struct BalancedSet {
  std::vector<Row> features;  // originals first, then synthetic rows by class
  std::vector<std::size_t> labels;
  std::size_t class_count = 0;
  std::size_t original_count = 0;
  std::vector<SyntheticOrigin> synthetic;
  /// Classes with a single member; those were padded by duplication.
  std::vector<std::size_t> duplicated_singletons;

  std::vector<std::size_t> class_counts() const;
};

/// SMOTE: every class is oversampled to the majority count. Each synthetic
/// row interpolates between a random member and one of its k nearest
/// same-class neighbours (Euclidean on min-max scaled features); binary
/// options are rounded back to {0, 1}.
BalancedSet smote_balance(const PseudoLabeledSet& set, const std::vector<bool>& binary_options,
                          std::size_t k_neighbors, std::uint64_t seed);

struct ClassNode {
  bool leaf = true;
  std::size_t label = 0;
  std::size_t feature = 0;
  double threshold = 0.0;
  std::size_t left = 0;
  std::size_t right = 0;

  bool operator==(const ClassNode&) const = default;
};

struct ClassificationTree {
  std::uint64_t seed = 0;
  std::vector<ClassNode> nodes;

  std::size_t predict(std::span<const double> config) const;
  bool operator==(const ClassificationTree&) const = default;
};

/// Gini tree over `rows` (may repeat) grown to purity, looking at a random
/// subset of `features_per_split` options per node and widening the search
/// when none of them separates the node.
ClassificationTree grow_classification_tree(const std::vector<Row>& features, std::span<const std::size_t> labels,
                                            std::size_t class_count, std::vector<std::size_t> rows,
                                            std::size_t features_per_split, Rng& rng);

class ForestClassifier {
 public:
  ForestClassifier() = default;
  static ForestClassifier constant(std::size_t option_count, std::size_t label);

  std::size_t option_count() const { return option_count_; }
  std::size_t class_count() const { return class_count_; }
  std::size_t tree_count() const { return trees_.size(); }
  const std::vector<ClassificationTree>& trees() const { return trees_; }
  bool is_constant() const { return trees_.empty(); }

  /// Majority vote, ties to the lowest label.
  std::size_t predict(std::span<const double> config) const;

  void write(std::ostream& out) const;
  static ForestClassifier read(DocumentReader& in);

  bool operator==(const ForestClassifier&) const = default;

 private:
  friend ForestClassifier train_forest(const BalancedSet&, std::size_t, std::uint64_t, std::size_t);

  std::size_t option_count_ = 0;
  std::size_t class_count_ = 1;
  std::size_t constant_label_ = 0;
  std::vector<ClassificationTree> trees_;
};

/// Bootstrap-resampled Gini trees with floor(sqrt(p)) candidate options per
/// split. A single-class set yields a constant classifier.
ForestClassifier train_forest(const BalancedSet& set, std::size_t tree_count, std::uint64_t seed,
                              std::size_t jobs = 1);

std::size_t assign_division(const ForestClassifier& classifier, std::span<const double> config);

}  // namespace dal
