#include "dal/assign.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "dal/document.hpp"
#include "dal/error.hpp"
#include "dal/parallel.hpp"

namespace dal {

PseudoLabeledSet make_pseudo_labels(const DivisionSet& divisions, const std::vector<Row>& train_features) {
  const std::size_t n = train_features.size();
  constexpr std::size_t unassigned = static_cast<std::size_t>(-1);
  std::vector<std::size_t> labels(n, unassigned);
  for (const auto& div : divisions.divisions) {
    if (div.sample_indices.empty()) throw Error(ErrorCode::NonPartition, "empty division");
    for (std::size_t i : div.sample_indices) {
      if (i >= n || labels[i] != unassigned) {
        throw Error(ErrorCode::NonPartition, "divisions overlap or reference unknown samples");
      }
      labels[i] = div.label;
    }
  }
  if (std::find(labels.begin(), labels.end(), unassigned) != labels.end()) {
    throw Error(ErrorCode::NonPartition, "some training samples belong to no division");
  }
  return {train_features, std::move(labels), divisions.divisions.size()};
}

std::vector<std::size_t> BalancedSet::class_counts() const {
  std::vector<std::size_t> counts(class_count, 0);
  for (std::size_t l : labels) ++counts[l];
  return counts;
}

BalancedSet smote_balance(const PseudoLabeledSet& set, const std::vector<bool>& binary_options,
                          std::size_t k_neighbors, std::uint64_t seed) {
  if (set.features.empty()) throw Error(ErrorCode::EmptySet, "nothing to balance");
  const std::size_t p = set.features.front().size();
  if (binary_options.size() != p) throw Error(ErrorCode::DimensionMismatch, "binary option mask has wrong length");

  BalancedSet out;
  out.features = set.features;
  out.labels = set.labels;
  out.class_count = set.class_count;
  out.original_count = set.features.size();

  std::vector<std::vector<std::size_t>> members(set.class_count);
  for (std::size_t i = 0; i < set.labels.size(); ++i) members.at(set.labels[i]).push_back(i);
  std::size_t majority = 0;
  for (const auto& m : members) majority = std::max(majority, m.size());

  std::vector<double> lo(p), span(p);
  for (std::size_t j = 0; j < p; ++j) {
    double mn = set.features.front()[j], mx = mn;
    for (const auto& row : set.features) {
      mn = std::min(mn, row[j]);
      mx = std::max(mx, row[j]);
    }
    lo[j] = mn;
    span[j] = mx > mn ? mx - mn : 1.0;
  }
  auto distance2 = [&](const Row& a, const Row& b) {
    double d = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
      const double diff = (a[j] - b[j]) / span[j];
      d += diff * diff;
    }
    return d;
  };

  Rng rng(seed);
  for (std::size_t c = 0; c < set.class_count; ++c) {
    const auto& cls = members[c];
    if (cls.empty() || cls.size() == majority) continue;
    const std::size_t needed = majority - cls.size();

    if (cls.size() == 1) {
      out.duplicated_singletons.push_back(c);
      for (std::size_t s = 0; s < needed; ++s) {
        out.synthetic.push_back({out.features.size(), cls.front(), cls.front(), 0.0});
        out.features.push_back(set.features[cls.front()]);
        out.labels.push_back(c);
      }
      continue;
    }

    const std::size_t k = std::min(k_neighbors == 0 ? std::size_t{1} : k_neighbors, cls.size() - 1);
    std::vector<std::vector<std::size_t>> neighbors(cls.size());
    std::vector<std::pair<double, std::size_t>> dist;
    for (std::size_t a = 0; a < cls.size(); ++a) {
      dist.clear();
      for (std::size_t b = 0; b < cls.size(); ++b) {
        if (a != b) dist.emplace_back(distance2(set.features[cls[a]], set.features[cls[b]]), cls[b]);
      }
      std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
      for (std::size_t t = 0; t < k; ++t) neighbors[a].push_back(dist[t].second);
    }

    for (std::size_t s = 0; s < needed; ++s) {
      const std::size_t a = uniform_index(rng, cls.size());
      const std::size_t base = cls[a];
      const std::size_t nb = neighbors[a][uniform_index(rng, k)];
      const double u = uniform01_closed(rng);
      const Row& x = set.features[base];
      const Row& y = set.features[nb];
      Row synth(p);
      for (std::size_t j = 0; j < p; ++j) {
        double v = x[j] + u * (y[j] - x[j]);
        v = std::clamp(v, std::min(x[j], y[j]), std::max(x[j], y[j]));
        synth[j] = binary_options[j] ? std::round(v) : v;
      }
      out.synthetic.push_back({out.features.size(), base, nb, u});
      out.features.push_back(std::move(synth));
      out.labels.push_back(c);
    }
  }
  return out;
}

std::size_t ClassificationTree::predict(std::span<const double> config) const {
  std::size_t id = 0;
  while (!nodes[id].leaf) {
    id = config[nodes[id].feature] <= nodes[id].threshold ? nodes[id].left : nodes[id].right;
  }
  return nodes[id].label;
}

namespace {

std::size_t majority_label(const std::vector<std::size_t>& counts) {
  return static_cast<std::size_t>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

struct GiniSplit {
  std::size_t feature = 0;
  double threshold = 0.0;
  double impurity = 0.0;  // n * weighted child Gini
};

std::optional<GiniSplit> best_gini_split(const std::vector<Row>& features, std::span<const std::size_t> labels,
                                         std::size_t class_count, std::vector<std::size_t>& rows,
                                         std::size_t feature) {
  std::sort(rows.begin(), rows.end(), [&](std::size_t a, std::size_t b) {
    return features[a][feature] < features[b][feature] || (features[a][feature] == features[b][feature] && a < b);
  });
  const std::size_t n = rows.size();
  std::vector<double> left(class_count, 0.0), right(class_count, 0.0);
  for (std::size_t r : rows) right[labels[r]] += 1.0;
  double left_sq = 0.0, right_sq = 0.0;
  for (double c : right) right_sq += c * c;

  std::optional<GiniSplit> best;
  for (std::size_t k = 1; k < n; ++k) {
    const std::size_t label = labels[rows[k - 1]];
    left_sq += 2.0 * left[label] + 1.0;
    left[label] += 1.0;
    right_sq -= 2.0 * right[label] - 1.0;
    right[label] -= 1.0;
    const double lo = features[rows[k - 1]][feature];
    const double hi = features[rows[k]][feature];
    if (!(lo < hi)) continue;
    const double nl = static_cast<double>(k);
    const double nr = static_cast<double>(n - k);
    const double impurity = (nl - left_sq / nl) + (nr - right_sq / nr);
    if (!best || impurity < best->impurity) {
      double t = 0.5 * (lo + hi);
      if (!(t < hi)) t = lo;
      best = GiniSplit{feature, t, impurity};
    }
  }
  return best;
}

std::size_t grow_node(ClassificationTree& tree, const std::vector<Row>& features, std::span<const std::size_t> labels,
                      std::size_t class_count, std::vector<std::size_t> rows, std::size_t features_per_split,
                      Rng& rng) {
  const std::size_t id = tree.nodes.size();
  tree.nodes.emplace_back();
  std::vector<std::size_t> counts(class_count, 0);
  for (std::size_t r : rows) ++counts[labels[r]];
  tree.nodes[id].label = majority_label(counts);
  if (std::count_if(counts.begin(), counts.end(), [](std::size_t c) { return c > 0; }) <= 1) return id;

  const std::size_t p = features.front().size();
  std::vector<std::size_t> order(p);
  std::iota(order.begin(), order.end(), std::size_t{0});
  shuffle(std::span(order), rng);

  std::optional<GiniSplit> best;
  for (std::size_t inspected = 0; inspected < p; ++inspected) {
    if (inspected >= features_per_split && best) break;
    auto candidate = best_gini_split(features, labels, class_count, rows, order[inspected]);
    if (candidate && (!best || candidate->impurity < best->impurity)) best = candidate;
  }
  if (!best) return id;  // identical feature vectors with different labels

  std::vector<std::size_t> left_rows, right_rows;
  for (std::size_t r : rows) (features[r][best->feature] <= best->threshold ? left_rows : right_rows).push_back(r);
  rows.clear();
  rows.shrink_to_fit();

  const std::size_t l = grow_node(tree, features, labels, class_count, std::move(left_rows), features_per_split, rng);
  const std::size_t r = grow_node(tree, features, labels, class_count, std::move(right_rows), features_per_split, rng);
  auto& node = tree.nodes[id];
  node.leaf = false;
  node.feature = best->feature;
  node.threshold = best->threshold;
  node.left = l;
  node.right = r;
  return id;
}

}  // namespace

ClassificationTree grow_classification_tree(const std::vector<Row>& features, std::span<const std::size_t> labels,
                                            std::size_t class_count, std::vector<std::size_t> rows,
                                            std::size_t features_per_split, Rng& rng) {
  if (rows.empty()) throw Error(ErrorCode::EmptySet, "classification tree needs rows");
  ClassificationTree tree;
  grow_node(tree, features, labels, class_count, std::move(rows), std::max<std::size_t>(features_per_split, 1), rng);
  return tree;
}

ForestClassifier ForestClassifier::constant(std::size_t option_count, std::size_t label) {
  ForestClassifier f;
  f.option_count_ = option_count;
  f.class_count_ = label + 1;
  f.constant_label_ = label;
  return f;
}

std::size_t ForestClassifier::predict(std::span<const double> config) const {
  if (config.size() != option_count_) {
    throw Error(ErrorCode::DimensionMismatch, "configuration has " + std::to_string(config.size()) +
                                                  " options, classifier expects " + std::to_string(option_count_));
  }
  if (trees_.empty()) return constant_label_;
  std::vector<std::size_t> votes(class_count_, 0);
  for (const auto& t : trees_) ++votes[t.predict(config)];
  return majority_label(votes);
}

ForestClassifier train_forest(const BalancedSet& set, std::size_t tree_count, std::uint64_t seed, std::size_t jobs) {
  if (set.features.empty()) throw Error(ErrorCode::EmptySet, "cannot train a classifier on no rows");
  const std::size_t p = set.features.front().size();
  std::vector<std::size_t> counts = set.class_counts();
  const auto nonempty = std::count_if(counts.begin(), counts.end(), [](std::size_t c) { return c > 0; });
  if (nonempty <= 1) return ForestClassifier::constant(p, set.labels.front());

  ForestClassifier forest;
  forest.option_count_ = p;
  forest.class_count_ = set.class_count;
  forest.trees_.resize(std::max<std::size_t>(tree_count, 1));
  const std::size_t mtry = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(p)))));
  const std::size_t n = set.features.size();
  parallel_for(forest.trees_.size(), jobs, [&](std::size_t t) {
    const std::uint64_t tree_seed = derive_seed(seed, {t});
    Rng rng(tree_seed);
    std::vector<std::size_t> rows(n);
    for (auto& r : rows) r = uniform_index(rng, n);
    auto tree = grow_classification_tree(set.features, set.labels, set.class_count, std::move(rows), mtry, rng);
    tree.seed = tree_seed;
    forest.trees_[t] = std::move(tree);
  });
  return forest;
}

std::size_t assign_division(const ForestClassifier& classifier, std::span<const double> config) {
  return classifier.predict(config);
}

void ForestClassifier::write(std::ostream& out) const {
  out << "forest 1 options " << option_count_ << " classes " << class_count_ << " constant " << constant_label_
      << " trees " << trees_.size() << '\n';
  for (const auto& t : trees_) {
    out << "tree " << t.seed << ' ' << t.nodes.size() << '\n';
    for (const auto& n : t.nodes) {
      if (n.leaf) {
        out << "L " << n.label << '\n';
      } else {
        out << "S " << n.label << ' ' << n.feature << ' ';
        write_real(out, n.threshold);
        out << ' ' << n.left << ' ' << n.right << '\n';
      }
    }
  }
}

ForestClassifier ForestClassifier::read(DocumentReader& in) {
  in.expect("forest");
  if (in.word() != "1") throw Error(ErrorCode::VersionMismatch, "unsupported forest version");
  ForestClassifier f;
  in.expect("options");
  f.option_count_ = in.count();
  in.expect("classes");
  f.class_count_ = in.count();
  in.expect("constant");
  f.constant_label_ = in.count();
  in.expect("trees");
  f.trees_.resize(in.count());
  for (auto& t : f.trees_) {
    in.expect("tree");
    t.seed = in.unsigned_integer();
    t.nodes.resize(in.count());
    for (std::size_t id = 0; id < t.nodes.size(); ++id) {
      auto& n = t.nodes[id];
      const std::string kind = in.word();
      if (kind == "L") {
        n.leaf = true;
        n.label = in.count();
      } else if (kind == "S") {
        n.leaf = false;
        n.label = in.count();
        n.feature = in.count();
        n.threshold = in.real();
        n.left = in.count();
        n.right = in.count();
        if (n.feature >= f.option_count_ || n.left <= id || n.right <= id || n.left >= t.nodes.size() ||
            n.right >= t.nodes.size()) {
          throw Error(ErrorCode::CorruptDocument, "forest node reference out of range");
        }
      } else {
        throw Error(ErrorCode::CorruptDocument, "bad forest node tag '" + kind + "'");
      }
      if (n.label >= f.class_count_) throw Error(ErrorCode::CorruptDocument, "forest label out of range");
    }
    if (t.nodes.empty()) throw Error(ErrorCode::CorruptDocument, "empty classification tree");
  }
  return f;
}

}  // namespace dal
