#include "dal/cart.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

#include "dal/document.hpp"
#include "dal/error.hpp"

namespace dal {

double subset_mean(std::span<const double> targets, std::span<const std::size_t> indices) {
  if (indices.empty()) return 0.0;
  const double first = targets[indices.front()];
  bool constant = true;
  double sum = 0.0;
  for (std::size_t i : indices) {
    sum += targets[i];
    constant = constant && targets[i] == first;
  }
  return constant ? first : sum / static_cast<double>(indices.size());
}

double subset_mse(std::span<const double> targets, std::span<const std::size_t> indices) {
  if (indices.empty()) return 0.0;
  const double mean = subset_mean(targets, indices);
  double ss = 0.0;
  for (std::size_t i : indices) {
    const double dev = targets[i] - mean;
    ss += dev * dev;
  }
  return ss / static_cast<double>(indices.size());
}

namespace {

bool is_pure(std::span<const double> targets, std::span<const std::size_t> indices) {
  return std::all_of(indices.begin(), indices.end(),
                     [&](std::size_t i) { return targets[i] == targets[indices.front()]; });
}

double midpoint(double lo, double hi) {
  double t = 0.5 * (lo + hi);
  return t < hi ? t : lo;
}

struct RawCandidate {
  std::size_t option;
  std::size_t cut;  // left = first `cut` entries of the sorted order
  double threshold;
  double approx_loss;
};

}  // namespace

std::optional<SplitCandidate> best_split(std::span<const std::size_t> indices, const std::vector<Row>& features,
                                         std::span<const double> targets, std::size_t min_leaf_size) {
  const std::size_t n = indices.size();
  min_leaf_size = std::max<std::size_t>(min_leaf_size, 1);
  if (n < 2 * min_leaf_size || is_pure(targets, indices)) return std::nullopt;
  const std::size_t option_count = features[indices.front()].size();

  // Screening pass: prefix sums over values centered on the node mean. The
  // near-optimal survivors are then re-scored with the two-pass formula so
  // the chosen split is optimal under the same arithmetic as subset_mse.
  const double node_mean = subset_mean(targets, indices);
  const double node_mse = subset_mse(targets, indices);

  std::vector<std::vector<std::size_t>> orders(option_count);
  std::vector<RawCandidate> raw;
  std::vector<double> s1(n + 1), s2(n + 1);
  for (std::size_t j = 0; j < option_count; ++j) {
    auto& order = orders[j];
    order.assign(indices.begin(), indices.end());
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return features[a][j] < features[b][j]; });
    for (std::size_t k = 0; k < n; ++k) {
      const double c = targets[order[k]] - node_mean;
      s1[k + 1] = s1[k] + c;
      s2[k + 1] = s2[k] + c * c;
    }
    for (std::size_t k = min_leaf_size; k + min_leaf_size <= n; ++k) {
      const double lo = features[order[k - 1]][j];
      const double hi = features[order[k]][j];
      if (!(lo < hi)) continue;
      const double nl = static_cast<double>(k);
      const double nr = static_cast<double>(n - k);
      const double sr1 = s1[n] - s1[k];
      const double sr2 = s2[n] - s2[k];
      const double loss = (s2[k] - s1[k] * s1[k] / nl) / nl + (sr2 - sr1 * sr1 / nr) / nr;
      raw.push_back({j, k, midpoint(lo, hi), loss});
    }
  }
  if (raw.empty()) return std::nullopt;

  double approx_min = std::numeric_limits<double>::infinity();
  for (const auto& c : raw) approx_min = std::min(approx_min, c.approx_loss);
  const double tolerance = 1e-7 * node_mse + 1e-12 * std::abs(approx_min);

  std::optional<SplitCandidate> best;
  std::vector<std::size_t> left, right;
  for (const auto& c : raw) {
    if (c.approx_loss > approx_min + tolerance) continue;
    const auto& order = orders[c.option];
    left.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(c.cut));
    right.assign(order.begin() + static_cast<std::ptrdiff_t>(c.cut), order.end());
    std::sort(left.begin(), left.end());
    std::sort(right.begin(), right.end());
    const double loss = subset_mse(targets, left) + subset_mse(targets, right);
    // raw is ordered by (option, threshold), so strict < keeps the tie-break
    if (!best || loss < best->loss) best = SplitCandidate{{c.option, c.threshold}, loss};
  }
  return best;
}

CartTree::CartTree(std::vector<CartNode> nodes, std::size_t option_count, std::size_t min_leaf_size)
    : nodes_(std::move(nodes)), option_count_(option_count), min_leaf_size_(min_leaf_size) {
  if (nodes_.empty()) throw Error(ErrorCode::CorruptDocument, "tree has no nodes");
  for (const auto& n : nodes_) max_depth_ = std::max(max_depth_, n.depth);
}

namespace {

void grow(std::vector<CartNode>& nodes, std::size_t id, const std::vector<Row>& features,
          std::span<const double> targets, std::size_t min_leaf_size) {
  auto split = best_split(nodes[id].sample_indices, features, targets, min_leaf_size);
  if (!split) return;

  std::vector<std::size_t> left_idx, right_idx;
  for (std::size_t i : nodes[id].sample_indices) {
    (features[i][split->split.option_index] <= split->split.threshold ? left_idx : right_idx).push_back(i);
  }
  nodes[id].split = split->split;

  auto make_child = [&](std::vector<std::size_t> members) {
    CartNode child;
    child.depth = nodes[id].depth + 1;
    child.parent = id;
    child.mean_performance = subset_mean(targets, members);
    child.mse = subset_mse(targets, members);
    child.sample_indices = std::move(members);
    nodes.push_back(std::move(child));
    return nodes.size() - 1;
  };

  const std::size_t l = make_child(std::move(left_idx));
  nodes[id].left = l;
  grow(nodes, l, features, targets, min_leaf_size);
  const std::size_t r = make_child(std::move(right_idx));
  nodes[id].right = r;
  grow(nodes, r, features, targets, min_leaf_size);
}

}  // namespace

CartTree train_cart(const std::vector<Row>& features, std::span<const double> targets, std::size_t min_leaf_size) {
  if (features.empty() || targets.empty()) throw Error(ErrorCode::EmptyTrainingSet, "no training samples");
  if (features.size() != targets.size()) throw Error(ErrorCode::LengthMismatch, "features and targets differ in length");
  const std::size_t option_count = features.front().size();
  for (const auto& row : features) {
    if (row.size() != option_count) throw Error(ErrorCode::DimensionMismatch, "ragged feature rows");
  }

  CartNode root;
  root.sample_indices.resize(targets.size());
  std::iota(root.sample_indices.begin(), root.sample_indices.end(), std::size_t{0});
  root.mean_performance = subset_mean(targets, root.sample_indices);
  root.mse = subset_mse(targets, root.sample_indices);

  std::vector<CartNode> nodes;
  nodes.push_back(std::move(root));
  grow(nodes, 0, features, targets, min_leaf_size);
  return CartTree(std::move(nodes), option_count, min_leaf_size);
}

CartTree train_cart(const TrainingSet& train, std::size_t min_leaf_size) {
  return train_cart(train.features, train.targets, min_leaf_size);
}

std::size_t CartTree::leaf_for(std::span<const double> config) const {
  if (config.size() != option_count_) {
    throw Error(ErrorCode::DimensionMismatch, "configuration has " + std::to_string(config.size()) +
                                                  " options, tree expects " + std::to_string(option_count_));
  }
  std::size_t id = 0;
  while (!nodes_[id].is_leaf()) {
    const auto& s = *nodes_[id].split;
    id = config[s.option_index] <= s.threshold ? *nodes_[id].left : *nodes_[id].right;
  }
  return id;
}

double predict_mean(const CartTree& tree, std::span<const double> config) {
  return tree.node(tree.leaf_for(config)).mean_performance;
}

namespace {

std::size_t count_premerge(const CartTree& tree, std::size_t id, std::size_t d) {
  const auto& n = tree.node(id);
  if (n.is_leaf() || n.depth == d) return 1;
  return count_premerge(tree, *n.left, d) + count_premerge(tree, *n.right, d);
}

std::vector<std::size_t> collect(const CartTree& tree, std::size_t id, std::size_t d, std::size_t min_samples) {
  const auto& n = tree.node(id);
  if (n.is_leaf() || n.depth == d) return {id};
  auto left = collect(tree, *n.left, d, min_samples);
  auto right = collect(tree, *n.right, d, min_samples);
  // A child result is either one node (possibly small) or several nodes that
  // all meet the minimum, so only the single-node case can need merging.
  auto undersized = [&](const std::vector<std::size_t>& part) {
    return part.size() == 1 && tree.node(part.front()).sample_indices.size() < min_samples;
  };
  if (undersized(left) || undersized(right)) return {id};
  left.insert(left.end(), right.begin(), right.end());
  return left;
}

}  // namespace

DivisionSet extract_divisions(const CartTree& tree, std::size_t d, std::size_t min_samples) {
  if (d > tree.max_depth()) {
    throw Error(ErrorCode::DepthExceedsTree, "depth " + std::to_string(d) + " exceeds tree depth " +
                                                 std::to_string(tree.max_depth()));
  }
  DivisionSet set;
  set.depth = d;
  set.premerge_count = count_premerge(tree, 0, d);
  for (std::size_t id : collect(tree, 0, d, min_samples)) {
    const auto& n = tree.node(id);
    Division div;
    div.sample_indices = n.sample_indices;
    div.label = set.divisions.size();
    div.h = n.mse;
    div.z = -static_cast<double>(n.sample_indices.size());
    div.node = id;
    set.divisions.push_back(std::move(div));
  }
  return set;
}

void CartTree::write(std::ostream& out) const {
  out << "cart-tree 1\n";
  out << "option_count " << option_count_ << " min_leaf " << min_leaf_size_ << " nodes " << nodes_.size() << '\n';
  for (std::size_t id = 0; id < nodes_.size(); ++id) {
    const auto& n = nodes_[id];
    out << "node " << id << " depth " << n.depth << " parent ";
    if (n.parent) out << *n.parent; else out << "-";
    out << " mean ";
    write_real(out, n.mean_performance);
    out << " mse ";
    write_real(out, n.mse);
    if (n.split) {
      out << " split " << n.split->option_index << ' ';
      write_real(out, n.split->threshold);
      out << " left " << *n.left << " right " << *n.right;
    } else {
      out << " leaf";
    }
    out << " samples " << n.sample_indices.size();
    for (std::size_t i : n.sample_indices) out << ' ' << i;
    out << '\n';
  }
}

CartTree CartTree::read(DocumentReader& in) {
  in.expect("cart-tree");
  if (in.word() != "1") throw Error(ErrorCode::VersionMismatch, "unsupported cart-tree version");
  in.expect("option_count");
  const std::size_t option_count = in.count();
  in.expect("min_leaf");
  const std::size_t min_leaf = in.count();
  in.expect("nodes");
  const std::size_t node_count = in.count();
  if (node_count == 0) throw Error(ErrorCode::CorruptDocument, "tree has no nodes");

  std::vector<CartNode> nodes(node_count);
  auto checked_id = [&](std::size_t id) {
    if (id >= node_count) throw Error(ErrorCode::CorruptDocument, "node reference out of range");
    return id;
  };
  for (std::size_t id = 0; id < node_count; ++id) {
    auto& n = nodes[id];
    in.expect("node");
    if (in.count() != id) throw Error(ErrorCode::CorruptDocument, "nodes out of order");
    in.expect("depth");
    n.depth = in.count();
    in.expect("parent");
    std::string parent = in.word();
    if (parent != "-") {
      try {
        n.parent = checked_id(std::stoull(parent));
      } catch (const std::logic_error&) {
        throw Error(ErrorCode::CorruptDocument, "bad parent reference '" + parent + "'");
      }
    }
    in.expect("mean");
    n.mean_performance = in.real();
    in.expect("mse");
    n.mse = in.real();
    std::string kind = in.word();
    if (kind == "split") {
      SplitRecord s;
      s.option_index = in.count();
      if (s.option_index >= option_count) throw Error(ErrorCode::CorruptDocument, "split option out of range");
      s.threshold = in.real();
      n.split = s;
      in.expect("left");
      n.left = checked_id(in.count());
      in.expect("right");
      n.right = checked_id(in.count());
      if (*n.left <= id || *n.right <= id) throw Error(ErrorCode::CorruptDocument, "child precedes its parent");
    } else if (kind != "leaf") {
      throw Error(ErrorCode::CorruptDocument, "expected 'split' or 'leaf', found '" + kind + "'");
    }
    in.expect("samples");
    const std::size_t m = in.count();
    n.sample_indices.resize(m);
    for (auto& i : n.sample_indices) i = in.count();
  }
  return CartTree(std::move(nodes), option_count, min_leaf);
}

}  // namespace dal
