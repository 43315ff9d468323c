#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace treepca {

using NodeId = std::uint64_t;

// Labels use the heap scheme: root 1, children of v are 2v and 2v+1.
// 53 levels keeps every label exactly representable in a double.
inline constexpr NodeId kMaxLabel = (NodeId{1} << 53) - 1;
inline constexpr int kMaxLevels = 53;

inline int level_of(NodeId v) {
  if (v == 0 || v > kMaxLabel) throw std::domain_error("node label out of range: " + std::to_string(v));
  return std::bit_width(v);
}

inline NodeId parent_of(NodeId v) {
  if (v <= 1 || v > kMaxLabel) throw std::domain_error("node has no parent: " + std::to_string(v));
  return v >> 1;
}

inline NodeId left_child(NodeId v) {
  if (v == 0 || 2 * v > kMaxLabel) throw std::domain_error("child label exceeds depth limit for node " + std::to_string(v));
  return 2 * v;
}

inline NodeId right_child(NodeId v) { return left_child(v) + 1; }

inline NodeId sibling_of(NodeId v) {
  if (v <= 1 || v > kMaxLabel) throw std::domain_error("node has no sibling: " + std::to_string(v));
  return v ^ 1;
}

// Unchecked variants for hot paths; label fits because v <= kMaxLabel < 2^63.
inline constexpr NodeId left_child_raw(NodeId v) { return 2 * v; }
inline constexpr NodeId right_child_raw(NodeId v) { return 2 * v + 1; }
inline constexpr NodeId parent_raw(NodeId v) { return v >> 1; }

/// Rooted binary tree as a parent-closed set of heap labels.
/// Invariant: nodes sorted ascending, unique, contains 1, closed under parent.
class BinaryTree {
 public:
  BinaryTree() : nodes_{1} {}

  static BinaryTree from_nodes(std::vector<NodeId> nodes) {
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
    if (nodes.empty()) throw std::invalid_argument("tree must contain the root node 1");
    if (nodes.front() != 1) throw std::invalid_argument("tree missing root; smallest label is " + std::to_string(nodes.front()));
    for (NodeId v : nodes) {
      if (v > kMaxLabel) throw std::invalid_argument("node label out of range: " + std::to_string(v));
      if (v > 1 && !std::binary_search(nodes.begin(), nodes.end(), parent_raw(v)))
        throw std::invalid_argument("tree is not parent-closed: node " + std::to_string(v) + " lacks parent " + std::to_string(parent_raw(v)));
    }
    BinaryTree t;
    t.nodes_ = std::move(nodes);
    return t;
  }

  // Caller guarantees the invariant (sorted, unique, parent-closed, rooted).
  static BinaryTree from_sorted_unchecked(std::vector<NodeId> nodes) {
    BinaryTree t;
    t.nodes_ = std::move(nodes);
    return t;
  }

  const std::vector<NodeId>& nodes() const { return nodes_; }
  std::size_t size() const { return nodes_.size(); }

  bool contains(NodeId v) const { return std::binary_search(nodes_.begin(), nodes_.end(), v); }

  int max_level() const { return std::bit_width(nodes_.back()); }

  bool is_leaf(NodeId v) const { return !contains(left_child_raw(v)) && !contains(right_child_raw(v)); }

  /// Leaves of this tree (no child present), ascending.
  std::vector<NodeId> leaves() const {
    std::vector<NodeId> out;
    for (NodeId v : nodes_)
      if (is_leaf(v)) out.push_back(v);
    return out;
  }

  friend bool operator==(const BinaryTree& a, const BinaryTree& b) { return a.nodes_ == b.nodes_; }

 private:
  std::vector<NodeId> nodes_;
};

/// Symmetric-difference (Hamming) distance |t1 \ t2| + |t2 \ t1|.
inline long long distance(const BinaryTree& a, const BinaryTree& b) {
  const auto& x = a.nodes();
  const auto& y = b.nodes();
  std::size_t i = 0, j = 0, common = 0;
  while (i < x.size() && j < y.size()) {
    if (x[i] == y[j]) { ++common; ++i; ++j; }
    else if (x[i] < y[j]) ++i;
    else ++j;
  }
  return static_cast<long long>(x.size() + y.size() - 2 * common);
}

struct TreeDataset {
  std::vector<BinaryTree> trees;
  std::vector<double> covariate;  // empty, or one value per tree
  bool correspondence_applied = false;
  std::string name;
};

/// Union of all dataset trees.
inline BinaryTree support_tree(const TreeDataset& data) {
  if (data.trees.empty()) throw std::invalid_argument("dataset has no trees");
  std::vector<NodeId> merged;
  for (const auto& t : data.trees) merged.insert(merged.end(), t.nodes().begin(), t.nodes().end());
  std::sort(merged.begin(), merged.end());
  merged.erase(std::unique(merged.begin(), merged.end()), merged.end());
  return BinaryTree::from_sorted_unchecked(std::move(merged));
}

/// Node weights over the support: w(v) = number of dataset trees containing v.
class WeightMap {
 public:
  WeightMap(const TreeDataset& data) : support_(support_tree(data)), counts_(support_.size(), 0) {
    const auto& sup = support_.nodes();
    for (const auto& t : data.trees) {
      std::size_t i = 0, j = 0;
      const auto& x = t.nodes();
      while (i < x.size()) {
        while (sup[j] < x[i]) ++j;  // x[i] is in sup, so j never runs off
        ++counts_[j]; ++i; ++j;
      }
    }
    for (long long c : counts_) total_ += c;
  }

  const BinaryTree& support() const { return support_; }

  long long weight_of(NodeId v) const {
    const auto& sup = support_.nodes();
    auto it = std::lower_bound(sup.begin(), sup.end(), v);
    if (it == sup.end() || *it != v) return 0;
    return counts_[static_cast<std::size_t>(it - sup.begin())];
  }

  /// Sum of all weights = sum of dataset tree sizes.
  long long total() const { return total_; }

 private:
  BinaryTree support_;
  std::vector<long long> counts_;
  long long total_ = 0;
};

/// Number of proper descendants of each node, keyed by node label.
inline std::unordered_map<NodeId, std::uint64_t> descendant_counts(const BinaryTree& t) {
  std::unordered_map<NodeId, std::uint64_t> desc;
  desc.reserve(t.size());
  const auto& ns = t.nodes();
  for (auto it = ns.rbegin(); it != ns.rend(); ++it) {  // children before parents
    NodeId v = *it;
    std::uint64_t d = 0;
    if (auto l = desc.find(left_child_raw(v)); l != desc.end()) d += 1 + l->second;
    if (auto r = desc.find(right_child_raw(v)); r != desc.end()) d += 1 + r->second;
    desc[v] = d;
  }
  return desc;
}

namespace detail {

inline std::uint64_t subtree_size(const BinaryTree& t, NodeId v) {
  if (!t.contains(v)) return 0;
  return 1 + subtree_size(t, left_child_raw(v)) + subtree_size(t, right_child_raw(v));
}

inline void correspond_rec(const BinaryTree& in, NodeId vin, NodeId vout, std::vector<NodeId>& out) {
  out.push_back(vout);
  const NodeId l = left_child_raw(vin), r = right_child_raw(vin);
  const bool hl = in.contains(l), hr = in.contains(r);
  if (!hl && !hr) return;
  const std::uint64_t sl = hl ? subtree_size(in, l) : 0;
  const std::uint64_t sr = hr ? subtree_size(in, r) : 0;
  // Strictly heavier right subtree moves to the left slot; ties keep order.
  const bool swap = sr > sl;
  if (hl) correspond_rec(in, l, swap ? right_child_raw(vout) : left_child_raw(vout), out);
  if (hr) correspond_rec(in, r, swap ? left_child_raw(vout) : right_child_raw(vout), out);
}

}  // namespace detail

/// Top-down descendant correspondence: at each node, swap the child subtrees
/// when the right one has strictly more nodes. Size-preserving relabeling.
inline BinaryTree descendant_correspondence(const BinaryTree& t) {
  std::vector<NodeId> out;
  out.reserve(t.size());
  detail::correspond_rec(t, 1, 1, out);
  std::sort(out.begin(), out.end());
  return BinaryTree::from_sorted_unchecked(std::move(out));
}

}  // namespace treepca
