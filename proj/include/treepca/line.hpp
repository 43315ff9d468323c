#pragma once

#include <algorithm>
#include <limits>
#include <optional>
#include <vector>

#include "treepca/tree.hpp"

namespace treepca {

/// A k-tree-line: a starting tree plus an ordered sequence of added nodes.
/// Each added node must be the child of one of the last `window` added nodes,
/// except while fewer than `window` nodes have been added, when it may be the
/// child of any node of the current tree. The line's points are the prefixes
/// start, start+a1, start+a1+a2, ...
struct KTreeLine {
  BinaryTree start;
  std::vector<NodeId> added;
  int window = 1;
};

/// Throws unless every start node lies in the support.
inline void require_start_within(const BinaryTree& start, const BinaryTree& sup) {
  for (NodeId v : start.nodes())
    if (!sup.contains(v))
      throw std::invalid_argument("start node " + std::to_string(v) + " is outside the support tree");
}

/// All nodes of the line's last (largest) tree, sorted.
inline std::vector<NodeId> line_nodes(const KTreeLine& k) {
  std::vector<NodeId> ns = k.start.nodes();
  ns.insert(ns.end(), k.added.begin(), k.added.end());
  std::sort(ns.begin(), ns.end());
  return ns;
}

/// The i-th point of the line: start plus the first `i` added nodes.
inline BinaryTree line_point(const KTreeLine& k, std::size_t i) {
  std::vector<NodeId> ns = k.start.nodes();
  ns.insert(ns.end(), k.added.begin(), k.added.begin() + static_cast<std::ptrdiff_t>(i));
  std::sort(ns.begin(), ns.end());
  return BinaryTree::from_sorted_unchecked(std::move(ns));
}

/// Nodes admissible as the next addition, ascending. `sup` bounds the search.
inline std::vector<NodeId> admissible_extensions(const KTreeLine& k, const BinaryTree& sup) {
  const std::vector<NodeId> current = line_nodes(k);
  auto in_current = [&](NodeId v) { return std::binary_search(current.begin(), current.end(), v); };
  std::vector<NodeId> out;
  auto consider = [&](NodeId parent) {
    for (NodeId c : {left_child_raw(parent), right_child_raw(parent)})
      if (sup.contains(c) && !in_current(c)) out.push_back(c);
  };
  if (k.added.size() < static_cast<std::size_t>(k.window)) {
    for (NodeId v : current) consider(v);
  } else {
    for (std::size_t i = k.added.size() - static_cast<std::size_t>(k.window); i < k.added.size(); ++i)
      consider(k.added[i]);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

inline bool is_maximal(const KTreeLine& k, const BinaryTree& sup) {
  return admissible_extensions(k, sup).empty();
}

/// Append `v`; throws if `v` is not admissible.
inline KTreeLine extend_line(const KTreeLine& k, NodeId v, const BinaryTree& sup) {
  const auto opts = admissible_extensions(k, sup);
  if (!std::binary_search(opts.begin(), opts.end(), v))
    throw std::invalid_argument("node " + std::to_string(v) + " is not an admissible extension");
  KTreeLine out = k;
  out.added.push_back(v);
  return out;
}

struct LineProjection {
  std::size_t index = 0;  // prefix length of the projected point
  long long dist = 0;
};

/// Project `t` onto the line: the point minimizing distance, smallest index
/// on ties. Incremental scan: appending node v changes the distance by -1 if
/// v is in t, else +1.
inline LineProjection project_onto_line(const BinaryTree& t, const KTreeLine& k) {
  long long d = distance(t, k.start);
  LineProjection best{0, d};
  for (std::size_t i = 0; i < k.added.size(); ++i) {
    d += t.contains(k.added[i]) ? -1 : +1;
    if (d < best.dist) best = {i + 1, d};
  }
  return best;
}

/// Union of the per-line projections of `t`. All lines must share a start.
inline BinaryTree project_onto_union(const BinaryTree& t, const std::vector<KTreeLine>& lines) {
  if (lines.empty()) throw std::invalid_argument("projection requires at least one line");
  for (const auto& k : lines)
    if (!(k.start == lines.front().start)) throw std::invalid_argument("all lines in a union must share the starting tree");
  std::vector<NodeId> merged;
  for (const auto& k : lines) {
    const auto proj = project_onto_line(t, k);
    merged.insert(merged.end(), k.start.nodes().begin(), k.start.nodes().end());
    merged.insert(merged.end(), k.added.begin(), k.added.begin() + static_cast<std::ptrdiff_t>(proj.index));
  }
  std::sort(merged.begin(), merged.end());
  merged.erase(std::unique(merged.begin(), merged.end()), merged.end());
  return BinaryTree::from_sorted_unchecked(std::move(merged));
}

/// Sum over the dataset of distances to the union projection.
inline long long line_objective(const TreeDataset& data, const std::vector<KTreeLine>& lines) {
  long long total = 0;
  for (const auto& t : data.trees) total += distance(t, project_onto_union(t, lines));
  return total;
}

inline long long line_objective(const TreeDataset& data, const KTreeLine& line) {
  long long total = 0;
  for (const auto& t : data.trees) total += project_onto_line(t, line).dist;
  return total;
}

namespace detail {

// Max weight of a downward chain starting at v (inclusive), within sup.
// Memo keyed by position in sup's node vector.
inline long long down_weight(const BinaryTree& sup, const WeightMap& w, NodeId v, std::vector<long long>& memo) {
  const auto& ns = sup.nodes();
  const auto idx = static_cast<std::size_t>(std::lower_bound(ns.begin(), ns.end(), v) - ns.begin());
  if (memo[idx] >= 0) return memo[idx];
  long long best = 0;
  for (NodeId c : {left_child_raw(v), right_child_raw(v)})
    if (sup.contains(c)) best = std::max(best, down_weight(sup, w, c, memo));
  return memo[idx] = w.weight_of(v) + best;
}

}  // namespace detail

/// First principal component among 1-tree-lines, exactly: along a descending
/// chain, membership in any data tree is prefix-closed, so the objective is
/// sum_i d(t_i, start) minus the chain's total weight; the optimum is the
/// maximum-weight downward chain. Ties at each step go to the smaller label.
inline KTreeLine first_pc_1line(const TreeDataset& data, const BinaryTree& start) {
  const WeightMap w(data);
  const BinaryTree& sup = w.support();
  require_start_within(start, sup);
  std::vector<long long> memo(sup.size(), -1);
  auto down = [&](NodeId v) { return detail::down_weight(sup, w, v, memo); };

  KTreeLine line{start, {}, 1};
  // First step may hang off any start node; later steps follow the chain.
  NodeId cur = 0;
  long long best = std::numeric_limits<long long>::min();
  for (NodeId s : start.nodes())
    for (NodeId c : {left_child_raw(s), right_child_raw(s)})
      if (sup.contains(c) && !start.contains(c) && down(c) > best) { best = down(c); cur = c; }
  if (cur == 0) return line;  // start already covers every admissible node
  line.added.push_back(cur);
  for (;;) {
    NodeId next = 0;
    long long nb = std::numeric_limits<long long>::min();
    for (NodeId c : {left_child_raw(cur), right_child_raw(cur)})
      if (sup.contains(c) && !start.contains(c) && down(c) > nb) { nb = down(c); next = c; }
    if (next == 0) break;
    line.added.push_back(next);
    cur = next;
  }
  return line;
}

/// Every maximal 1-tree-line from `start` within `sup`: one per support leaf
/// outside the start, its added sequence the leaf's ancestors below start.
inline std::vector<KTreeLine> maximal_one_lines(const BinaryTree& sup, const BinaryTree& start) {
  std::vector<KTreeLine> out;
  for (NodeId f : sup.leaves()) {
    if (start.contains(f)) continue;
    std::vector<NodeId> chain;
    for (NodeId v = f; !start.contains(v); v = parent_raw(v)) chain.push_back(v);
    std::reverse(chain.begin(), chain.end());
    out.push_back(KTreeLine{start, std::move(chain), 1});
  }
  return out;
}

/// Next 1-line principal component given fixed earlier components: the
/// maximal 1-line minimizing the joint (union-projection) objective.
/// Ties: lexicographically smallest added sequence.
inline KTreeLine next_pc_1line(const TreeDataset& data, const BinaryTree& start, const std::vector<KTreeLine>& fixed) {
  const WeightMap w(data);
  require_start_within(start, w.support());
  const auto candidates = maximal_one_lines(w.support(), start);
  if (candidates.empty()) return KTreeLine{start, {}, 1};
  std::vector<KTreeLine> joint = fixed;
  joint.emplace_back();
  const KTreeLine* best = nullptr;
  long long best_obj = std::numeric_limits<long long>::max();
  for (const auto& cand : candidates) {
    joint.back() = cand;
    const long long obj = line_objective(data, joint);
    const bool lex_less = best && std::lexicographical_compare(cand.added.begin(), cand.added.end(), best->added.begin(), best->added.end());
    if (!best || obj < best_obj || (obj == best_obj && lex_less)) {
      best_obj = obj;
      best = &cand;
    }
  }
  return *best;
}

}  // namespace treepca
