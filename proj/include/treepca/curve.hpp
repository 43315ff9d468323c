#pragma once

#include <algorithm>
#include <functional>
#include <limits>
#include <vector>

#include "treepca/line.hpp"
#include "treepca/tree.hpp"

namespace treepca {

/// A tree-curve: an unconstrained growth sequence. Each added node's parent
/// must already be present (in the start or earlier in the sequence); no
/// window restriction. Points are the prefixes, as for lines.
struct TreeCurve {
  BinaryTree start;
  std::vector<NodeId> added;
};

/// True when `added` is a valid growth order from `start` (parent present
/// before each node, no duplicates, nothing already in the start).
inline bool is_valid_growth_order(const BinaryTree& start, const std::vector<NodeId>& added) {
  std::vector<NodeId> present = start.nodes();
  auto has = [&](NodeId v) { return std::binary_search(present.begin(), present.end(), v); };
  for (NodeId v : added) {
    if (v == 0 || v > kMaxLabel || v == 1) return false;
    if (has(v) || !has(parent_raw(v))) return false;
    present.insert(std::upper_bound(present.begin(), present.end(), v), v);
  }
  return true;
}

inline TreeCurve make_curve(BinaryTree start, std::vector<NodeId> added) {
  if (!is_valid_growth_order(start, added)) throw std::invalid_argument("sequence is not a valid growth order");
  return TreeCurve{std::move(start), std::move(added)};
}

struct CurveProjection {
  std::size_t index = 0;
  long long dist = 0;
};

/// Same incremental scan as for lines; smallest index on ties.
inline CurveProjection project_onto_curve(const BinaryTree& t, const TreeCurve& c) {
  long long d = distance(t, c.start);
  CurveProjection best{0, d};
  for (std::size_t i = 0; i < c.added.size(); ++i) {
    d += t.contains(c.added[i]) ? -1 : +1;
    if (d < best.dist) best = {i + 1, d};
  }
  return best;
}

inline BinaryTree curve_point(const TreeCurve& c, std::size_t i) {
  std::vector<NodeId> ns = c.start.nodes();
  ns.insert(ns.end(), c.added.begin(), c.added.begin() + static_cast<std::ptrdiff_t>(i));
  std::sort(ns.begin(), ns.end());
  return BinaryTree::from_sorted_unchecked(std::move(ns));
}

namespace detail {

inline long long curve_objective_unchecked(const TreeDataset& data, const TreeCurve& c) {
  long long total = 0;
  for (const auto& t : data.trees) total += project_onto_curve(t, c).dist;
  return total;
}

}  // namespace detail

/// F(C,T): summed projection distances. The curve must be complete: its last
/// point is exactly the support tree.
inline long long curve_objective(const TreeDataset& data, const TreeCurve& c) {
  std::vector<NodeId> ns = c.start.nodes();
  ns.insert(ns.end(), c.added.begin(), c.added.end());
  std::sort(ns.begin(), ns.end());
  if (ns != support_tree(data).nodes())
    throw std::invalid_argument("curve is incomplete: it must end at the support tree");
  return detail::curve_objective_unchecked(data, c);
}

/// Weight-ordering heuristic: support nodes outside the start sorted by
/// descending weight, then ascending label. Weights never increase from
/// parent to child and parents have smaller labels, so this is always a
/// valid growth order.
inline TreeCurve heuristic_wo(const TreeDataset& data, const BinaryTree& start) {
  const WeightMap w(data);
  require_start_within(start, w.support());
  std::vector<NodeId> order;
  for (NodeId v : w.support().nodes())
    if (!start.contains(v)) order.push_back(v);
  std::stable_sort(order.begin(), order.end(), [&](NodeId a, NodeId b) {
    const long long wa = w.weight_of(a), wb = w.weight_of(b);
    return wa != wb ? wa > wb : a < b;
  });
  return TreeCurve{start, std::move(order)};
}

/// Greedy heuristic: repeatedly append the available node (parent already
/// present) that minimizes the partial curve's objective; smallest label on
/// ties.
inline TreeCurve heuristic_greedy(const TreeDataset& data, const BinaryTree& start) {
  const WeightMap w(data);
  const BinaryTree& sup = w.support();
  require_start_within(start, sup);
  TreeCurve c{start, {}};
  std::vector<NodeId> remaining;
  for (NodeId v : sup.nodes())
    if (!start.contains(v)) remaining.push_back(v);
  while (!remaining.empty()) {
    std::vector<NodeId> present = c.start.nodes();
    present.insert(present.end(), c.added.begin(), c.added.end());
    std::sort(present.begin(), present.end());
    NodeId pick = 0;
    long long best = std::numeric_limits<long long>::max();
    for (NodeId v : remaining) {
      if (!std::binary_search(present.begin(), present.end(), parent_raw(v))) continue;
      c.added.push_back(v);
      const long long obj = detail::curve_objective_unchecked(data, c);
      c.added.pop_back();
      if (obj < best) { best = obj; pick = v; }  // ascending scan: ties keep the smaller label
    }
    c.added.push_back(pick);
    remaining.erase(std::find(remaining.begin(), remaining.end(), pick));
  }
  return c;
}

/// Switching heuristic: first-improvement pair swaps in lexicographic (i, j)
/// order, restarting after every applied swap, until no swap is both a valid
/// growth order and a strict improvement. `initial` must be a complete valid
/// order; the default is ascending label.
inline TreeCurve heuristic_switch(const TreeDataset& data, const BinaryTree& start,
                                  std::vector<NodeId> initial = {}) {
  const WeightMap w(data);
  require_start_within(start, w.support());
  if (initial.empty()) {
    for (NodeId v : w.support().nodes())
      if (!start.contains(v)) initial.push_back(v);  // ascending = parents first
  }
  TreeCurve c = make_curve(start, std::move(initial));
  long long cur = curve_objective(data, c);  // also enforces completeness
  bool improved = true;
  while (improved) {
    improved = false;
    for (std::size_t i = 0; i + 1 < c.added.size() && !improved; ++i) {
      for (std::size_t j = i + 1; j < c.added.size() && !improved; ++j) {
        std::swap(c.added[i], c.added[j]);
        if (is_valid_growth_order(c.start, c.added)) {
          const long long obj = detail::curve_objective_unchecked(data, c);
          if (obj < cur) { cur = obj; improved = true; break; }
        }
        std::swap(c.added[i], c.added[j]);
      }
    }
  }
  return c;
}

/// Weight ordering refined by switching.
inline TreeCurve heuristic_wo_s(const TreeDataset& data, const BinaryTree& start) {
  TreeCurve wo = heuristic_wo(data, start);
  return heuristic_switch(data, start, std::move(wo.added));
}

/// Exact optimum over all complete growth orders, by exhaustive enumeration
/// in lexicographic order (first optimum found is kept, so ties resolve to
/// the lexicographically smallest order). Refuses instances with more than
/// `node_budget` nodes to place.
inline TreeCurve exhaustive_curve(const TreeDataset& data, const BinaryTree& start, int node_budget = 8) {
  const WeightMap w(data);
  const BinaryTree& sup = w.support();
  require_start_within(start, sup);
  std::vector<NodeId> todo;
  for (NodeId v : sup.nodes())
    if (!start.contains(v)) todo.push_back(v);
  if (todo.size() > static_cast<std::size_t>(node_budget))
    throw std::invalid_argument("instance needs " + std::to_string(todo.size()) +
                                " placements, above the exhaustive budget of " + std::to_string(node_budget));
  TreeCurve c{start, {}};
  std::vector<bool> used(todo.size(), false);
  std::vector<NodeId> best_order;
  long long best = std::numeric_limits<long long>::max();
  const std::function<void()> rec = [&]() {
    if (c.added.size() == todo.size()) {
      const long long obj = detail::curve_objective_unchecked(data, c);
      if (obj < best) { best = obj; best_order = c.added; }
      return;
    }
    std::vector<NodeId> present = c.start.nodes();
    present.insert(present.end(), c.added.begin(), c.added.end());
    std::sort(present.begin(), present.end());
    for (std::size_t i = 0; i < todo.size(); ++i) {
      if (used[i] || !std::binary_search(present.begin(), present.end(), parent_raw(todo[i]))) continue;
      used[i] = true;
      c.added.push_back(todo[i]);
      rec();
      c.added.pop_back();
      used[i] = false;
    }
  };
  rec();
  return TreeCurve{start, std::move(best_order)};
}

/// Heuristic quality as a percentage of the optimum: 100 * F_opt / F_heur.
/// Both objectives zero means the heuristic is exactly optimal: 100.
inline double performance_pct(long long heuristic_objective, long long optimal_objective) {
  if (heuristic_objective < 0 || optimal_objective < 0) throw std::invalid_argument("objectives must be non-negative");
  if (optimal_objective > heuristic_objective) throw std::invalid_argument("optimum cannot exceed the heuristic objective");
  if (heuristic_objective == 0) return 100.0;
  return 100.0 * static_cast<double>(optimal_objective) / static_cast<double>(heuristic_objective);
}

/// performance_pct on complete curves: both must cover the whole support.
inline double performance_pct(const TreeDataset& data, const TreeCurve& c, const TreeCurve& cstar) {
  const BinaryTree sup = support_tree(data);
  for (const TreeCurve* cv : {&c, &cstar})
    if (cv->start.size() + cv->added.size() != sup.size())
      throw std::invalid_argument("performance_pct requires complete curves covering the support");
  return performance_pct(curve_objective(data, c), curve_objective(data, cstar));
}

}  // namespace treepca
