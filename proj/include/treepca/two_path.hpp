#pragma once

#include <array>
#include <functional>
#include <unordered_map>
#include <vector>

#include "treepca/line.hpp"
#include "treepca/tree.hpp"

namespace treepca {

/// Checks the "at most two nodes per level" property.
inline bool is_two_path(const BinaryTree& t) {
  int level = 0, count = 0;
  for (NodeId v : t.nodes()) {
    const int l = std::bit_width(v);
    if (l != level) { level = l; count = 0; }
    if (++count > 2) return false;
  }
  return true;
}

/// A rooted, parent-closed tree with at most two nodes on every level.
struct TwoPath {
  BinaryTree tree;

  static TwoPath from_tree(BinaryTree t) {
    if (!is_two_path(t)) throw std::invalid_argument("tree has a level with more than two nodes");
    return TwoPath{std::move(t)};
  }
};

/// Smallest parent-closed superset of `nodes` (ancestors down to the root).
inline std::vector<NodeId> parent_closure(const std::vector<NodeId>& nodes) {
  std::vector<NodeId> out;
  for (NodeId v : nodes)
    for (NodeId u = v; ; u = parent_raw(u)) {
      out.push_back(u);
      if (u == 1) break;
    }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

namespace detail {

struct PairState {
  int level;
  NodeId a, b;  // chosen nodes at `level`; 0 = unused slot; a < b when both set
  bool operator==(const PairState&) const = default;
};

struct PairStateHash {
  std::size_t operator()(const PairState& s) const {
    std::uint64_t h = 0x9e3779b97f4a7c15ull * (static_cast<std::uint64_t>(s.level) + 1);
    h ^= s.a + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    h ^= s.b + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    return static_cast<std::size_t>(h);
  }
};

// Suffix DP for the maximum-weight 2-path: value obtainable strictly below
// `level` when {a,b} are the chosen nodes at `level`. `required[l]` lists
// nodes that every feasible 2-path must contain at level l+1.
class TwoPathDp {
 public:
  TwoPathDp(const BinaryTree& sup, std::function<long long(NodeId)> weight, const std::vector<NodeId>& required)
      : sup_(sup), weight_(std::move(weight)) {
    max_level_ = sup.max_level();
    required_.assign(static_cast<std::size_t>(max_level_) + 2, {});
    for (NodeId v : required) {
      if (!sup.contains(v)) throw std::invalid_argument("required node " + std::to_string(v) + " is outside the support");
      auto& lvl = required_[static_cast<std::size_t>(std::bit_width(v))];
      lvl.push_back(v);
      if (lvl.size() > 2) throw std::invalid_argument("required nodes do not fit a 2-path: three at level " + std::to_string(std::bit_width(v)));
    }
    for (auto& lvl : required_) std::sort(lvl.begin(), lvl.end());
  }

  long long best_total() { return weight_(1) + below(1, 1, 0); }

  /// Nodes of the optimal 2-path; among optima, per-level choices are the
  /// lexicographically smallest node sets (shorter prefix wins).
  std::vector<NodeId> reconstruct() {
    std::vector<NodeId> out{1};
    int level = 1;
    NodeId a = 1, b = 0;
    while (level < max_level_ && a != 0) {
      const auto cands = child_candidates(a, b);
      const auto& req = required_at(level + 1);
      long long best = -1;
      std::array<NodeId, 2> pick{0, 0};
      int pick_n = -1;
      for_each_subset(cands, req, [&](const std::array<NodeId, 2>& s, int n, long long wsum) {
        const long long val = wsum + below(level + 1, s[0], n > 1 ? s[1] : 0);
        const bool better = val > best || (val == best && lex_less(s, n, pick, pick_n));
        if (better) { best = val; pick = s; pick_n = n; }
      });
      ++level;
      a = pick_n >= 1 ? pick[0] : 0;
      b = pick_n >= 2 ? pick[1] : 0;
      if (a != 0) out.push_back(a);
      if (b != 0) out.push_back(b);
    }
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  static bool lex_less(const std::array<NodeId, 2>& x, int xn, const std::array<NodeId, 2>& y, int yn) {
    return std::lexicographical_compare(x.begin(), x.begin() + xn, y.begin(), y.begin() + yn);
  }

  const std::vector<NodeId>& required_at(int level) const {
    static const std::vector<NodeId> none;
    if (level < 0 || level >= static_cast<int>(required_.size())) return none;
    return required_[static_cast<std::size_t>(level)];
  }

  std::vector<NodeId> child_candidates(NodeId a, NodeId b) const {
    std::vector<NodeId> c;
    for (NodeId p : {a, b})
      if (p != 0)
        for (NodeId v : {left_child_raw(p), right_child_raw(p)})
          if (sup_.contains(v)) c.push_back(v);
    std::sort(c.begin(), c.end());
    c.erase(std::unique(c.begin(), c.end()), c.end());
    return c;
  }

  // Enumerate subsets of `cands` with size <= 2 that contain all of `req`.
  void for_each_subset(const std::vector<NodeId>& cands, const std::vector<NodeId>& req,
                       const std::function<void(const std::array<NodeId, 2>&, int, long long)>& fn) const {
    const int n = static_cast<int>(cands.size());
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
      if (std::popcount(mask) > 2) continue;
      std::array<NodeId, 2> s{0, 0};
      int cnt = 0;
      long long wsum = 0;
      for (int i = 0; i < n; ++i)
        if (mask & (1u << i)) { s[static_cast<std::size_t>(cnt++)] = cands[static_cast<std::size_t>(i)]; wsum += weight_(cands[static_cast<std::size_t>(i)]); }
      bool ok = true;
      for (NodeId r : req)
        if (!((cnt >= 1 && s[0] == r) || (cnt >= 2 && s[1] == r))) { ok = false; break; }
      if (ok) fn(s, cnt, wsum);
    }
  }

  long long below(int level, NodeId a, NodeId b) {
    if (a == 0 || level >= max_level_) return 0;
    const PairState key{level, a, b};
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    const auto cands = child_candidates(a, b);
    const auto& req = required_at(level + 1);
    long long best = -1;
    for_each_subset(cands, req, [&](const std::array<NodeId, 2>& s, int n, long long wsum) {
      best = std::max(best, wsum + below(level + 1, s[0], n > 1 ? s[1] : 0));
    });
    // A feasible subset always exists: required nodes are children of
    // required parents, which the state is guaranteed to contain.
    return memo_[key] = best;
  }

  const BinaryTree& sup_;
  std::function<long long(NodeId)> weight_;
  std::vector<std::vector<NodeId>> required_;
  int max_level_ = 1;
  std::unordered_map<PairState, long long, PairStateHash> memo_;
};

}  // namespace detail

/// Maximum-weight 2-path within `sup` containing every node of `required`
/// (closed under parent; the root is always included). Throws if the closure
/// of `required` puts three nodes on a level.
inline TwoPath max_two_path(const BinaryTree& sup, const std::function<long long(NodeId)>& weight,
                            const std::vector<NodeId>& required) {
  const auto closed = parent_closure(required.empty() ? std::vector<NodeId>{1} : required);
  detail::TwoPathDp dp(sup, weight, closed);
  return TwoPath{BinaryTree::from_sorted_unchecked(dp.reconstruct())};
}

/// Weight of the maximum 2-path without materializing it.
inline long long max_two_path_weight(const BinaryTree& sup, const std::function<long long(NodeId)>& weight,
                                     const std::vector<NodeId>& required) {
  const auto closed = parent_closure(required.empty() ? std::vector<NodeId>{1} : required);
  detail::TwoPathDp dp(sup, weight, closed);
  return dp.best_total();
}

/// MP(K): maximum-weight 2-path containing K's added nodes and the root.
inline TwoPath max_two_path(const WeightMap& w, const KTreeLine& k) {
  return max_two_path(w.support(), [&](NodeId v) { return w.weight_of(v); }, k.added);
}

/// Orders the nodes of 2-path `p` beyond `start` into a valid 2-tree-line and
/// greedily extends it (max weight, then smallest label) until maximal.
/// The within-level order is fixed bottom-up: when a level gets two nodes,
/// the second one added must be the parent of the node added second on the
/// level below. Throws if no valid ordering exists for this start.
inline KTreeLine two_path_to_maximal_line(const TwoPath& p, const BinaryTree& sup, const BinaryTree& start,
                                          const std::function<long long(NodeId)>& weight) {
  // Group the nodes to add by level.
  std::vector<std::vector<NodeId>> by_level(static_cast<std::size_t>(kMaxLevels) + 2);
  int deepest = 0;
  for (NodeId v : p.tree.nodes()) {
    if (start.contains(v)) continue;
    const int l = std::bit_width(v);
    by_level[static_cast<std::size_t>(l)].push_back(v);
    deepest = std::max(deepest, l);
  }
  // Fix within-level order bottom-up.
  std::vector<std::vector<NodeId>> ordered(by_level.size());
  NodeId forced_second = 0;
  for (int l = deepest; l >= 1; --l) {
    auto& lvl = by_level[static_cast<std::size_t>(l)];
    if (lvl.empty()) { forced_second = 0; continue; }
    if (lvl.size() == 1) {
      ordered[static_cast<std::size_t>(l)] = {lvl[0]};
      forced_second = 0;  // a single node imposes no order above
      continue;
    }
    NodeId first = lvl[0], second = lvl[1];
    if (forced_second == lvl[0]) std::swap(first, second);
    ordered[static_cast<std::size_t>(l)] = {first, second};
    forced_second = parent_raw(second);
  }
  KTreeLine line{start, {}, 2};
  for (int l = 1; l <= deepest; ++l)
    for (NodeId v : ordered[static_cast<std::size_t>(l)]) {
      const auto opts = admissible_extensions(line, sup);
      if (!std::binary_search(opts.begin(), opts.end(), v))
        throw std::invalid_argument("2-path cannot be ordered into a line from this start");
      line.added.push_back(v);
    }
  // Greedy extension to maximality.
  for (;;) {
    const auto opts = admissible_extensions(line, sup);
    if (opts.empty()) break;
    NodeId pick = opts.front();
    long long best = weight(pick);
    for (NodeId v : opts)
      if (weight(v) > best) { best = weight(v); pick = v; }
    line.added.push_back(pick);
  }
  return line;
}

}  // namespace treepca
