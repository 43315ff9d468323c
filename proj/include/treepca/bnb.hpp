#pragma once

#include <chrono>
#include <functional>
#include <limits>
#include <vector>

#include "treepca/enumerate.hpp"
#include "treepca/line.hpp"
#include "treepca/tree.hpp"
#include "treepca/two_path.hpp"

namespace treepca {

struct BnbIteration {
  std::uint64_t created = 0;    // child partials generated this iteration
  std::uint64_t surviving = 0;  // pool size after bound-based pruning
  long long min_lb = 0;         // tightest lower bound over the pool
  long long min_ub = 0;         // best incumbent objective so far
};

struct BnbResult {
  std::vector<KTreeLine> lines;  // co-optimal maximal lines, lexicographic order
  long long objective = 0;       // optimal joint objective; incumbent value if !completed
  bool completed = false;
  long long lower_bound = 0;  // == objective when completed; else best proven bound
  long long upper_bound = 0;
  std::vector<BnbIteration> trace;
  std::uint64_t bounds_evaluated = 0;
};

namespace detail {

struct Partial {
  std::vector<NodeId> added;
  std::vector<NodeId> opts;  // admissible extensions, cached by evaluate
  long long lb = 0, ub = 0;
  bool maximal = false;
};

// Residual node weights given fixed earlier components:
// rw(v) = #{i : v in t_i and v not in U0_i}, where U0_i is tree i's union
// projection onto the fixed components. With no fixed components this is the
// plain weight map. base_const = sum_i |t_i \ U0_i|; then every maximal
// line K satisfies objective(K) >= base_const - sum_{v in K} rw(v).
struct ResidualWeights {
  std::vector<long long> rw;  // aligned with sup.nodes()
  long long base_const = 0;

  ResidualWeights(const TreeDataset& data, const WeightMap& w, const std::vector<KTreeLine>& fixed) {
    const auto& sup = w.support().nodes();
    rw.assign(sup.size(), 0);
    if (fixed.empty()) {
      for (std::size_t i = 0; i < sup.size(); ++i) rw[i] = w.weight_of(sup[i]);
      base_const = w.total();
      return;
    }
    for (const auto& t : data.trees) {
      const BinaryTree u0 = project_onto_union(t, fixed);
      for (NodeId v : t.nodes()) {
        if (u0.contains(v)) continue;
        ++base_const;
        const auto it = std::lower_bound(sup.begin(), sup.end(), v);
        ++rw[static_cast<std::size_t>(it - sup.begin())];
      }
    }
  }

  long long of(const BinaryTree& sup, NodeId v) const {
    const auto& ns = sup.nodes();
    const auto it = std::lower_bound(ns.begin(), ns.end(), v);
    if (it == ns.end() || *it != v) return 0;
    return rw[static_cast<std::size_t>(it - ns.begin())];
  }
};

// Root-start bound: any completion of a partial line collects a node set that
// is a 2-path through the partial's nodes, and once the window holds two
// nodes every later node descends from one of them. mp_weight maximizes the
// residual weight over exactly those 2-paths: a forward walk over the forced
// levels (occupancy = required nodes plus at most one window-descendant
// extra) glued to a memoized best-suffix table below the deepest forced
// level. Suffix values are exact until the memo cap, then fall back to the
// subtree weight sum — looser, still an upper relaxation.
struct RootBound {
  static constexpr std::size_t kMemoCap = 500'000;

  const BinaryTree& sup;
  const ResidualWeights& res;
  std::vector<long long> subtree;  // residual weight below each support node, inclusive

  struct OccKey {
    NodeId a = 0, b = 0;
    bool operator==(const OccKey&) const = default;
  };
  struct OccHash {
    std::size_t operator()(const OccKey& k) const {
      std::uint64_t h = (k.a + 0x9e3779b97f4a7c15ull) * 0xff51afd7ed558ccdull;
      h ^= (k.b + 0x9e3779b97f4a7c15ull) * 0xc4ceb9fe1a85ec53ull;
      return static_cast<std::size_t>(h ^ (h >> 33));
    }
  };
  std::unordered_map<OccKey, long long, OccHash> memo;

  RootBound(const BinaryTree& support, const ResidualWeights& weights) : sup(support), res(weights) {
    const auto& ns = sup.nodes();
    subtree.assign(ns.size(), 0);
    for (std::size_t i = ns.size(); i-- > 0;) {
      subtree[i] = res.rw[i];
      for (NodeId c : {left_child_raw(ns[i]), right_child_raw(ns[i])}) {
        const auto it = std::lower_bound(ns.begin(), ns.end(), c);
        if (it != ns.end() && *it == c) subtree[i] += subtree[static_cast<std::size_t>(it - ns.begin())];
      }
    }
  }

  long long rw(NodeId v) const { return res.of(sup, v); }

  long long subtree_of(NodeId v) const {
    const auto& ns = sup.nodes();
    const auto it = std::lower_bound(ns.begin(), ns.end(), v);
    return it == ns.end() || *it != v ? 0 : subtree[static_cast<std::size_t>(it - ns.begin())];
  }

  // Max residual weight of levels >= level(a) over 2-paths whose occupancy
  // there is {a} or {a, b}.
  long long suffix_best(NodeId a, NodeId b) {
    const OccKey key{a, b};
    if (const auto it = memo.find(key); it != memo.end()) return it->second;
    if (memo.size() >= kMemoCap) return subtree_of(a) + subtree_of(b);
    const long long own = rw(a) + (b != 0 ? rw(b) : 0);
    NodeId cand[4];
    int m = 0;
    for (NodeId p : {a, b})
      if (p != 0)
        for (NodeId c : {left_child_raw(p), right_child_raw(p)})
          if (sup.contains(c)) cand[m++] = c;
    long long deeper = 0;
    for (int i = 0; i < m; ++i) {
      deeper = std::max(deeper, suffix_best(cand[i], 0));
      for (int j = i + 1; j < m; ++j)
        deeper = std::max(deeper, suffix_best(std::min(cand[i], cand[j]), std::max(cand[i], cand[j])));
    }
    const long long value = own + deeper;
    memo.emplace(key, value);
    return value;
  }

  struct Occ {
    NodeId a = 0, b = 0;  // occupancy of the current level; a < b when both set
    long long w = 0;      // weight collected so far
  };

  static bool desc_or_self(NodeId anc, NodeId v) {
    const int d = level_of(v) - level_of(anc);
    return d >= 0 && (v >> d) == anc;
  }

  // `added` must come from a root start. Fills `mp_nodes` (when non-null)
  // with the argmax 2-path's node set.
  long long mp_weight(const std::vector<NodeId>& added, std::vector<NodeId>* mp_nodes = nullptr) {
    const bool restricted = added.size() >= 2;
    const NodeId wu = restricted ? added[added.size() - 2] : 0;
    const NodeId wv = restricted ? added.back() : 0;
    const auto allowed = [&](NodeId v) {
      return !restricted || desc_or_self(wu, v) || desc_or_self(wv, v);
    };

    int deepest = 1;
    for (NodeId v : added) deepest = std::max(deepest, level_of(v));
    std::vector<std::array<NodeId, 2>> req(static_cast<std::size_t>(deepest) + 1, {0, 0});
    for (NodeId v : added) {
      auto& r = req[static_cast<std::size_t>(level_of(v))];
      (r[0] == 0 ? r[0] : r[1]) = v;
      if (r[1] != 0 && r[0] > r[1]) std::swap(r[0], r[1]);
    }

    std::vector<std::vector<Occ>> walk(static_cast<std::size_t>(deepest) + 1);
    walk[1] = {Occ{1, 0, rw(1)}};
    const auto push = [](std::vector<Occ>& states, Occ o) {
      for (auto& s : states)
        if (s.a == o.a && s.b == o.b) {
          s.w = std::max(s.w, o.w);
          return;
        }
      states.push_back(o);
    };
    for (int l = 2; l <= deepest; ++l) {
      const auto [r0, r1] = req[static_cast<std::size_t>(l)];
      auto& states = walk[static_cast<std::size_t>(l)];
      for (const Occ& s : walk[static_cast<std::size_t>(l - 1)]) {
        if (r1 != 0) {
          push(states, Occ{r0, r1, s.w + rw(r0) + rw(r1)});
          continue;
        }
        push(states, Occ{r0, 0, s.w + rw(r0)});
        for (NodeId p : {s.a, s.b})
          if (p != 0)
            for (NodeId c : {left_child_raw(p), right_child_raw(p)})
              if (c != r0 && sup.contains(c) && allowed(c))
                push(states, Occ{std::min(c, r0), std::max(c, r0), s.w + rw(r0) + rw(c)});
      }
    }

    // Glue the free suffix below the deepest forced level.
    long long best = std::numeric_limits<long long>::min();
    Occ best_occ;
    NodeId best_hang[2] = {0, 0};
    for (const Occ& s : walk[static_cast<std::size_t>(deepest)]) {
      if (s.w > best) { best = s.w; best_occ = s; best_hang[0] = best_hang[1] = 0; }
      NodeId cand[4];
      int m = 0;
      for (NodeId p : {s.a, s.b})
        if (p != 0 && allowed(p))
          for (NodeId c : {left_child_raw(p), right_child_raw(p)})
            if (sup.contains(c)) cand[m++] = c;
      for (int i = 0; i < m; ++i) {
        if (const long long v = s.w + suffix_best(cand[i], 0); v > best) {
          best = v;
          best_occ = s;
          best_hang[0] = cand[i];
          best_hang[1] = 0;
        }
        for (int j = i + 1; j < m; ++j) {
          const NodeId x = std::min(cand[i], cand[j]), y = std::max(cand[i], cand[j]);
          if (const long long v = s.w + suffix_best(x, y); v > best) {
            best = v;
            best_occ = s;
            best_hang[0] = x;
            best_hang[1] = y;
          }
        }
      }
    }

    if (mp_nodes != nullptr) {
      mp_nodes->clear();
      reconstruct_prefix(req, best_occ, deepest, allowed, *mp_nodes);
      if (best_hang[0] != 0) reconstruct_suffix(best_hang[0], best_hang[1], *mp_nodes);
    }
    return best;
  }

 private:
  // Rebuild one argmax prefix: rerun the walk keeping predecessor links.
  template <class AllowedFn>
  void reconstruct_prefix(const std::vector<std::array<NodeId, 2>>& req, const Occ& target, int deepest,
                          const AllowedFn& allowed, std::vector<NodeId>& out) const {
    struct Node {
      Occ occ;
      int prev = -1;
    };
    std::vector<std::vector<Node>> walk(static_cast<std::size_t>(deepest) + 1);
    walk[1] = {Node{Occ{1, 0, rw(1)}, -1}};
    const auto push = [](std::vector<Node>& states, Node n) {
      for (auto& s : states)
        if (s.occ.a == n.occ.a && s.occ.b == n.occ.b) {
          if (n.occ.w > s.occ.w) s = n;
          return;
        }
      states.push_back(n);
    };
    for (int l = 2; l <= deepest; ++l) {
      const auto [r0, r1] = req[static_cast<std::size_t>(l)];
      auto& states = walk[static_cast<std::size_t>(l)];
      const auto& prev = walk[static_cast<std::size_t>(l - 1)];
      for (int pi = 0; pi < static_cast<int>(prev.size()); ++pi) {
        const Occ& s = prev[static_cast<std::size_t>(pi)].occ;
        if (r1 != 0) {
          push(states, Node{Occ{r0, r1, s.w + rw(r0) + rw(r1)}, pi});
          continue;
        }
        push(states, Node{Occ{r0, 0, s.w + rw(r0)}, pi});
        for (NodeId p : {s.a, s.b})
          if (p != 0)
            for (NodeId c : {left_child_raw(p), right_child_raw(p)})
              if (c != r0 && sup.contains(c) && allowed(c))
                push(states, Node{Occ{std::min(c, r0), std::max(c, r0), s.w + rw(r0) + rw(c)}, pi});
      }
    }
    int l = deepest, idx = -1;
    for (int i = 0; i < static_cast<int>(walk[static_cast<std::size_t>(l)].size()); ++i) {
      const auto& n = walk[static_cast<std::size_t>(l)][static_cast<std::size_t>(i)];
      if (n.occ.a == target.a && n.occ.b == target.b) { idx = i; break; }
    }
    for (; l >= 1 && idx >= 0; --l) {
      const auto& n = walk[static_cast<std::size_t>(l)][static_cast<std::size_t>(idx)];
      out.push_back(n.occ.a);
      if (n.occ.b != 0) out.push_back(n.occ.b);
      idx = n.prev;
    }
  }

  // Follow the memoized argmax downward from one hang-point occupancy.
  void reconstruct_suffix(NodeId a, NodeId b, std::vector<NodeId>& out) {
    out.push_back(a);
    if (b != 0) out.push_back(b);
    const long long total = suffix_best(a, b);
    const long long own = rw(a) + (b != 0 ? rw(b) : 0);
    if (total == own) return;
    NodeId cand[4];
    int m = 0;
    for (NodeId p : {a, b})
      if (p != 0)
        for (NodeId c : {left_child_raw(p), right_child_raw(p)})
          if (sup.contains(c)) cand[m++] = c;
    for (int i = 0; i < m; ++i) {
      if (suffix_best(cand[i], 0) + own == total) { reconstruct_suffix(cand[i], 0, out); return; }
      for (int j = i + 1; j < m; ++j) {
        const NodeId x = std::min(cand[i], cand[j]), y = std::max(cand[i], cand[j]);
        if (suffix_best(x, y) + own == total) { reconstruct_suffix(x, y, out); return; }
      }
    }
  }
};

}  // namespace detail

/// Branch & Bound over 2-tree-lines, exact given enough time. Minimizes the
/// joint objective with `fixed` (empty `fixed` = first component).
///
/// Bounds per partial K: the lower bound is base_const minus the largest
/// residual weight reachable by any completion of K. From a root start every
/// line's node set keeps at most two nodes per level and, once the window is
/// full, every later node descends from a window node — so that weight is
/// bounded by the maximum-weight window-restricted 2-path through K's nodes
/// (RootBound), and the ordered witness line through it supplies the upper
/// bound. From a general start the 2-path argument fails (a completion may
/// put three nodes on a level), so the bound falls back to the residual
/// weight of everything reachable below the window — weaker but sound.
/// Pruning drops K only when the incumbent is strictly below LB(K), so
/// co-optimal lines all survive.
inline BnbResult bb_pc_2line(const TreeDataset& data, const BinaryTree& start,
                             const std::vector<KTreeLine>& fixed, double time_limit_s) {
  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  const auto deadline = t0 + std::chrono::duration_cast<clock::duration>(std::chrono::duration<double>(time_limit_s));

  const WeightMap w(data);
  const BinaryTree& sup = w.support();
  require_start_within(start, sup);
  const detail::ResidualWeights res(data, w, fixed);
  const auto rw = [&](NodeId v) { return res.of(sup, v); };
  const bool root_start = start.size() == 1;

  std::vector<KTreeLine> joint = fixed;
  joint.emplace_back();
  const auto objective_of = [&](const KTreeLine& line) {
    if (fixed.empty()) return line_objective(data, line);
    joint.back() = line;
    return line_objective(data, joint);
  };

  BnbResult out;
  long long best_ub = std::numeric_limits<long long>::max();
  KTreeLine incumbent{start, {}, 2};

  // Residual weight of every support node below the window (or anywhere
  // outside the line while the window is not yet full): all any completion
  // could still collect in the general-start fallback.
  const auto fallback_future = [&](const KTreeLine& line, const std::vector<NodeId>& nodes) {
    long long sum = 0;
    if (line.added.size() < 2) {
      for (NodeId v : sup.nodes())
        if (!std::binary_search(nodes.begin(), nodes.end(), v)) sum += rw(v);
      return sum;
    }
    std::vector<NodeId> stack;
    for (std::size_t i = line.added.size() - 2; i < line.added.size(); ++i)
      for (NodeId c : {left_child_raw(line.added[i]), right_child_raw(line.added[i])})
        if (sup.contains(c)) stack.push_back(c);
    while (!stack.empty()) {
      const NodeId v = stack.back();
      stack.pop_back();
      sum += rw(v);
      for (NodeId c : {left_child_raw(v), right_child_raw(v)})
        if (sup.contains(c)) stack.push_back(c);
    }
    return sum;
  };

  detail::RootBound rootb(sup, res);

  const auto evaluate = [&](detail::Partial& p) {
    ++out.bounds_evaluated;
    KTreeLine line{start, p.added, 2};
    p.opts = admissible_extensions(line, sup);
    if (p.opts.empty()) {
      p.maximal = true;
      p.lb = p.ub = objective_of(line);
      if (p.ub < best_ub) { best_ub = p.ub; incumbent = line; }
      return;
    }
    if (root_start) {
      p.lb = res.base_const - rootb.mp_weight(p.added);
    } else {
      const auto nodes = line_nodes(line);
      long long fixed_part = 0;
      for (NodeId v : nodes) fixed_part += rw(v);
      p.lb = res.base_const - fixed_part - fallback_future(line, nodes);
    }
    // A witness completion can beat the incumbent only when the bound leaves
    // room, so skip the construction otherwise (the partial gets pruned).
    if (p.lb >= best_ub) {
      p.ub = std::numeric_limits<long long>::max();
      return;
    }
    KTreeLine witness{start, {}, 2};
    if (root_start) {
      std::vector<NodeId> mp_nodes;
      rootb.mp_weight(p.added, &mp_nodes);
      const TwoPath mp{BinaryTree::from_nodes(std::move(mp_nodes))};
      witness = two_path_to_maximal_line(mp, sup, start, rw);
    } else {
      witness = line;
      for (;;) {
        const auto ext = admissible_extensions(witness, sup);
        if (ext.empty()) break;
        NodeId pick = ext.front();
        for (NodeId v : ext)
          if (rw(v) > rw(pick)) pick = v;
        witness.added.push_back(pick);
      }
    }
    p.ub = objective_of(witness);
    if (p.ub < best_ub) { best_ub = p.ub; incumbent = witness; }
  };

  std::vector<detail::Partial> pool(1);
  evaluate(pool.front());
  long long min_lb = pool.front().lb;

  const auto finish_timeout = [&]() {
    out.completed = false;
    out.objective = best_ub;
    out.upper_bound = best_ub;
    out.lower_bound = std::min(min_lb, best_ub);
    out.lines = {incumbent};
  };

  for (;;) {
    bool all_maximal = true;
    for (const auto& p : pool)
      if (!p.maximal) { all_maximal = false; break; }
    if (all_maximal) {
      long long best = std::numeric_limits<long long>::max();
      for (const auto& p : pool) best = std::min(best, p.ub);
      for (auto& p : pool)
        if (p.ub == best) out.lines.push_back(KTreeLine{start, std::move(p.added), 2});
      std::sort(out.lines.begin(), out.lines.end(), [](const KTreeLine& a, const KTreeLine& b) {
        return std::lexicographical_compare(a.added.begin(), a.added.end(), b.added.begin(), b.added.end());
      });
      out.completed = true;
      out.objective = out.lower_bound = out.upper_bound = best;
      return out;
    }

    // Expand: K^i = carried maximal partials plus every admissible child.
    std::vector<detail::Partial> next;
    std::uint64_t expanded = 0;
    bool aborted = false;
    for (auto& p : pool) {
      if (p.maximal) { next.push_back(std::move(p)); continue; }
      for (NodeId v : p.opts) {
        detail::Partial child;
        child.added = p.added;
        child.added.push_back(v);
        evaluate(child);
        next.push_back(std::move(child));
        ++expanded;
        if ((expanded & 255) == 0 && clock::now() >= deadline) { aborted = true; break; }
      }
      if (aborted) break;
    }
    if (aborted) { finish_timeout(); return out; }
    const std::uint64_t created = next.size();

    // Prune on the incumbent: keep partials whose bound can still match it.
    std::vector<detail::Partial> survivors;
    survivors.reserve(next.size());
    min_lb = std::numeric_limits<long long>::max();
    for (auto& p : next) {
      if (p.lb > best_ub) continue;
      min_lb = std::min(min_lb, p.lb);
      survivors.push_back(std::move(p));
    }
    out.trace.push_back({created, survivors.size(), min_lb, best_ub});
    pool = std::move(survivors);
    if (clock::now() >= deadline) { finish_timeout(); return out; }
  }
}

inline BnbResult bb_first_pc_2line(const TreeDataset& data, const BinaryTree& start, double time_limit_s) {
  return bb_pc_2line(data, start, {}, time_limit_s);
}

/// Next principal 2-line given fixed earlier components; lexicographically
/// smallest co-optimal line. Throws if the time limit cut the search.
inline KTreeLine next_pc_2line(const TreeDataset& data, const BinaryTree& start,
                               const std::vector<KTreeLine>& fixed, double time_limit_s) {
  BnbResult r = bb_pc_2line(data, start, fixed, time_limit_s);
  if (!r.completed) throw std::runtime_error("branch-and-bound hit the time limit before proving optimality");
  return r.lines.front();
}

}  // namespace treepca
