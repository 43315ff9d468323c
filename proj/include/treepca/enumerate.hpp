#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "treepca/line.hpp"
#include "treepca/tree.hpp"

namespace treepca {

/// Depth-first walk over every line from `start` within `sup`, each visited
/// exactly once, children explored in ascending-label order. The visitor
/// receives the line and whether it is maximal; returning false aborts.
/// Returns false if the walk was aborted.
inline bool visit_lines(const BinaryTree& sup, const BinaryTree& start, int window,
                        const std::function<bool(const KTreeLine&, bool)>& fn) {
  require_start_within(start, sup);
  KTreeLine line{start, {}, window};
  const std::function<bool()> rec = [&]() -> bool {
    const auto opts = admissible_extensions(line, sup);
    if (!fn(line, opts.empty())) return false;
    for (NodeId v : opts) {
      line.added.push_back(v);
      const bool keep = rec();
      line.added.pop_back();
      if (!keep) return false;
    }
    return true;
  };
  return rec();
}

/// Number of 2-tree-lines grouped by the level of their deepest added node;
/// index 1 counts the trivial (nothing added) line. Index 0 unused.
inline std::vector<std::uint64_t> count_lines_by_deepest_level(const BinaryTree& sup, const BinaryTree& start) {
  std::vector<std::uint64_t> counts(static_cast<std::size_t>(sup.max_level()) + 1, 0);
  visit_lines(sup, start, 2, [&](const KTreeLine& line, bool) {
    int deepest = 1;
    for (NodeId v : line.added) deepest = std::max(deepest, static_cast<int>(std::bit_width(v)));
    ++counts[static_cast<std::size_t>(deepest)];
    return true;
  });
  return counts;
}

/// f(n): number of 2-tree-lines on the full binary tree whose deepest added
/// node sits at level n (n = 1 counts the trivial line). Recursion over
/// (f1, f2) = lines with one/two nodes on their deepest level:
///   f1(1) = 1, f2(1) = 0,
///   f1(n+1) = 2 f1(n) + 4 f2(n),
///   f2(n+1) = 2 f1(n) + 6 f2(n).
/// Throws std::overflow_error once the count leaves the 64-bit range.
inline long long count_2lines(int levels) {
  if (levels < 1) throw std::invalid_argument("levels must be >= 1");
  constexpr long long lim = std::numeric_limits<long long>::max();
  long long f1 = 1, f2 = 0;
  for (int n = 1; n < levels; ++n) {
    if (f2 > lim / 6 || f1 > (lim - 6 * f2) / 2) throw std::overflow_error("2-line count exceeds 64-bit range");
    const long long n1 = 2 * f1 + 4 * f2;
    const long long n2 = 2 * f1 + 6 * f2;
    f1 = n1; f2 = n2;
  }
  if (f1 > lim - f2) throw std::overflow_error("2-line count exceeds 64-bit range");
  return f1 + f2;
}

/// Number of maximal 2-tree-lines on the full tree with `levels` levels.
inline long long count_maximal_2lines(int levels) {
  if (levels < 1) throw std::invalid_argument("levels must be >= 1");
  constexpr long long lim = std::numeric_limits<long long>::max();
  long long f1 = 1, f2 = 0;
  for (int n = 1; n < levels; ++n) {
    if (f2 > lim / 6 || f1 > (lim - 6 * f2) / 2) throw std::overflow_error("2-line count exceeds 64-bit range");
    const long long n1 = 2 * f1 + 4 * f2;
    const long long n2 = 2 * f1 + 6 * f2;
    f1 = n1; f2 = n2;
  }
  return levels == 1 ? 1 : f2;  // maximal lines end with a sibling pair on the last level
}

/// Closed form of count_2lines: ((4+2*sqrt(3))^(n-1) + (4-2*sqrt(3))^(n-1))/2,
/// the eigenvalues of the recursion matrix [[2,4],[2,6]].
inline double count_2lines_closed_form(int levels) {
  if (levels < 1) throw std::invalid_argument("levels must be >= 1");
  const double s3 = std::sqrt(3.0);
  return 0.5 * (std::pow(4.0 + 2.0 * s3, levels - 1) + std::pow(4.0 - 2.0 * s3, levels - 1));
}

/// Maximum node count of a 2-tree-line from the root on the full binary tree
/// with m nodes: one branch all the way down (L levels), then the sibling
/// chain beside it (L - 1 more); 2*log2(m+1) - 1. m+1 must be a power of two.
inline int max_line_length(std::uint64_t m) {
  if (m == 0 || !std::has_single_bit(m + 1)) throw std::invalid_argument("m must be 2^L - 1 for a full tree");
  const int levels = std::bit_width(m + 1) - 1;
  return 2 * levels - 1;
}

struct BruteResult {
  std::vector<KTreeLine> lines;  // all co-optimal maximal lines, lexicographic order
  long long objective = 0;
  bool completed = false;
  std::uint64_t explored = 0;  // maximal lines evaluated
};

/// Exhaustive first/next principal 2-line: evaluates every maximal line's
/// joint objective with `fixed`. Deterministic; `time_limit_s` caps the walk
/// (incomplete result has completed = false).
inline BruteResult brute_force_pc_2line(const TreeDataset& data, const BinaryTree& start,
                                        const std::vector<KTreeLine>& fixed, double time_limit_s) {
  const WeightMap w(data);
  const auto deadline = std::chrono::steady_clock::now() + std::chrono::duration_cast<std::chrono::steady_clock::duration>(std::chrono::duration<double>(time_limit_s));
  BruteResult res;
  res.objective = std::numeric_limits<long long>::max();
  res.completed = true;
  std::vector<KTreeLine> joint = fixed;
  joint.emplace_back();
  visit_lines(w.support(), start, 2, [&](const KTreeLine& line, bool maximal) {
    if (!maximal) return true;
    if ((res.explored & 1023) == 0 && std::chrono::steady_clock::now() >= deadline) {
      res.completed = false;
      return false;
    }
    ++res.explored;
    long long obj;
    if (fixed.empty()) {
      obj = line_objective(data, line);
    } else {
      joint.back() = line;
      obj = line_objective(data, joint);
    }
    if (obj < res.objective) {
      res.objective = obj;
      res.lines.clear();
      res.lines.push_back(line);
    } else if (obj == res.objective) {
      res.lines.push_back(line);
    }
    return true;
  });
  // DFS yields sequences in lexicographic order already.
  return res;
}

}  // namespace treepca
