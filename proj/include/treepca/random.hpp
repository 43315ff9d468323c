#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>

#include "treepca/tree.hpp"

namespace treepca {

/// SplitMix64 step; used to derive independent sub-seeds from one master seed.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

/// Deterministic RNG. Doubles come straight from the raw engine output
/// (53 bits), never through std::uniform_real_distribution, so streams are
/// identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : base_(seed) {
    std::uint64_t s = seed;
    engine_.seed(splitmix64(s));
  }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1).
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Independent child RNG; stream indices give reproducible fan-out.
  Rng child(std::uint64_t stream) const {
    std::uint64_t s = base_ ^ (0x632be59bd9b4e019ull * (stream + 1));
    return Rng(splitmix64(s));
  }

 private:
  std::mt19937_64 engine_;
  std::uint64_t base_;
};

/// Galton-Watson binary tree: each node at level < max_depth gains both
/// children with probability p, independently. Nodes are visited level by
/// level in ascending label order, so the draw sequence (and the tree) is a
/// pure function of the RNG state.
inline BinaryTree random_tree(Rng& rng, double p, int max_depth) {
  if (p < 0.0 || p >= 1.0) throw std::invalid_argument("branch probability must lie in [0,1)");
  if (max_depth < 1 || max_depth > kMaxLevels)
    throw std::invalid_argument("max_depth must lie in [1," + std::to_string(kMaxLevels) + "]");
  std::vector<NodeId> nodes{1};
  std::vector<NodeId> frontier{1};
  for (int level = 1; level < max_depth && !frontier.empty(); ++level) {
    std::vector<NodeId> next;
    for (NodeId v : frontier) {
      if (rng.uniform01() < p) {
        next.push_back(left_child_raw(v));
        next.push_back(right_child_raw(v));
      }
    }
    nodes.insert(nodes.end(), next.begin(), next.end());
    frontier = std::move(next);
  }
  // Ascending per level and levels in order, so `nodes` is already sorted.
  return BinaryTree::from_sorted_unchecked(std::move(nodes));
}

/// Branch-probability estimate from a tree of size n: p_hat = (1 - 1/n) / 2.
inline double estimate_branch_prob(const BinaryTree& t) {
  const double n = static_cast<double>(t.size());
  return 0.5 * (1.0 - 1.0 / n);
}

/// Mean of per-tree estimates over a dataset.
inline double estimate_branch_prob(const TreeDataset& data) {
  if (data.trees.empty()) throw std::invalid_argument("dataset has no trees");
  double s = 0.0;
  for (const auto& t : data.trees) s += estimate_branch_prob(t);
  return s / static_cast<double>(data.trees.size());
}

}  // namespace treepca
