#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "treepca/random.hpp"
#include "treepca/tree.hpp"

namespace treepca {

/// Simulated corpora of Galton-Watson datasets. With `correspondence` set,
/// every tree is rearranged by the descendant correspondence (SET2 protocol);
/// otherwise trees are used as drawn (SET1). Deterministic given the seed:
/// dataset i / tree j always consumes the same derived stream.
inline std::vector<TreeDataset> simulate_sets(int count, int trees_per_set, double p, int max_depth,
                                              bool correspondence, std::uint64_t seed) {
  if (count < 1) throw std::invalid_argument("count must be >= 1");
  if (trees_per_set < 1) throw std::invalid_argument("trees_per_set must be >= 1");
  const Rng master(seed);
  std::vector<TreeDataset> sets;
  sets.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    const Rng set_rng = master.child(static_cast<std::uint64_t>(i));
    TreeDataset d;
    std::string id = std::to_string(i + 1);
    while (id.size() < 3) id.insert(id.begin(), '0');
    d.name = "set" + id;
    d.correspondence_applied = correspondence;
    for (int j = 0; j < trees_per_set; ++j) {
      Rng tree_rng = set_rng.child(static_cast<std::uint64_t>(j));
      BinaryTree t = random_tree(tree_rng, p, max_depth);
      if (correspondence) t = descendant_correspondence(t);
      d.trees.push_back(std::move(t));
    }
    sets.push_back(std::move(d));
  }
  return sets;
}

}  // namespace treepca
