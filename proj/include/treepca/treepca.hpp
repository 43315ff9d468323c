#pragma once

// Umbrella header: PCA for populations of rooted binary trees.
// Exact first principal components for 1- and 2-tree-lines, tree-curve
// heuristics, simulation, scoring, regression, and benchmark plumbing.

#include "treepca/tree.hpp"
#include "treepca/random.hpp"
#include "treepca/line.hpp"
#include "treepca/two_path.hpp"
#include "treepca/enumerate.hpp"
#include "treepca/bnb.hpp"
#include "treepca/curve.hpp"
#include "treepca/stats.hpp"
#include "treepca/simulate.hpp"
#include "treepca/benchmark.hpp"
#include "treepca/io.hpp"
