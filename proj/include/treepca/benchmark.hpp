#pragma once

#include <atomic>
#include <chrono>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "treepca/bnb.hpp"
#include "treepca/enumerate.hpp"
#include "treepca/tree.hpp"

namespace treepca {

struct BenchmarkRecord {
  std::string dataset_id;
  std::size_t support_size = 0;
  std::string method;  // "bb" or "brute"
  double elapsed_s = 0.0;
  bool completed = false;
  std::optional<long long> objective;  // present iff completed
  std::vector<BnbIteration> trace;     // bb only
};

/// Runs B&B and brute force (root start) on each dataset under a per-run
/// wall-clock cutoff. Records are ordered dataset-by-dataset (bb row, then
/// brute row) regardless of worker scheduling. Objectives are checked to
/// agree whenever both methods complete.
inline std::vector<BenchmarkRecord> benchmark(const std::vector<TreeDataset>& datasets, double time_limit_s,
                                              unsigned jobs = 0) {
  using clock = std::chrono::steady_clock;
  if (time_limit_s <= 0.0) throw std::invalid_argument("time limit must be positive");
  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  if (!datasets.empty()) jobs = std::min<unsigned>(jobs, static_cast<unsigned>(datasets.size()));

  std::vector<BenchmarkRecord> records(datasets.size() * 2);
  std::atomic<std::size_t> cursor{0};
  const BinaryTree root;

  const auto run_one = [&](std::size_t i) {
    const TreeDataset& d = datasets[i];
    const std::size_t sup_size = support_tree(d).size();

    BenchmarkRecord& bbrec = records[2 * i];
    bbrec.dataset_id = d.name.empty() ? "dataset" + std::to_string(i + 1) : d.name;
    bbrec.support_size = sup_size;
    bbrec.method = "bb";
    auto t0 = clock::now();
    const BnbResult bb = bb_first_pc_2line(d, root, time_limit_s);
    bbrec.elapsed_s = std::chrono::duration<double>(clock::now() - t0).count();
    bbrec.completed = bb.completed;
    if (bb.completed) bbrec.objective = bb.objective;
    bbrec.trace = bb.trace;

    BenchmarkRecord& brrec = records[2 * i + 1];
    brrec.dataset_id = bbrec.dataset_id;
    brrec.support_size = sup_size;
    brrec.method = "brute";
    t0 = clock::now();
    const BruteResult br = brute_force_pc_2line(d, root, {}, time_limit_s);
    brrec.elapsed_s = std::chrono::duration<double>(clock::now() - t0).count();
    brrec.completed = br.completed;
    if (br.completed) brrec.objective = br.objective;

    if (bbrec.completed && brrec.completed && *bbrec.objective != *brrec.objective)
      throw std::logic_error("benchmark objective mismatch on " + bbrec.dataset_id);
  };

  if (jobs <= 1) {
    for (std::size_t i = 0; i < datasets.size(); ++i) run_one(i);
    return records;
  }

  std::exception_ptr failure;
  std::mutex failure_mx;
  const auto worker = [&]() noexcept {
    try {
      for (;;) {
        const std::size_t i = cursor.fetch_add(1);
        if (i >= datasets.size()) return;
        run_one(i);
      }
    } catch (...) {
      const std::lock_guard<std::mutex> lk(failure_mx);
      if (!failure) failure = std::current_exception();
    }
  };
  std::vector<std::thread> pool;
  for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
  return records;
}

}  // namespace treepca
