// Release gate: nine end-to-end checks, one [PASS]/[FAIL] line each.
// All tolerances are pinned as constants below; exits nonzero on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "treepca/treepca.hpp"

using namespace treepca;

namespace {

// Pinned expectations.
constexpr long long kDeepestCounts[5] = {1, 4, 28, 208, 1552};  // levels 1..5
constexpr double kSlopeTol = 0.05;                              // criterion 2
constexpr double kRefMeanWoS = 99.91, kRefMeanWo = 98.82;       // criterion 6 reference means
constexpr double kRefMeanS = 94.02, kRefMeanG = 89.76;
constexpr double kMeanBandPp = 5.0;   // +-5 percentage points around each reference mean
constexpr double kWoSFloor = 95.0;    // WO+S mean must stay above this
constexpr double kPTarget = 0.0188, kPTol = 0.0005;  // criterion 8
constexpr double kC1Budget = 5.0, kC2Budget = 1.0, kC3Budget = 120.0, kC6Budget = 60.0;

struct Crit {
  bool pass = true;
  std::string detail;
};

double now_s() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

std::string fmt(double v, int prec = 2) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", prec, v);
  return buf;
}

BinaryTree full_tree(int levels) {
  std::vector<NodeId> ns;
  for (NodeId v = 1; v < (NodeId{1} << levels); ++v) ns.push_back(v);
  return BinaryTree::from_nodes(std::move(ns));
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// 1. Deepest-level 2-line counts for full trees of 1..5 levels: the recursion
//    (count_2lines) must reproduce the pinned values and agree with direct
//    enumeration bucketed by deepest level.
Crit criterion1() {
  const double t0 = now_s();
  Crit c;
  const BinaryTree root;
  for (int L = 1; L <= 5; ++L) {
    const long long expect = kDeepestCounts[L - 1];
    const long long rec = count_2lines(L);
    const auto buckets = count_lines_by_deepest_level(full_tree(L), root);
    const long long enumd = static_cast<long long>(buckets[static_cast<std::size_t>(L)]);
    if (rec != expect || enumd != expect) {
      c.pass = false;
      c.detail += " level " + std::to_string(L) + ": recursion " + std::to_string(rec) +
                  ", enumeration " + std::to_string(enumd) + ", expected " + std::to_string(expect) + ";";
    }
  }
  const double el = now_s() - t0;
  if (el >= kC1Budget) { c.pass = false; c.detail += " over budget;"; }
  if (c.pass) c.detail = "counts 1,4,28,208,1552 match enumeration";
  c.detail += " (" + fmt(el) + " s)";
  return c;
}

// 2. Growth exponent: regress log2(count) on log2(m+1) over levels 3..10,
//    where m = 2^L - 1 is the full-tree node count (log2(m+1) keeps the
//    geometric ladder exact); slope must be log2(4 + 2*sqrt(3)) within tol.
Crit criterion2() {
  const double t0 = now_s();
  Crit c;
  std::vector<double> x, y;
  for (int L = 3; L <= 10; ++L) {
    const auto m = (std::uint64_t{1} << L) - 1;
    x.push_back(std::log2(static_cast<double>(m + 1)));
    y.push_back(std::log2(static_cast<double>(count_2lines(L))));
  }
  const double target = std::log2(4.0 + 2.0 * std::sqrt(3.0));
  const double slope = regress_age(x, y).slope;
  const double el = now_s() - t0;
  c.pass = std::abs(slope - target) <= kSlopeTol && el < kC2Budget;
  c.detail = "slope " + fmt(slope, 4) + " vs " + fmt(target, 4) + " +-" + fmt(kSlopeTol, 2) +
             " (" + fmt(el) + " s)";
  return c;
}

// 3. Exactness: on 50 seeded corresponded datasets (10 trees, p=0.4953,
//    depth cap 53, support <= 40), the B&B objective equals the brute-force
//    optimum and every trace row brackets it: min_lb <= opt <= min_ub.
Crit criterion3() {
  const double t0 = now_s();
  Crit c;
  const BinaryTree root;
  std::vector<TreeDataset> picked;
  for (std::uint64_t seed = 1; picked.size() < 50 && seed <= 2000; ++seed) {
    TreeDataset d = simulate_sets(1, 10, 0.4953, 53, true, seed)[0];
    if (support_tree(d).size() <= 40) picked.push_back(std::move(d));
  }
  if (picked.size() < 50) {
    c.pass = false;
    c.detail = "only " + std::to_string(picked.size()) + " datasets under the support cap";
    return c;
  }
  int bad = 0;
  for (const auto& d : picked) {
    const auto brute = brute_force_pc_2line(d, root, {}, 600.0);
    const auto bb = bb_first_pc_2line(d, root, 600.0);
    bool ok = brute.completed && bb.completed && bb.objective == brute.objective &&
              bb.lower_bound == brute.objective && bb.upper_bound == brute.objective;
    for (const auto& it : bb.trace)
      ok = ok && it.min_lb <= brute.objective && brute.objective <= it.min_ub;
    if (!ok) ++bad;
  }
  const double el = now_s() - t0;
  c.pass = bad == 0 && el < kC3Budget;
  c.detail = bad == 0 ? "50/50 exact with bracketing trace bounds" : std::to_string(bad) + "/50 mismatched";
  c.detail += " (" + fmt(el) + " s)";
  return c;
}

// 4. Dominance at a 10 s per-run limit on 30 corresponded datasets: B&B
//    completes a superset of what brute force completes, and its median time
//    on jointly completed instances is no larger.
Crit criterion4() {
  Crit c;
  const auto datasets = simulate_sets(30, 10, 0.4953, 53, true, 2026);
  const auto recs = benchmark(datasets, 10.0, 1);
  int bb_done = 0, brute_done = 0, subset_bad = 0;
  std::vector<double> ebb, ebr;
  for (std::size_t i = 0; i < datasets.size(); ++i) {
    const auto& rb = recs[2 * i];
    const auto& rr = recs[2 * i + 1];
    if (rb.completed) ++bb_done;
    if (rr.completed) ++brute_done;
    if (rr.completed && !rb.completed) ++subset_bad;
    if (rr.completed && rb.completed) {
      ebb.push_back(rb.elapsed_s);
      ebr.push_back(rr.elapsed_s);
    }
  }
  const double mb = ebb.empty() ? 0.0 : median(ebb);
  const double mr = ebr.empty() ? 0.0 : median(ebr);
  c.pass = subset_bad == 0 && mb <= mr;
  c.detail = "bb " + std::to_string(bb_done) + "/30, brute " + std::to_string(brute_done) +
             "/30, joint medians bb " + fmt(mb, 3) + " s vs brute " + fmt(mr, 3) + " s";
  if (subset_bad) c.detail += ", " + std::to_string(subset_bad) + " brute-only completions";
  return c;
}

// 5. Subsumption: on 50 seeded datasets the optimal 2-line objective never
//    exceeds the optimal 1-line objective and explains at least as many
//    nodes; a constructed sibling-pair dataset shows strict improvement.
Crit criterion5() {
  Crit c;
  const BinaryTree root;
  const auto sets = simulate_sets(50, 5, 0.4953, 4, true, 1);
  int obj_bad = 0, ne_bad = 0, strict = 0;
  for (const auto& d : sets) {
    const KTreeLine l1 = first_pc_1line(d, root);
    const long long obj1 = line_objective(d, l1);
    const auto bb = bb_first_pc_2line(d, root, 60.0);
    if (!bb.completed) { ++obj_bad; continue; }
    const long long ne1 = score_report(d, l1).nodes_explained;
    const long long ne2 = score_report(d, bb.lines.front()).nodes_explained;
    if (bb.objective > obj1) ++obj_bad;
    if (ne2 < ne1) ++ne_bad;
    if (bb.objective < obj1 && ne2 > ne1) ++strict;
  }
  const TreeDataset sib{{BinaryTree::from_nodes({1, 2, 3}), BinaryTree::from_nodes({1, 2, 3, 4, 5})},
                        {}, false, "sib"};
  const KTreeLine l1 = first_pc_1line(sib, root);
  const auto bb = bb_first_pc_2line(sib, root, 60.0);
  const bool sib_strict = bb.completed && bb.objective < line_objective(sib, l1) &&
                          score_report(sib, bb.lines.front()).nodes_explained >
                              score_report(sib, l1).nodes_explained;
  c.pass = obj_bad == 0 && ne_bad == 0 && sib_strict;
  c.detail = "objective violations " + std::to_string(obj_bad) + ", explained-node violations " +
             std::to_string(ne_bad) + ", strict improvements " + std::to_string(strict) +
             "/50, sibling-pair instance " + (sib_strict ? "strict" : "NOT strict");
  return c;
}

// 6. Heuristic ordering on 30 seeded sets (4 trees, 3 levels) against the
//    exhaustive oracle: WO+S >= WO, WO+S >= S, WO+S mean >= 95%, and each
//    mean within +-5pp of its reference value. The generator grows both
//    children or none, so every sibling pair is weight-tied and all four
//    heuristics stay optimal on every instance; the S and G reference bands
//    cannot be reached from means of 100 and are expected to fail.
Crit criterion6() {
  const double t0 = now_s();
  Crit c;
  const BinaryTree root;
  const auto sets = simulate_sets(30, 4, 0.4953, 3, false, 1);
  double mwos = 0, mwo = 0, ms = 0, mg = 0;
  for (const auto& d : sets) {
    const TreeCurve opt = exhaustive_curve(d, root, 8);
    mwos += performance_pct(d, heuristic_wo_s(d, root), opt);
    mwo += performance_pct(d, heuristic_wo(d, root), opt);
    ms += performance_pct(d, heuristic_switch(d, root), opt);
    mg += performance_pct(d, heuristic_greedy(d, root), opt);
  }
  mwos /= 30; mwo /= 30; ms /= 30; mg /= 30;
  const double el = now_s() - t0;
  std::string bands;
  if (std::abs(mwos - kRefMeanWoS) > kMeanBandPp) bands += " WO+S band " + fmt(kRefMeanWoS) + "+-5 violated;";
  if (std::abs(mwo - kRefMeanWo) > kMeanBandPp) bands += " WO band " + fmt(kRefMeanWo) + "+-5 violated;";
  if (std::abs(ms - kRefMeanS) > kMeanBandPp) bands += " S band " + fmt(kRefMeanS) + "+-5 violated;";
  if (std::abs(mg - kRefMeanG) > kMeanBandPp) bands += " G band " + fmt(kRefMeanG) + "+-5 violated;";
  const bool order_ok = mwos >= mwo && mwos >= ms && mwos >= kWoSFloor;
  c.pass = order_ok && bands.empty() && el < kC6Budget;
  c.detail = "means WO+S " + fmt(mwos) + ", WO " + fmt(mwo) + ", S " + fmt(ms) + ", G " + fmt(mg);
  if (!order_ok) c.detail += "; ordering violated";
  c.detail += bands + " (" + fmt(el) + " s)";
  return c;
}

// 7. Curve dominance: a complete curve whose prefix embeds the optimal
//    1-line never scores worse than that line, on every test dataset; on
//    constructed instances the complete curve covers at least as many nodes
//    as the first principal 2-line.
Crit criterion7() {
  Crit c;
  const BinaryTree root;
  std::vector<TreeDataset> datasets = simulate_sets(50, 5, 0.4953, 4, true, 1);
  {
    auto more = simulate_sets(30, 4, 0.4953, 3, false, 1);
    for (auto& d : more) datasets.push_back(std::move(d));
  }
  const std::vector<TreeDataset> constructed = {
      {{BinaryTree::from_nodes({1}), BinaryTree::from_nodes({1, 2}), BinaryTree::from_nodes({1, 2, 3})},
       {}, false, "chain"},
      {{BinaryTree::from_nodes({1, 2, 3}), BinaryTree::from_nodes({1, 2, 3, 4, 5})}, {}, false, "sib"},
      {{BinaryTree::from_nodes({1, 2}), BinaryTree::from_nodes({1, 3})}, {}, false, "fork"}};
  for (const auto& d : constructed) datasets.push_back(d);

  int dominance_bad = 0;
  for (const auto& d : datasets) {
    const KTreeLine l1 = first_pc_1line(d, root);
    std::vector<NodeId> added = l1.added;
    const BinaryTree line_set = BinaryTree::from_nodes(line_nodes(l1));
    const BinaryTree sup = support_tree(d);
    for (NodeId v : sup.nodes())
      if (!line_set.contains(v)) added.push_back(v);
    const TreeCurve curve = make_curve(root, std::move(added));
    if (curve_objective(d, curve) > line_objective(d, l1)) ++dominance_bad;
  }
  int coverage_bad = 0;
  for (const auto& d : constructed) {
    const auto bb = bb_first_pc_2line(d, root, 60.0);
    const BinaryTree sup = support_tree(d);
    std::vector<NodeId> added;
    for (NodeId v : sup.nodes())
      if (v != 1) added.push_back(v);
    const TreeCurve curve = make_curve(root, std::move(added));
    if (score_report(d, curve).coverage_pct < score_report(d, bb.lines.front()).coverage_pct)
      ++coverage_bad;
  }
  c.pass = dominance_bad == 0 && coverage_bad == 0;
  c.detail = "dominance violations " + std::to_string(dominance_bad) + "/" +
             std::to_string(datasets.size()) + ", coverage violations " +
             std::to_string(coverage_bad) + "/" + std::to_string(constructed.size());
  return c;
}

// 8. Regression: x=[1,2,3,4], y=[2,4,5,8] gives slope exactly 1.9 and a
//    two-sided t(2) p-value of 0.0188 within 0.0005; a constant response
//    gives p = 1.
Crit criterion8() {
  Crit c;
  const auto r = regress_age({1, 2, 3, 4}, {2, 4, 5, 8});
  const auto flat = regress_age({1, 2, 3}, {4, 4, 4});
  c.pass = r.slope == 1.9 && std::abs(r.p_value - kPTarget) <= kPTol && flat.p_value == 1.0 &&
           flat.slope == 0.0;
  c.detail = "slope " + fmt(r.slope, 6) + ", p " + fmt(r.p_value, 5) + ", constant-response p " +
             fmt(flat.p_value, 1);
  return c;
}

// 9. Determinism: solvers, heuristics, and writers produce byte-identical
//    CSV on rerun; the benchmark matches across 1 and 2 workers once the
//    elapsed_s column is masked.
Crit criterion9() {
  Crit c;
  const BinaryTree root;
  const auto mask_elapsed = [](const std::string& csv) {
    std::istringstream in(csv);
    std::string line, out;
    bool header = true;
    while (std::getline(in, line)) {
      if (!header) {
        std::vector<std::string> f;
        std::string tok;
        std::istringstream row(line);
        while (std::getline(row, tok, ',')) f.push_back(tok);
        if (f.size() >= 6) f[3] = "x";
        line.clear();
        for (std::size_t i = 0; i < f.size(); ++i) line += (i ? "," : "") + f[i];
      }
      header = false;
      out += line + "\n";
    }
    return out;
  };

  std::string why;
  const auto a = simulate_sets(4, 6, 0.4953, 5, true, 99);
  const auto b = simulate_sets(4, 6, 0.4953, 5, true, 99);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a[i].trees.size(); ++j)
      if (a[i].trees[j].nodes() != b[i].trees[j].nodes()) why += " simulate;";

  for (const auto& d : a) {
    const auto r1 = bb_first_pc_2line(d, root, 30.0);
    const auto r2 = bb_first_pc_2line(d, root, 30.0);
    if (lines_csv(r1.lines) != lines_csv(r2.lines)) why += " bb lines;";
    if (trace_csv(d.name, r1.trace) != trace_csv(d.name, r2.trace)) why += " bb trace;";
    const KTreeLine l1 = first_pc_1line(d, root);
    if (lines_csv({l1}) != lines_csv({first_pc_1line(d, root)})) why += " 1-line;";
    if (curve_csv(heuristic_wo_s(d, root)) != curve_csv(heuristic_wo_s(d, root))) why += " curve;";
    const auto sc = score_report(d, l1);
    if (scores_csv(sc.per_tree_scores) != scores_csv(score_report(d, l1).per_tree_scores)) why += " scores;";
  }
  {
    const TreeDataset tiny{{BinaryTree::from_nodes({1, 2}), BinaryTree::from_nodes({1, 3})}, {}, false, "tiny"};
    if (curve_csv(exhaustive_curve(tiny, root, 8)) != curve_csv(exhaustive_curve(tiny, root, 8)))
      why += " exhaustive;";
    const auto rows = dlview_rows(support_tree(tiny));
    if (dlview_csv(rows) != dlview_csv(dlview_rows(support_tree(tiny)))) why += " dlview;";
  }
  const auto recs1 = benchmark(a, 10.0, 1);
  const auto recs2 = benchmark(a, 10.0, 2);
  if (mask_elapsed(bench_csv(recs1)) != mask_elapsed(bench_csv(recs2))) why += " bench csv;";
  if (trace_csv(recs1) != trace_csv(recs2)) why += " bench trace;";
  for (const auto& r : recs1)
    if (!r.completed) why += " bench incomplete;";

  c.pass = why.empty();
  c.detail = why.empty() ? "all CSV outputs byte-identical across reruns and worker counts" : why;
  return c;
}

}  // namespace

int main() {
  Crit (*const criteria[9])() = {criterion1, criterion2, criterion3, criterion4, criterion5,
                                 criterion6, criterion7, criterion8, criterion9};
  int failures = 0;
  for (int i = 0; i < 9; ++i) {
    const Crit r = criteria[i]();
    if (!r.pass) ++failures;
    std::printf("[%s] criterion %d: %s\n", r.pass ? "PASS" : "FAIL", i + 1, r.detail.c_str());
    std::fflush(stdout);
  }
  if (failures) std::printf("%d of 9 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
