#include <charconv>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "treepca/treepca.hpp"

namespace fs = std::filesystem;
using namespace treepca;

namespace {

std::uint64_t seed_from_env() {
  const char* s = std::getenv("TREEPCA_SEED");
  if (s == nullptr || *s == '\0') return 0;
  std::uint64_t v = 0;
  const auto res = std::from_chars(s, s + std::strlen(s), v);
  if (res.ec != std::errc{} || *res.ptr != '\0')
    throw std::runtime_error("TREEPCA_SEED must be an unsigned integer, got \"" + std::string(s) + "\"");
  return v;
}

std::string emit(const fs::path& dir, const std::string& name, const std::string& content) {
  fs::create_directories(dir);
  const std::string path = (dir / name).string();
  write_file(path, content);
  std::cout << "wrote " << path << "\n";
  return path;
}

void echo_scores(const TreeDataset& data, const ScoreReport& rep) {
  std::cout << "nodes explained: " << rep.nodes_explained << " (" << fmt_double(rep.coverage_pct)
            << "% of " << data.trees.size() << " trees)\n";
}

// Concatenate per-component traces under one header; ids pc1, pc2, ...
std::string multi_trace_csv(const std::vector<std::vector<BnbIteration>>& traces) {
  std::string s = "dataset,iteration,created,surviving,min_lb,min_ub\n";
  for (std::size_t j = 0; j < traces.size(); ++j) {
    const std::string one = trace_csv("pc" + std::to_string(j + 1), traces[j]);
    s += one.substr(one.find('\n') + 1);
  }
  return s;
}

int run_pca_line(const std::string& input, int num_pcs, const fs::path& out) {
  const DatasetFile df = load_dataset_file(input);
  std::vector<KTreeLine> pcs;
  for (int j = 0; j < num_pcs; ++j) {
    KTreeLine pc = pcs.empty() ? first_pc_1line(df.data, df.start) : next_pc_1line(df.data, df.start, pcs);
    std::cout << "pc " << (j + 1) << ": " << pc.added.size() << " nodes added\n";
    pcs.push_back(std::move(pc));
  }
  std::cout << "joint objective: " << line_objective(df.data, pcs) << "\n";
  const ScoreReport rep = score_report(df.data, pcs);
  echo_scores(df.data, rep);
  emit(out, "lines.csv", lines_csv(pcs));
  emit(out, "scores.csv", scores_csv(rep.per_tree_scores));
  return 0;
}

int run_pca_2line(const std::string& input, const std::string& method, double time_limit, int num_pcs,
                  const fs::path& out) {
  const DatasetFile df = load_dataset_file(input);
  std::vector<KTreeLine> pcs;
  std::vector<std::vector<BnbIteration>> traces;
  bool timed_out = false;
  for (int j = 0; j < num_pcs && !timed_out; ++j) {
    if (method == "bb") {
      const BnbResult res = bb_pc_2line(df.data, df.start, pcs, time_limit);
      pcs.push_back(res.lines.front());
      traces.push_back(res.trace);
      if (res.completed) {
        std::cout << "pc " << (j + 1) << ": joint objective " << res.objective << " ("
                  << res.bounds_evaluated << " bounds)\n";
      } else {
        timed_out = true;
        std::cout << "pc " << (j + 1) << ": time limit hit; incumbent objective " << res.upper_bound
                  << ", optimality gap [" << res.lower_bound << ", " << res.upper_bound << "]\n";
      }
    } else {
      const BruteResult res = brute_force_pc_2line(df.data, df.start, pcs, time_limit);
      pcs.push_back(res.lines.front());
      if (res.completed) {
        std::cout << "pc " << (j + 1) << ": joint objective " << res.objective << " (" << res.explored
                  << " maximal lines)\n";
      } else {
        timed_out = true;
        std::cout << "pc " << (j + 1) << ": time limit hit; incumbent objective " << res.objective
                  << " after " << res.explored << " maximal lines\n";
      }
    }
  }
  const ScoreReport rep = score_report(df.data, pcs);
  echo_scores(df.data, rep);
  emit(out, "lines.csv", lines_csv(pcs));
  emit(out, "scores.csv", scores_csv(rep.per_tree_scores));
  if (method == "bb") emit(out, "trace.csv", multi_trace_csv(traces));
  return timed_out ? 2 : 0;
}

int run_pca_curve(const std::string& input, const std::string& heuristic, int node_budget, const fs::path& out) {
  const DatasetFile df = load_dataset_file(input);
  TreeCurve c;
  if (heuristic == "wo") c = heuristic_wo(df.data, df.start);
  else if (heuristic == "greedy") c = heuristic_greedy(df.data, df.start);
  else if (heuristic == "switch") c = heuristic_switch(df.data, df.start);
  else if (heuristic == "wo_s") c = heuristic_wo_s(df.data, df.start);
  else c = exhaustive_curve(df.data, df.start, node_budget);
  std::cout << heuristic << " curve: objective " << curve_objective(df.data, c) << ", "
            << c.added.size() << " nodes added\n";
  const ScoreReport rep = score_report(df.data, c);
  echo_scores(df.data, rep);
  emit(out, "curve.csv", curve_csv(c));
  emit(out, "scores.csv", scores_csv(rep.per_tree_scores));
  return 0;
}

int run_simulate(int sets, int trees, double p, int depth, bool correspondence, std::uint64_t seed,
                 const fs::path& out) {
  const auto corpora = simulate_sets(sets, trees, p, depth, correspondence, seed);
  fs::create_directories(out);
  for (const auto& d : corpora) save_dataset_file((out / (d.name + ".json")).string(), d);
  std::cout << "wrote " << corpora.size() << " datasets (" << trees << " trees each, p=" << fmt_double(p)
            << ", depth<=" << depth << ", seed " << seed << ") to " << out.string() << "\n";
  return 0;
}

int run_bench(const std::vector<std::string>& inputs, double time_limit, unsigned jobs, const fs::path& out) {
  std::vector<TreeDataset> datasets;
  for (const auto& path : inputs) {
    DatasetFile df = load_dataset_file(path);
    if (df.data.name.empty()) df.data.name = fs::path(path).stem().string();
    datasets.push_back(std::move(df.data));
  }
  const auto records = benchmark(datasets, time_limit, jobs);
  int bb_done = 0, brute_done = 0;
  for (const auto& r : records) (r.method == "bb" ? bb_done : brute_done) += r.completed ? 1 : 0;
  std::cout << "bb completed " << bb_done << "/" << datasets.size() << ", brute completed " << brute_done
            << "/" << datasets.size() << " (limit " << fmt_double(time_limit) << " s)\n";
  emit(out, "bench.csv", bench_csv(records));
  emit(out, "trace.csv", trace_csv(records));
  return 0;
}

int run_dlview(const std::string& input, const std::string& format, int pcs, double time_limit,
               const fs::path& out) {
  const DatasetFile df = load_dataset_file(input);
  const BinaryTree sup = support_tree(df.data);
  const auto rows = dlview_rows(sup);
  int code = 0;
  std::map<NodeId, std::string> cls;
  std::vector<KTreeLine> fixed;
  for (int j = 1; j <= pcs; ++j) {
    const BnbResult res = bb_pc_2line(df.data, df.start, fixed, time_limit);
    if (!res.completed) {
      std::cout << "pc " << j << ": time limit hit; marking the incumbent\n";
      code = 2;
    }
    for (NodeId v : res.lines.front().added) cls.emplace(v, "pc" + std::to_string(j));
    fixed.push_back(res.lines.front());
  }
  for (NodeId v : df.start.nodes()) cls[v] = "start";
  std::cout << "support: " << sup.size() << " nodes, " << sup.max_level() << " levels\n";
  if (format == "svg") emit(out, "dlview.svg", dlview_svg(rows, cls));
  else emit(out, "dlview.csv", dlview_csv(rows));
  return code;
}

int run_regress(const std::string& input, const std::string& lines_path, const std::string& curve_path,
                const fs::path& out) {
  const DatasetFile df = load_dataset_file(input);
  if (df.data.covariate.empty())
    throw std::runtime_error(input + ": regression needs a \"covariate\" array");
  ScoreReport rep;
  if (!lines_path.empty()) rep = score_report(df.data, read_lines_csv(lines_path));
  else rep = score_report(df.data, read_curve_csv(curve_path));
  std::vector<double> scores(rep.per_tree_scores.begin(), rep.per_tree_scores.end());
  const RegressionResult r = regress_age(scores, df.data.covariate);
  std::cout << "slope " << fmt_double(r.slope) << ", intercept " << fmt_double(r.intercept) << ", p "
            << fmt_double(r.p_value) << " (n=" << r.n << ")\n";
  emit(out, "regress.csv", scores_csv(rep.per_tree_scores));
  emit(out, "regress_summary.csv", regress_summary_csv(r));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Principal component analysis for populations of rooted binary trees"};
  app.require_subcommand(1);
  std::string input, out = ".";

  auto* pline = app.add_subcommand("pca-line", "Exact first/next 1-tree-line principal components");
  int pline_pcs = 1;
  pline->add_option("dataset", input, "Dataset JSON file")->required();
  pline->add_option("--num-pcs", pline_pcs, "Number of components")->check(CLI::PositiveNumber);
  pline->add_option("--out", out, "Output directory");

  auto* p2line = app.add_subcommand("pca-2line", "Exact first/next 2-tree-line principal components");
  std::string method = "bb";
  double time_limit = 500.0;
  int p2_pcs = 1;
  p2line->add_option("dataset", input, "Dataset JSON file")->required();
  p2line->add_option("--method", method, "Solver: bb (branch & bound) or brute")
      ->check(CLI::IsMember({"bb", "brute"}));
  p2line->add_option("--time-limit", time_limit, "Per-component limit in seconds")->check(CLI::PositiveNumber);
  p2line->add_option("--num-pcs", p2_pcs, "Number of components")->check(CLI::PositiveNumber);
  p2line->add_option("--out", out, "Output directory");

  auto* pcurve = app.add_subcommand("pca-curve", "Tree-curve heuristics and the exhaustive oracle");
  std::string heuristic = "wo_s";
  int node_budget = 8;
  pcurve->add_option("dataset", input, "Dataset JSON file")->required();
  pcurve->add_option("--heuristic", heuristic, "wo, greedy, switch, wo_s, or exhaustive")
      ->check(CLI::IsMember({"wo", "greedy", "switch", "wo_s", "exhaustive"}));
  pcurve->add_option("--node-budget", node_budget, "Exhaustive search size cap")->check(CLI::PositiveNumber);
  pcurve->add_option("--out", out, "Output directory");

  auto* psim = app.add_subcommand("simulate", "Generate seeded Galton-Watson dataset corpora");
  int sets = 30, trees = 4, depth = 5;
  double prob = 0.4953;
  bool correspondence = false;
  std::uint64_t seed = 0;
  psim->add_option("--sets", sets, "Number of datasets")->check(CLI::PositiveNumber);
  psim->add_option("--trees", trees, "Trees per dataset")->check(CLI::PositiveNumber);
  psim->add_option("--p", prob, "Branch probability");
  psim->add_option("--depth", depth, "Maximum levels");
  psim->add_flag("--correspondence", correspondence, "Apply the descendant correspondence");
  psim->add_option("--seed", seed, "Master seed (default: TREEPCA_SEED or 0)");
  psim->add_option("--out", out, "Output directory");

  auto* pbench = app.add_subcommand("bench", "Time branch & bound against brute force");
  std::vector<std::string> bench_inputs;
  double bench_limit = 10.0;
  unsigned jobs = 0;
  pbench->add_option("datasets", bench_inputs, "Dataset JSON files")->required();
  pbench->add_option("--time-limit", bench_limit, "Per-run limit in seconds")->check(CLI::PositiveNumber);
  pbench->add_option("--jobs", jobs, "Parallel workers (0 = hardware)");
  pbench->add_option("--out", out, "Output directory");

  auto* pdl = app.add_subcommand("dlview", "D-L view coordinates of the support tree");
  std::string format = "csv";
  int mark_pcs = 0;
  double dl_limit = 500.0;
  pdl->add_option("dataset", input, "Dataset JSON file")->required();
  pdl->add_option("--format", format, "csv or svg")->check(CLI::IsMember({"csv", "svg"}));
  pdl->add_option("--pcs", mark_pcs, "Mark the first N principal 2-lines (0-2)")->check(CLI::Range(0, 2));
  pdl->add_option("--time-limit", dl_limit, "Per-component solver limit in seconds")->check(CLI::PositiveNumber);
  pdl->add_option("--out", out, "Output directory");

  auto* preg = app.add_subcommand("regress", "Regress the covariate on component projection sizes");
  std::string lines_path, curve_path;
  preg->add_option("dataset", input, "Dataset JSON file (with covariate)")->required();
  auto* lopt = preg->add_option("--lines", lines_path, "Component file from pca-line/pca-2line");
  auto* copt = preg->add_option("--curve", curve_path, "Curve file from pca-curve");
  lopt->excludes(copt);
  preg->add_option("--out", out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (pline->parsed()) return run_pca_line(input, pline_pcs, out);
    if (p2line->parsed()) return run_pca_2line(input, method, time_limit, p2_pcs, out);
    if (pcurve->parsed()) return run_pca_curve(input, heuristic, node_budget, out);
    if (psim->parsed()) return run_simulate(sets, trees, prob, depth, correspondence,
                                            psim->count("--seed") > 0 ? seed : seed_from_env(), out);
    if (pbench->parsed()) return run_bench(bench_inputs, bench_limit, jobs, out);
    if (pdl->parsed()) return run_dlview(input, format, mark_pcs, dl_limit, out);
    if (preg->parsed()) {
      if (lines_path.empty() && curve_path.empty())
        throw CLI::RequiredError("--lines or --curve");
      return run_regress(input, lines_path, curve_path, out);
    }
  } catch (const CLI::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
