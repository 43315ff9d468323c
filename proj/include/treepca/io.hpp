#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <system_error>
#include <utility>
#include <vector>

#include "json.hpp"

#include "treepca/benchmark.hpp"
#include "treepca/curve.hpp"
#include "treepca/line.hpp"
#include "treepca/stats.hpp"
#include "treepca/tree.hpp"

namespace treepca {

/// Shortest round-trip decimal representation, locale-independent.
inline std::string fmt_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path);
}

// ---------------------------------------------------------------------------
// Dataset files: UTF-8 JSON with integer labels.
// {"name": ..., "trees": [[1,2,3],...], "covariate": [...], "start": [...]}
// ---------------------------------------------------------------------------

struct DatasetFile {
  TreeDataset data;
  BinaryTree start;  // optional "start" field; defaults to the root tree {1}
};

namespace detail {

inline BinaryTree parse_tree_json(const nlohmann::json& jt, const std::string& what) {
  if (!jt.is_array()) throw std::invalid_argument(what + ": expected an array of node labels");
  std::vector<NodeId> nodes;
  nodes.reserve(jt.size());
  for (const auto& jl : jt) {
    if (!jl.is_number_integer()) throw std::invalid_argument(what + ": node labels must be integers");
    if (!jl.is_number_unsigned() && jl.get<std::int64_t>() < 1)
      throw std::invalid_argument(what + ": invalid node " + std::to_string(jl.get<std::int64_t>()));
    const std::uint64_t u = jl.get<std::uint64_t>();
    if (u > kMaxLabel)
      throw std::invalid_argument(what + ": node " + std::to_string(u) + " exceeds the depth cap");
    nodes.push_back(u);
  }
  try {
    return BinaryTree::from_nodes(std::move(nodes));
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(what + ": " + e.what());
  }
}

}  // namespace detail

inline DatasetFile parse_dataset_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("dataset: top-level JSON object expected");
  DatasetFile out;
  if (j.contains("name")) {
    if (!j.at("name").is_string()) throw std::invalid_argument("dataset: \"name\" must be a string");
    out.data.name = j.at("name").get<std::string>();
  }
  if (!j.contains("trees") || !j.at("trees").is_array() || j.at("trees").empty())
    throw std::invalid_argument("dataset: nonempty \"trees\" array required");
  std::size_t idx = 0;
  for (const auto& jt : j.at("trees")) {
    ++idx;
    out.data.trees.push_back(detail::parse_tree_json(jt, "tree " + std::to_string(idx)));
  }
  if (j.contains("covariate") && !j.at("covariate").is_null()) {
    if (!j.at("covariate").is_array())
      throw std::invalid_argument("dataset: \"covariate\" must be an array of numbers");
    for (const auto& jv : j.at("covariate")) {
      if (!jv.is_number()) throw std::invalid_argument("dataset: covariate entries must be numbers");
      out.data.covariate.push_back(jv.get<double>());
    }
    if (out.data.covariate.size() != out.data.trees.size())
      throw std::invalid_argument("dataset: covariate length " + std::to_string(out.data.covariate.size()) +
                                  " does not match tree count " + std::to_string(out.data.trees.size()));
  }
  if (j.contains("correspondence_applied")) {
    if (!j.at("correspondence_applied").is_boolean())
      throw std::invalid_argument("dataset: \"correspondence_applied\" must be a boolean");
    out.data.correspondence_applied = j.at("correspondence_applied").get<bool>();
  }
  if (j.contains("start") && !j.at("start").is_null())
    out.start = detail::parse_tree_json(j.at("start"), "start");
  return out;
}

inline DatasetFile load_dataset_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
  try {
    return parse_dataset_json(j);
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
}

inline nlohmann::json dataset_to_json(const TreeDataset& data, const BinaryTree* start = nullptr) {
  nlohmann::json j;
  j["name"] = data.name;
  auto trees = nlohmann::json::array();
  for (const auto& t : data.trees) trees.push_back(t.nodes());
  j["trees"] = std::move(trees);
  if (!data.covariate.empty()) j["covariate"] = data.covariate;
  if (data.correspondence_applied) j["correspondence_applied"] = true;
  if (start != nullptr && start->size() > 1) j["start"] = start->nodes();
  return j;
}

inline void save_dataset_file(const std::string& path, const TreeDataset& data, const BinaryTree* start = nullptr) {
  write_file(path, dataset_to_json(data, start).dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// CSV emission. All writers return the full file contents; every number is
// formatted locale-free so identical inputs give byte-identical files.
// ---------------------------------------------------------------------------

/// One row per node of each component: start nodes at position 0 (ascending),
/// then the added sequence at positions 1..n. k is the line's window size.
inline std::string lines_csv(const std::vector<KTreeLine>& pcs) {
  std::string s = "pc,k,position,node\n";
  for (std::size_t p = 0; p < pcs.size(); ++p) {
    const auto& line = pcs[p];
    const std::string head = std::to_string(p + 1) + "," + std::to_string(line.window) + ",";
    for (NodeId v : line.start.nodes()) s += head + "0," + std::to_string(v) + "\n";
    for (std::size_t i = 0; i < line.added.size(); ++i)
      s += head + std::to_string(i + 1) + "," + std::to_string(line.added[i]) + "\n";
  }
  return s;
}

/// Same layout for a tree-curve: start at position 0, growth order at 1..n.
inline std::string curve_csv(const TreeCurve& c) {
  std::string s = "position,node\n";
  for (NodeId v : c.start.nodes()) s += "0," + std::to_string(v) + "\n";
  for (std::size_t i = 0; i < c.added.size(); ++i)
    s += std::to_string(i + 1) + "," + std::to_string(c.added[i]) + "\n";
  return s;
}

inline std::string scores_csv(const std::vector<long long>& per_tree_scores) {
  std::string s = "tree_index,score\n";
  for (std::size_t i = 0; i < per_tree_scores.size(); ++i)
    s += std::to_string(i + 1) + "," + std::to_string(per_tree_scores[i]) + "\n";
  return s;
}

inline std::string regress_summary_csv(const RegressionResult& r) {
  std::string s = "slope,intercept,slope_se,t_stat,p_value,n\n";
  s += fmt_double(r.slope) + "," + fmt_double(r.intercept) + "," + fmt_double(r.slope_se) + "," +
       fmt_double(r.t_stat) + "," + fmt_double(r.p_value) + "," + std::to_string(r.n) + "\n";
  return s;
}

inline std::string bench_csv(const std::vector<BenchmarkRecord>& recs) {
  std::string s = "dataset,method,support_size,elapsed_s,completed,objective\n";
  for (const auto& r : recs) {
    s += r.dataset_id + "," + r.method + "," + std::to_string(r.support_size) + "," + fmt_double(r.elapsed_s) +
         "," + (r.completed ? "true" : "false") + ",";
    if (r.objective) s += std::to_string(*r.objective);
    s += "\n";
  }
  return s;
}

namespace detail {

inline void append_trace_rows(std::string& s, const std::string& dataset_id,
                              const std::vector<BnbIteration>& trace) {
  for (std::size_t i = 0; i < trace.size(); ++i)
    s += dataset_id + "," + std::to_string(i + 1) + "," + std::to_string(trace[i].created) + "," +
         std::to_string(trace[i].surviving) + "," + std::to_string(trace[i].min_lb) + "," +
         std::to_string(trace[i].min_ub) + "\n";
}

}  // namespace detail

inline std::string trace_csv(const std::string& dataset_id, const std::vector<BnbIteration>& trace) {
  std::string s = "dataset,iteration,created,surviving,min_lb,min_ub\n";
  detail::append_trace_rows(s, dataset_id, trace);
  return s;
}

inline std::string trace_csv(const std::vector<BenchmarkRecord>& recs) {
  std::string s = "dataset,iteration,created,surviving,min_lb,min_ub\n";
  for (const auto& r : recs)
    if (r.method == "bb") detail::append_trace_rows(s, r.dataset_id, r.trace);
  return s;
}

// ---------------------------------------------------------------------------
// CSV readers for previously emitted components.
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<std::string> split_csv_row(const std::string& row) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  for (;;) {
    const std::size_t c = row.find(',', pos);
    if (c == std::string::npos) {
      out.push_back(row.substr(pos));
      return out;
    }
    out.push_back(row.substr(pos, c - pos));
    pos = c + 1;
  }
}

template <class T>
inline T parse_field(const std::string& s, const char* what) {
  T v{};
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw std::runtime_error(std::string("bad ") + what + " field: \"" + s + "\"");
  return v;
}

}  // namespace detail

inline std::vector<KTreeLine> read_lines_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string row;
  if (!std::getline(in, row) || row != "pc,k,position,node")
    throw std::runtime_error(path + ": expected header pc,k,position,node");
  struct Acc {
    int k = 1;
    std::vector<NodeId> start;
    std::vector<std::pair<std::size_t, NodeId>> added;
  };
  std::map<std::size_t, Acc> by_pc;
  while (std::getline(in, row)) {
    if (row.empty()) continue;
    const auto f = detail::split_csv_row(row);
    if (f.size() != 4) throw std::runtime_error(path + ": malformed row \"" + row + "\"");
    auto& acc = by_pc[detail::parse_field<std::size_t>(f[0], "pc")];
    acc.k = detail::parse_field<int>(f[1], "k");
    const auto pos = detail::parse_field<std::size_t>(f[2], "position");
    const auto node = detail::parse_field<NodeId>(f[3], "node");
    if (pos == 0)
      acc.start.push_back(node);
    else
      acc.added.emplace_back(pos, node);
  }
  if (by_pc.empty()) throw std::runtime_error(path + ": no component rows");
  std::vector<KTreeLine> out;
  for (auto& [pc, acc] : by_pc) {
    KTreeLine line;
    line.window = acc.k;
    line.start = BinaryTree::from_nodes(std::move(acc.start));
    std::sort(acc.added.begin(), acc.added.end());
    for (std::size_t i = 0; i < acc.added.size(); ++i) {
      if (acc.added[i].first != i + 1)
        throw std::runtime_error(path + ": non-contiguous positions for pc " + std::to_string(pc));
      line.added.push_back(acc.added[i].second);
    }
    out.push_back(std::move(line));
  }
  return out;
}

inline TreeCurve read_curve_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string row;
  if (!std::getline(in, row) || row != "position,node")
    throw std::runtime_error(path + ": expected header position,node");
  std::vector<NodeId> start;
  std::vector<std::pair<std::size_t, NodeId>> added;
  while (std::getline(in, row)) {
    if (row.empty()) continue;
    const auto f = detail::split_csv_row(row);
    if (f.size() != 2) throw std::runtime_error(path + ": malformed row \"" + row + "\"");
    const auto pos = detail::parse_field<std::size_t>(f[0], "position");
    const auto node = detail::parse_field<NodeId>(f[1], "node");
    if (pos == 0)
      start.push_back(node);
    else
      added.emplace_back(pos, node);
  }
  TreeCurve c;
  c.start = BinaryTree::from_nodes(std::move(start));
  std::sort(added.begin(), added.end());
  for (std::size_t i = 0; i < added.size(); ++i) {
    if (added[i].first != i + 1) throw std::runtime_error(path + ": non-contiguous positions");
    c.added.push_back(added[i].second);
  }
  return c;
}

// ---------------------------------------------------------------------------
// D-L view: x = node level (root at 1), y = log2(1 + proper descendants)
// so leaves sit at y = 0.
// ---------------------------------------------------------------------------

struct DlRow {
  NodeId node = 0;
  int x = 0;
  double y = 0.0;
  std::optional<NodeId> parent;  // absent for the root
};

inline std::vector<DlRow> dlview_rows(const BinaryTree& t) {
  const auto desc = descendant_counts(t);
  std::vector<DlRow> rows;
  rows.reserve(t.size());
  for (NodeId v : t.nodes()) {
    DlRow r;
    r.node = v;
    r.x = level_of(v);
    r.y = std::log2(1.0 + static_cast<double>(desc.at(v)));
    if (v > 1) r.parent = parent_raw(v);
    rows.push_back(r);
  }
  return rows;
}

inline std::string dlview_csv(const std::vector<DlRow>& rows) {
  std::string s = "node,x,y,parent\n";
  for (const auto& r : rows) {
    s += std::to_string(r.node) + "," + std::to_string(r.x) + "," + fmt_double(r.y) + ",";
    if (r.parent) s += std::to_string(*r.parent);
    s += "\n";
  }
  return s;
}

/// SVG 1.1 scatter of the D-L view: parent edges as segments, nodes as
/// circles. Component membership is carried in the class attribute
/// (start / pc1 / pc2; plain nodes get "node").
inline std::string dlview_svg(const std::vector<DlRow>& rows,
                              const std::map<NodeId, std::string>& node_class = {}) {
  if (rows.empty()) throw std::invalid_argument("dlview: no rows");
  int max_level = 1;
  double ymax = 0.0;
  for (const auto& r : rows) {
    max_level = std::max(max_level, r.x);
    ymax = std::max(ymax, r.y);
  }
  const double margin = 40.0, xstep = 120.0, plot_h = 360.0;
  const double width = 2 * margin + xstep * (max_level - 1);
  const double height = 2 * margin + plot_h;
  const double yden = ymax > 0.0 ? ymax : 1.0;
  const auto px = [&](int lvl) { return margin + xstep * (lvl - 1); };
  const auto py = [&](double y) { return margin + (1.0 - y / yden) * plot_h; };

  std::map<NodeId, const DlRow*> by_node;
  for (const auto& r : rows) by_node[r.node] = &r;

  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + fmt_double(width) +
                  "\" height=\"" + fmt_double(height) + "\">\n";
  s += "<style>circle.node{fill:#999}circle.start{fill:#000}circle.pc1{fill:#c22}"
       "circle.pc2{fill:#2a2}line.edge{stroke:#bbb;stroke-width:1}</style>\n";
  for (const auto& r : rows) {
    if (!r.parent) continue;
    const DlRow* p = by_node.at(*r.parent);
    s += "<line class=\"edge\" x1=\"" + fmt_double(px(p->x)) + "\" y1=\"" + fmt_double(py(p->y)) +
         "\" x2=\"" + fmt_double(px(r.x)) + "\" y2=\"" + fmt_double(py(r.y)) + "\"/>\n";
  }
  for (const auto& r : rows) {
    const auto it = node_class.find(r.node);
    const std::string cls = it != node_class.end() ? it->second : "node";
    s += "<circle class=\"" + cls + "\" cx=\"" + fmt_double(px(r.x)) + "\" cy=\"" + fmt_double(py(r.y)) +
         "\" r=\"5\"><title>" + std::to_string(r.node) + "</title></circle>\n";
  }
  s += "</svg>\n";
  return s;
}

}  // namespace treepca
