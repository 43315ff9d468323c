#include <catch2/catch_amalgamated.hpp>

#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "treepca/io.hpp"
#include "treepca/simulate.hpp"

using namespace treepca;
using Catch::Matchers::ContainsSubstring;

namespace {

BinaryTree T(std::vector<NodeId> ns) { return BinaryTree::from_nodes(std::move(ns)); }

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() / ("treepca_test_" + std::to_string(::getpid()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

// Blank the elapsed_s column so timing noise cannot affect comparisons.
std::string mask_elapsed(const std::string& csv) {
  std::string out;
  std::size_t pos = 0;
  bool first = true;
  while (pos <= csv.size()) {
    const std::size_t nl = csv.find('\n', pos);
    std::string row = csv.substr(pos, nl == std::string::npos ? std::string::npos : nl - pos);
    if (!first && !row.empty()) {
      std::size_t c = 0;
      for (int k = 0; k < 3; ++k) c = row.find(',', c) + 1;
      const std::size_t end = row.find(',', c);
      row.replace(c, end - c, "X");
    }
    first = false;
    out += row;
    if (nl == std::string::npos) break;
    out += '\n';
    pos = nl + 1;
  }
  return out;
}

}  // namespace

TEST_CASE("double formatting") {
  CHECK(fmt_double(1.9) == "1.9");
  CHECK(fmt_double(0.0) == "0");
  CHECK(fmt_double(2.0) == "2");
  CHECK(fmt_double(0.45) == "0.45");
}

TEST_CASE("dataset JSON round-trip") {
  TempDir tmp;
  TreeDataset data;
  data.trees = {T({1, 2, 4}), T({1, 3})};
  data.covariate = {0.5, 2.25};
  data.correspondence_applied = true;
  data.name = "demo";
  const BinaryTree start = T({1, 2});

  const std::string path = tmp.file("demo.json");
  save_dataset_file(path, data, &start);
  const DatasetFile back = load_dataset_file(path);
  CHECK(back.data.trees == data.trees);
  CHECK(back.data.covariate == data.covariate);
  CHECK(back.data.correspondence_applied);
  CHECK(back.data.name == "demo");
  CHECK(back.start == start);

  // Root starts are left implicit.
  const BinaryTree root;
  save_dataset_file(tmp.file("root.json"), data, &root);
  CHECK_FALSE(slurp(tmp.file("root.json")).find("start") != std::string::npos);
  CHECK(load_dataset_file(tmp.file("root.json")).start == root);
}

TEST_CASE("dataset JSON validation") {
  using nlohmann::json;
  const auto parse = [](const char* text) { return parse_dataset_json(json::parse(text)); };

  const DatasetFile d = parse(R"({"name":"toy","trees":[[1],[1,2,3]]})");
  CHECK(d.data.name == "toy");
  REQUIRE(d.data.trees.size() == 2);
  CHECK(d.data.trees[1] == T({1, 2, 3}));
  CHECK(d.start == T({1}));
  CHECK_FALSE(d.data.correspondence_applied);

  CHECK(parse(R"({"trees":[[1]],"start":[1,2,3]})").start == T({1, 2, 3}));

  CHECK_THROWS_WITH(parse(R"({"trees":[[1,4]]})"),
                    ContainsSubstring("tree 1") && ContainsSubstring("parent 2"));
  CHECK_THROWS_WITH(parse(R"({"trees":[]})"), ContainsSubstring("nonempty \"trees\""));
  CHECK_THROWS_WITH(parse(R"({"name":7,"trees":[[1]]})"), ContainsSubstring("\"name\""));
  CHECK_THROWS_WITH(parse(R"({"trees":[[1,2.5]]})"), ContainsSubstring("integers"));
  CHECK_THROWS_WITH(parse(R"({"trees":[[-3]]})"), ContainsSubstring("invalid node -3"));
  CHECK_THROWS_WITH(parse(R"({"trees":[[1,0]]})"), ContainsSubstring("missing root"));
  CHECK_THROWS_WITH(parse(R"({"trees":[[1,9007199254740992]]})"), ContainsSubstring("depth cap"));
  CHECK_THROWS_WITH(parse(R"({"trees":[[1],[1,2]],"covariate":[1]})"),
                    ContainsSubstring("does not match tree count"));
  CHECK_THROWS_WITH(parse(R"({"trees":[[1]],"covariate":["a"]})"), ContainsSubstring("numbers"));
  CHECK_THROWS_WITH(parse(R"({"trees":[[1]],"correspondence_applied":1})"), ContainsSubstring("boolean"));
  CHECK_THROWS_WITH(parse(R"([1,2,3])"), ContainsSubstring("object expected"));
}

TEST_CASE("dataset file errors") {
  TempDir tmp;
  CHECK_THROWS_WITH(load_dataset_file(tmp.file("missing.json")), ContainsSubstring("cannot open"));
  write_file(tmp.file("broken.json"), "{not json");
  CHECK_THROWS_AS(load_dataset_file(tmp.file("broken.json")), std::runtime_error);
  CHECK_THROWS_WITH(write_file(tmp.file("no/such/dir.txt"), "x"), ContainsSubstring("cannot write"));
}

TEST_CASE("lines CSV") {
  const std::vector<KTreeLine> pcs{{T({1}), {3, 2}, 2}, {T({1}), {2}, 1}};
  const std::string csv = lines_csv(pcs);
  CHECK(csv ==
        "pc,k,position,node\n"
        "1,2,0,1\n"
        "1,2,1,3\n"
        "1,2,2,2\n"
        "2,1,0,1\n"
        "2,1,1,2\n");

  TempDir tmp;
  write_file(tmp.file("pcs.csv"), csv);
  const auto back = read_lines_csv(tmp.file("pcs.csv"));
  REQUIRE(back.size() == 2);
  CHECK(back[0].start == T({1}));
  CHECK(back[0].added == std::vector<NodeId>{3, 2});
  CHECK(back[0].window == 2);
  CHECK(back[1].added == std::vector<NodeId>{2});
  CHECK(back[1].window == 1);

  write_file(tmp.file("bad_header.csv"), "a,b\n");
  CHECK_THROWS_WITH(read_lines_csv(tmp.file("bad_header.csv")), ContainsSubstring("expected header"));
  write_file(tmp.file("gap.csv"), "pc,k,position,node\n1,2,0,1\n1,2,2,3\n");
  CHECK_THROWS_WITH(read_lines_csv(tmp.file("gap.csv")), ContainsSubstring("non-contiguous positions for pc 1"));
  write_file(tmp.file("bad_field.csv"), "pc,k,position,node\nx,2,0,1\n");
  CHECK_THROWS_WITH(read_lines_csv(tmp.file("bad_field.csv")), ContainsSubstring("bad pc field"));
  write_file(tmp.file("empty.csv"), "pc,k,position,node\n");
  CHECK_THROWS_WITH(read_lines_csv(tmp.file("empty.csv")), ContainsSubstring("no component rows"));
}

TEST_CASE("curve CSV") {
  const TreeCurve c{T({1, 2}), {3, 4}};
  const std::string csv = curve_csv(c);
  CHECK(csv ==
        "position,node\n"
        "0,1\n"
        "0,2\n"
        "1,3\n"
        "2,4\n");
  TempDir tmp;
  write_file(tmp.file("curve.csv"), csv);
  const TreeCurve back = read_curve_csv(tmp.file("curve.csv"));
  CHECK(back.start == c.start);
  CHECK(back.added == c.added);
}

TEST_CASE("scores and regression CSV") {
  CHECK(scores_csv({2, 1}) == "tree_index,score\n1,2\n2,1\n");
  const RegressionResult r{1.9, 0.0, 0.5, 3.8, 0.0625, 4};
  CHECK(regress_summary_csv(r) ==
        "slope,intercept,slope_se,t_stat,p_value,n\n"
        "1.9,0,0.5,3.8,0.0625,4\n");
}

TEST_CASE("benchmark and trace CSV") {
  BenchmarkRecord done{"set001", 5, "bb", 0.25, true, 3, {{4, 2, 1, 5}}};
  BenchmarkRecord cut{"set001", 5, "brute", 0.5, false, std::nullopt, {}};
  CHECK(bench_csv({done, cut}) ==
        "dataset,method,support_size,elapsed_s,completed,objective\n"
        "set001,bb,5,0.25,true,3\n"
        "set001,brute,5,0.5,false,\n");

  CHECK(trace_csv("set001", done.trace) ==
        "dataset,iteration,created,surviving,min_lb,min_ub\n"
        "set001,1,4,2,1,5\n");
  CHECK(trace_csv(std::vector<BenchmarkRecord>{done, cut}) ==
        "dataset,iteration,created,surviving,min_lb,min_ub\n"
        "set001,1,4,2,1,5\n");
}

TEST_CASE("benchmark runs are deterministic across thread counts") {
  const auto sets = simulate_sets(3, 4, 0.5, 4, false, 5);
  const auto serial = benchmark(sets, 30.0, 1);
  const auto parallel = benchmark(sets, 30.0, 2);
  REQUIRE(serial.size() == 6);
  REQUIRE(parallel.size() == 6);
  CHECK(mask_elapsed(bench_csv(serial)) == mask_elapsed(bench_csv(parallel)));
  CHECK(trace_csv(serial) == trace_csv(parallel));
  for (std::size_t i = 0; i < serial.size(); i += 2) {
    CHECK(serial[i].method == "bb");
    CHECK(serial[i + 1].method == "brute");
    CHECK(serial[i].dataset_id == serial[i + 1].dataset_id);
    REQUIRE(serial[i].completed);
    REQUIRE(serial[i + 1].completed);
    CHECK(serial[i].objective == serial[i + 1].objective);
  }
  CHECK(serial[0].dataset_id == "set001");
  CHECK_THROWS_AS(benchmark(sets, 0.0, 1), std::invalid_argument);
}

TEST_CASE("D-L view rows") {
  {
    const auto rows = dlview_rows(T({1}));
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].node == 1);
    CHECK(rows[0].x == 1);
    CHECK(rows[0].y == 0.0);
    CHECK_FALSE(rows[0].parent.has_value());
  }
  {
    const auto rows = dlview_rows(T({1, 2, 3}));
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].y == std::log2(3.0));
    CHECK(rows[1].x == 2);
    CHECK(rows[1].y == 0.0);
    CHECK(rows[1].parent == NodeId{1});
    CHECK(rows[2].parent == NodeId{1});
  }
  {
    const auto rows = dlview_rows(T({1, 2, 3, 4, 5, 6, 7}));
    CHECK(rows[0].y == std::log2(7.0));
    CHECK(rows[1].y == std::log2(3.0));
  }
}

TEST_CASE("D-L view CSV") {
  const std::string expect = "node,x,y,parent\n1,1," + fmt_double(std::log2(3.0)) + ",\n2,2,0,1\n3,2,0,1\n";
  CHECK(dlview_csv(dlview_rows(T({1, 2, 3}))) == expect);
}

TEST_CASE("D-L view SVG") {
  const auto rows = dlview_rows(T({1, 2, 3, 4, 5}));
  const std::string svg = dlview_svg(rows, {{1, "start"}, {2, "pc1"}, {4, "pc2"}});
  CHECK(svg.find("<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\"") != std::string::npos);
  CHECK(svg.find("class=\"start\"") != std::string::npos);
  CHECK(svg.find("class=\"pc1\"") != std::string::npos);
  CHECK(svg.find("class=\"pc2\"") != std::string::npos);
  CHECK(svg.find("class=\"node\"") != std::string::npos);  // unmarked nodes
  CHECK(svg.find("<title>5</title>") != std::string::npos);
  std::size_t circles = 0;
  for (std::size_t p = svg.find("<circle"); p != std::string::npos; p = svg.find("<circle", p + 1)) ++circles;
  CHECK(circles == rows.size());
  CHECK(svg.find("<line class=\"edge\"") != std::string::npos);
  CHECK_THROWS_AS(dlview_svg({}), std::invalid_argument);
}
