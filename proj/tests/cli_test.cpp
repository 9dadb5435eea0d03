#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cli.hpp"
#include "fgft/gallery.hpp"
#include "fgft/plan.hpp"

namespace fgft::cli {
namespace {

namespace fs = std::filesystem;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result invoke(const std::vector<std::string>& args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  return lines;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("fgft_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  void write(const std::string& name, const std::string& text) const { std::ofstream(path(name)) << text; }

  fs::path dir_;
};

TEST_F(CliTest, HelpAndUsageErrors) {
  const Result help = invoke({"--help"});
  EXPECT_EQ(help.code, kExitOk);
  EXPECT_NE(help.out.find("compare"), std::string::npos);
  EXPECT_EQ(invoke({}).code, kExitUsage);
  EXPECT_EQ(invoke({"frobnicate"}).code, kExitUsage);
  EXPECT_EQ(invoke({"plan"}).code, kExitUsage);
  EXPECT_EQ(invoke({"plan", "cycle12", "--max-depth", "x"}).code, kExitUsage);
}

TEST_F(CliTest, GalleryListAndEmit) {
  const Result list = invoke({"gallery", "list"});
  ASSERT_EQ(list.code, kExitOk);
  EXPECT_EQ(lines_of(list.out).size(), gallery_names().size());

  ASSERT_EQ(invoke({"gallery", "emit", "cycle12", "--out", path("c12.json")}).code, kExitOk);
  EXPECT_TRUE(approx_equal(load_graph(path("c12.json")), cycle_graph(12), 0.0));
  EXPECT_EQ(invoke({"gallery", "emit", "nope"}).code, kExitUsage);
}

TEST_F(CliTest, SearchPrintsOneInvolutionPerLine) {
  const Result r = invoke({"search", "cycle12"});
  ASSERT_EQ(r.code, kExitOk);
  const auto lines = lines_of(r.out);
  ASSERT_FALSE(lines.empty());
  for (const auto& line : lines) {
    const auto j = nlohmann::json::parse(line);
    const Involution phi(j.at("phi").get<std::vector<int>>());
    EXPECT_TRUE(is_phi_symmetric(cycle_graph(12), phi));
    EXPECT_EQ(j.at("pairs").get<int>(), phi.pair_count());
  }

  const Result tree = invoke({"search", "--tree", "skeleton15"});
  EXPECT_EQ(tree.code, kExitOk);
  EXPECT_FALSE(tree.out.empty());

  write("k8.json", graph_to_json(complete_graph(8)));
  const Result truncated = invoke({"search", path("k8.json"), "--budget", "10"});
  EXPECT_EQ(truncated.code, kExitOk);
  EXPECT_NE(truncated.err.find("budget"), std::string::npos);

  EXPECT_EQ(invoke({"search", path("missing.json")}).code, kExitUsage);
}

TEST_F(CliTest, PlanThenApplyMatchesLibrary) {
  ASSERT_EQ(invoke({"plan", "cycle12", "--out", path("plan.json")}).code, kExitOk);
  const FastGftPlan plan = load_plan(path("plan.json"));
  EXPECT_EQ(plan.n, 12);

  write("x.csv", "1,0,0,0,0,0,0,0,0,0,0,0\n0.5,1,2,3,4,5,6,7,8,9,10,-1\n");
  const Result r = invoke({"apply", path("plan.json"), path("x.csv")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto rows = lines_of(r.out);
  ASSERT_EQ(rows.size(), 2u);
  Vector x(12);
  x << 0.5, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, -1;
  const Vector y = apply(plan, x);
  std::istringstream cells(rows[1]);
  std::string cell;
  for (int k = 0; std::getline(cells, cell, ','); ++k) EXPECT_NEAR(std::stod(cell), y(k), 1e-12);
}

TEST_F(CliTest, ApplyRejectsWrongDimension) {
  ASSERT_EQ(invoke({"plan", "cycle12", "--out", path("plan.json")}).code, kExitOk);
  write("bad.csv", "1,2,3\n");
  const Result r = invoke({"apply", path("plan.json"), path("bad.csv")});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_NE(r.err.find("expected 12"), std::string::npos);
}

TEST_F(CliTest, PlanWarnsWithoutSymmetry) {
  write("g.json", R"({"n": 3, "edges": [[0, 1, 1], [1, 2, 2]]})");
  const Result r = invoke({"plan", path("g.json")});
  EXPECT_EQ(r.code, kExitOk);
  EXPECT_NE(r.err.find("no symmetry"), std::string::npos);
}

TEST_F(CliTest, MalformedGraphIsAUsageError) {
  write("bad.json", R"({"n": 2, "edges": [[0, 5, 1]]})");
  EXPECT_EQ(invoke({"plan", path("bad.json")}).code, kExitUsage);
}

TEST_F(CliTest, BenchReportsEveryGraph) {
  const Result r = invoke({"bench", "cycle12", "bidiag16", "--signals", "50", "--reps", "1", "--out", path("b.json")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.err.find("repetitions"), std::string::npos);
  std::ifstream in(path("b.json"));
  const auto report = nlohmann::json::parse(in);
  ASSERT_EQ(report.size(), 2u);
  EXPECT_EQ(report[0].at("graph"), "cycle12");
  EXPECT_LE(report[0].at("max_deviation").get<double>(), 1e-8);
  EXPECT_EQ(report[0].at("fast_ops").at("additions"), 44);

  EXPECT_EQ(invoke({"bench"}).code, kExitUsage);
  EXPECT_EQ(invoke({"bench", "cycle12", "--signals", "0"}).code, kExitUsage);
}

TEST_F(CliTest, CompareWritesCurves) {
  const Result r = invoke({"compare", "cycle12", "--signals", "20", "--reps", "1", "--layers", "0,3"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto lines = lines_of(r.out);
  ASSERT_EQ(lines.size(), 7u);
  EXPECT_EQ(lines[0], "implementation,layers,runtime_ms,delta,epsilon");
  EXPECT_EQ(lines[1].rfind("matrix,", 0), 0u);
  EXPECT_EQ(lines[2].rfind("haar+matrix,", 0), 0u);
  EXPECT_EQ(lines[3].rfind("approx,0,", 0), 0u);
  EXPECT_EQ(lines[4].rfind("haar+approx,0,", 0), 0u);
}

TEST_F(CliTest, CompareWithoutSymmetryKeepsTwoCurves) {
  write("g.json", R"({"n": 3, "edges": [[0, 1, 1], [1, 2, 2]]})");
  const Result r = invoke({"compare", path("g.json"), "--signals", "20", "--reps", "1", "--layers", "0,1"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto lines = lines_of(r.out);
  ASSERT_EQ(lines.size(), 4u);
  EXPECT_EQ(lines[1].rfind("matrix,", 0), 0u);
  EXPECT_EQ(lines[2].rfind("approx,0,", 0), 0u);
  EXPECT_EQ(lines[3].rfind("approx,1,", 0), 0u);
  EXPECT_NE(r.err.find("skipping"), std::string::npos);
}

}  // namespace
}  // namespace fgft::cli
