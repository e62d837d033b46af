#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "mcf/bench.hpp"

using namespace mcf;

namespace {

RunRecord sample_record() {
  RunRecord r;
  r.instance = "grid,\"odd\" name";
  r.formulation = "tree";
  r.strategy = "master_easy";
  r.status = "optimal";
  r.objective = 827319.123456789;
  r.lower_bound = 827300.5;
  r.gap = 2.2543e-05;
  r.wall_seconds = 0.1 + 0.2;
  r.peak_memory_bytes = 123456789;
  r.iterations = 17;
  r.columns_generated = 412;
  r.rows_activated = 9;
  r.nodes = 25;
  r.edges = 80;
  r.commodities = 40;
  r.sources = 10;
  return r;
}

RunRecord timed(const std::string& inst, const std::string& f, const std::string& status, double t) {
  RunRecord r;
  r.instance = inst;
  r.formulation = f;
  r.strategy = "auto";
  r.status = status;
  r.wall_seconds = t;
  r.commodities = 100;
  r.sources = 10;
  return r;
}

std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) rows.push_back(detail::split_csv(line));
  return rows;
}

std::filesystem::path temp_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("mcf-test-" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace

TEST(RunRecordCsv, RoundTrip) {
  const RunRecord r = sample_record();
  EXPECT_EQ(parse_csv_row(to_csv_row(r)), r);
  RunRecord t = timed("x", "path", "timeout", 1.0);
  EXPECT_EQ(parse_csv_row(to_csv_row(t)).status, "timeout");
  EXPECT_TRUE(std::isnan(parse_csv_row(to_csv_row(t)).objective));
  EXPECT_FALSE(parse_csv_row(to_csv_row(t)).lower_bound.has_value());
}

TEST(RunRecordCsv, HeaderIsFixed) {
  std::ostringstream out;
  write_runs_csv(out, {sample_record(), timed("y", "path", "optimal", 2.0)});
  std::istringstream in(out.str());
  const auto back = read_runs_csv(in);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0], sample_record());
  EXPECT_EQ(out.str().substr(0, out.str().find('\n')), kRunCsvHeader);
  std::istringstream bad("instance,formulation\n");
  EXPECT_THROW(read_runs_csv(bad), InputError);
}

TEST(RunRecordJson, RoundTrip) {
  const RunRecord r = sample_record();
  EXPECT_EQ(run_record_from_json(nlohmann::json::parse(to_json(r).dump())), r);
  const RunRecord t = timed("x", "tree", "timeout", 3.0);
  const RunRecord back = run_record_from_json(nlohmann::json::parse(to_json(t).dump()));
  EXPECT_TRUE(std::isnan(back.objective));
  EXPECT_EQ(back.status, "timeout");
}

TEST(Profile, TwoSolverColumns) {
  const std::vector<RunRecord> runs{timed("a", "tree", "optimal", 1.0), timed("a", "path", "optimal", 2.0),
                                    timed("b", "tree", "optimal", 4.0), timed("b", "path", "optimal", 1.0)};
  std::ostringstream out;
  write_profile_csv(out, runs);
  std::istringstream in(out.str());
  std::string header, row;
  std::getline(in, header);
  EXPECT_EQ(header, "tau,path,tree");
  std::getline(in, row);
  EXPECT_EQ(row, "1,0.5,0.5");
  std::string last;
  while (std::getline(in, row)) last = row;
  EXPECT_EQ(last, "4,1,1");
}

TEST(Cactus, TimeoutSitsAtCap) {
  const std::vector<RunRecord> runs{timed("a", "path", "timeout", 7.3), timed("b", "path", "optimal", 2.0)};
  std::ostringstream out;
  write_cactus_csv(out, runs, 60.0);
  EXPECT_EQ(out.str(), "formulation,rank,seconds,solved\npath,1,2,1\npath,2,60,0\n");
}

TEST(Scatter, IdenticalTimesOnDiagonal) {
  const std::vector<RunRecord> runs{timed("u", "tree", "optimal", 1.5), timed("u", "path", "optimal", 1.5)};
  std::ostringstream out;
  write_scatter_csv(out, runs, 60.0);
  EXPECT_EQ(out.str(), "instance,tree_seconds,path_seconds,tree_status,path_status\nu,1.5,1.5,optimal,optimal\n");
}

TEST(Heatmap, SharedSourceFractionAndSpeedup) {
  const std::vector<RunRecord> runs{timed("u", "tree", "optimal", 1.0), timed("u", "path", "optimal", 3.0)};
  std::ostringstream out;
  write_heatmap_csv(out, runs, 60.0);
  EXPECT_EQ(out.str(), "instance,commodities,shared_source_fraction,speedup\nu,100,0.9,3\n");
}

TEST(GeneratorSpec, Parses) {
  const GeneratorParams p = parse_generator_spec("gen:n=20,m=60,k=30,s=5,seed=9,cap=tight");
  EXPECT_EQ(p.nodes, 20);
  EXPECT_EQ(p.edges, 60);
  EXPECT_EQ(p.commodities, 30u);
  EXPECT_EQ(p.sources, 5u);
  EXPECT_EQ(p.seed, 9u);
  EXPECT_EQ(p.capacity, CapacityMode::Tight);
  EXPECT_THROW(parse_generator_spec("gen:n=20,q=1"), InputError);
  EXPECT_THROW(parse_generator_spec("n=20"), InputError);
  EXPECT_EQ(load_instance("gen:n=20,m=60,k=30,s=5,seed=9").commodity_count(), 30u);
}

TEST(LoadInstance, MissingFile) { EXPECT_THROW(load_instance("/nonexistent/file.mcf"), InputError); }

TEST(Bench, TwoInstancesTwoFormulations) {
  const auto dir = temp_dir("bench");
  {
    std::ofstream(dir / "tri.mcf") << "p mcf 3 3 2\na 1 2 1 10\na 2 3 1 10\na 1 3 3 10\nd 1 3 2\nd 1 2 1\n";
  }
  const auto j = nlohmann::json::parse(R"({
    "timeout": 30,
    "formulations": ["tree", "path"],
    "instances": [
      {"name": "tri", "path": "tri.mcf"},
      {"name": "gen", "spec": "gen:n=12,m=40,k=10,s=10,seed=2,cap=mixed"},
      {"name": "gone", "path": "missing.mcf"}
    ]})");
  const BenchManifest m = parse_manifest(j, dir);
  std::ostringstream log;
  const BenchResult res = run_bench(m, dir / "out", log);
  EXPECT_EQ(res.runs.size(), 4u);
  EXPECT_EQ(res.skipped, (std::vector<std::string>{"gone"}));
  EXPECT_NE(log.str().find("warning: skipping gone"), std::string::npos);
  EXPECT_EQ(read_csv(dir / "out" / "runs.csv").size(), 5u);
  EXPECT_EQ(read_csv(dir / "out" / "profile.csv")[0], (std::vector<std::string>{"tau", "path", "tree"}));
  EXPECT_EQ(read_csv(dir / "out" / "scatter.csv").size(), 3u);
  EXPECT_EQ(read_csv(dir / "out" / "heatmap.csv").size(), 3u);
  EXPECT_EQ(read_csv(dir / "out" / "cactus.csv").size(), 5u);
  std::ifstream in(dir / "out" / "runs.csv");
  for (const RunRecord& r : read_runs_csv(in)) {
    EXPECT_EQ(r.status, "optimal");
    EXPECT_LE(r.gap, m.config.rel_tol);
  }
  // Unique sources: tree and path runs reach the same objective.
  EXPECT_DOUBLE_EQ(res.runs[2].objective, res.runs[3].objective);
}

TEST(Bench, ReportsAreDeterministicApartFromTimings) {
  const auto j = nlohmann::json::parse(R"({
    "formulations": ["tree", "path"],
    "instances": [{"spec": "gen:n=15,m=50,k=30,s=4,seed=5,cap=tight"}]})");
  const BenchManifest m = parse_manifest(j);
  std::ostringstream log;
  auto a = run_bench(m, temp_dir("det-a"), log).runs;
  auto b = run_bench(m, temp_dir("det-b"), log).runs;
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    a[i].wall_seconds = b[i].wall_seconds = 0;
    a[i].peak_memory_bytes = b[i].peak_memory_bytes = 0;
    EXPECT_EQ(a[i], b[i]);
  }
}

TEST(PeakRss, Positive) { EXPECT_GT(peak_rss_bytes(), 0u); }
