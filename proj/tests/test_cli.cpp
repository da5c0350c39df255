#include <gtest/gtest.h>

#include <algorithm>

#include <nlohmann/json.hpp>

#include "support.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using testing_support::data_path;
using testing_support::slurp;
using testing_support::spit;
using testing_support::TempDir;
using testing_support::CliResult;
using testing_support::quote;
using testing_support::run_cli;

namespace {

CliResult run(const std::string& args) { return run_cli(args); }

bool no_partials(const fs::path& dir) {
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.path().extension() == ".partial") return false;
  return true;
}

/// Reference confusion matrix (tp 41, fn 17, fp 9, tn 33) as 100 labelled nodes.
void write_reference_labels(const fs::path& report, const fs::path& truth) {
  std::string r = "node_id,community_id,pagerank,threshold,label\n";
  std::string t = "node_id,block_id,is_zombie,region\n";
  auto add = [&, id = 0](int count, bool is_zombie, bool flagged) mutable {
    for (int i = 0; i < count; ++i, ++id) {
      r += std::to_string(id) + ",0,0.01,0.02," + (flagged ? "zombie" : "normal") + "\n";
      t += std::to_string(id) + ",0," + (is_zombie ? "1" : "0") + ",unknown\n";
    }
  };
  add(41, true, true);
  add(17, true, false);
  add(9, false, true);
  add(33, false, false);
  spit(report, r);
  spit(truth, t);
}

} // namespace

TEST(Cli, VersionAndUsage) {
  EXPECT_EQ(run("--version").code, 0);
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("frobnicate").code, 2);
  EXPECT_EQ(run("rank --mode sideways a b -o c").code, 2);
}

TEST(Cli, ConvertAndStats) {
  TempDir dir;
  auto r = run("convert " + quote(data_path("golden/degrees.txt").string()) + " --cache " + quote((dir / "g.cache").string()));
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("parsed arcs 3"), std::string::npos) << r.out;
  EXPECT_TRUE(fs::exists(dir / "g.cache.manifest.json"));

  r = run("stats " + quote((dir / "g.cache").string()) + " --bin-width 1 -o " + quote((dir / "h.csv").string()));
  ASSERT_EQ(r.code, 0) << r.out;
  std::string hist = slurp(dir / "h.csv");
  EXPECT_NE(hist.find("degree_lower,count\n1,1\n2,1\n3,1\n"), std::string::npos) << hist;
}

TEST(Cli, ParseErrorExitsTwoAndLeavesNothing) {
  TempDir dir;
  spit(dir / "bad.txt", "2 1\n0 1 1 7\n1 0\n");
  auto r = run("convert " + quote((dir / "bad.txt").string()) + " --cache " + quote((dir / "g.cache").string()));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("line 2"), std::string::npos) << r.out;
  EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 1);
  EXPECT_FALSE(fs::exists(dir / "g.cache"));
  EXPECT_TRUE(no_partials(dir.path()));
}

TEST(Cli, MissingInputExitsFour) {
  TempDir dir;
  auto r = run("convert /nonexistent/network --cache " + quote((dir / "g.cache").string()));
  EXPECT_EQ(r.code, 4);
  EXPECT_FALSE(fs::exists(dir / "g.cache"));
  EXPECT_EQ(run("pipeline /nonexistent/dir -o " + quote((dir / "out").string())).code, 4);
}

TEST(Cli, FailedStageRemovesPartialOutputs) {
  TempDir dir;
  spit(dir / "ranks.csv", "node_id,community_id,io,pagerank,converged\n0,0,0.5,0.5,1\n1,0,0.5,oops,1\n");
  auto r = run("detect " + quote((dir / "ranks.csv").string()) + " -o " + quote((dir / "report.csv").string()) +
               " --summary " + quote((dir / "summary.json").string()));
  EXPECT_EQ(r.code, 2) << r.out;
  EXPECT_FALSE(fs::exists(dir / "report.csv"));
  EXPECT_FALSE(fs::exists(dir / "summary.json"));
  EXPECT_TRUE(no_partials(dir.path()));
}

TEST(Cli, DetectOnUniformRanks) {
  TempDir dir;
  std::string ranks = "node_id,community_id,io,pagerank,converged\n";
  for (int c = 0; c < 3; ++c)
    for (int i = 0; i < 8; ++i) ranks += std::to_string(c * 8 + i) + "," + std::to_string(c) + ",0.5,0.125,1\n";
  spit(dir / "ranks.csv", ranks);
  auto r = run("detect " + quote((dir / "ranks.csv").string()) + " -o " + quote((dir / "report.csv").string()) +
               " --summary " + quote((dir / "summary.json").string()));
  ASSERT_EQ(r.code, 0) << r.out;
  auto summary = json::parse(slurp(dir / "summary.json"));
  EXPECT_EQ(summary["proportion"].get<double>(), 0.0);
  EXPECT_EQ(summary["flagged"].get<int>(), 0);
  EXPECT_EQ(summary["total"].get<int>(), 24);
  EXPECT_EQ(summary["method"], "linear");
  EXPECT_EQ(summary["min_size"].get<int>(), 5);
}

TEST(Cli, EvaluateReferenceMatrix) {
  TempDir dir;
  write_reference_labels(dir / "report.csv", dir / "truth.csv");
  auto r = run("evaluate " + quote((dir / "report.csv").string()) + " " + quote((dir / "truth.csv").string()) +
               " -o " + quote((dir / "metrics.json").string()));
  ASSERT_EQ(r.code, 0) << r.out;
  auto m = json::parse(slurp(dir / "metrics.json"));
  EXPECT_EQ(m["tp"].get<int>(), 41);
  EXPECT_EQ(m["fn"].get<int>(), 17);
  EXPECT_EQ(m["fp"].get<int>(), 9);
  EXPECT_EQ(m["tn"].get<int>(), 33);
  EXPECT_EQ(m["accuracy"].get<double>(), 0.74);
  EXPECT_EQ(m["precision"].get<double>(), 0.82);
  EXPECT_EQ(m["recall"].get<double>(), 41.0 / 58.0);

  r = run("evaluate --transpose " + quote((dir / "report.csv").string()) + " " + quote((dir / "truth.csv").string()) +
          " -o " + quote((dir / "t.json").string()));
  ASSERT_EQ(r.code, 0) << r.out;
  auto t = json::parse(slurp(dir / "t.json"));
  EXPECT_EQ(t["fn"].get<int>(), 9);
  EXPECT_EQ(t["fp"].get<int>(), 17);
}

TEST(Cli, EvaluateReportsUndefinedMetrics) {
  TempDir dir;
  spit(dir / "report.csv", "node_id,community_id,pagerank,threshold,label\n0,0,0.5,0.1,normal\n1,0,0.5,0.1,normal\n");
  spit(dir / "truth.csv", "node_id,block_id,is_zombie,region\n0,0,0,x\n1,0,0,x\n");
  auto r = run("evaluate " + quote((dir / "report.csv").string()) + " " + quote((dir / "truth.csv").string()) +
               " -o " + quote((dir / "m.json").string()));
  ASSERT_EQ(r.code, 0) << r.out;
  auto m = json::parse(slurp(dir / "m.json"));
  EXPECT_EQ(m["precision"], "undefined");
  EXPECT_EQ(m["recall"], "undefined");
  EXPECT_EQ(m["accuracy"].get<double>(), 1.0);
}

TEST(Cli, NonConvergenceExitsThreeButWritesRanks) {
  TempDir dir;
  auto g = quote((dir / "g.cache").string());
  ASSERT_EQ(run("convert " + quote(data_path("planted/weibo_network").string()) + " --cache " + g).code, 0);
  ASSERT_EQ(run("communities " + g + " -o " + quote((dir / "p.csv").string())).code, 0);
  auto r = run("rank " + g + " " + quote((dir / "p.csv").string()) + " --max-iters 2 -o " +
               quote((dir / "r.csv").string()));
  EXPECT_EQ(r.code, 3) << r.out;
  EXPECT_TRUE(fs::exists(dir / "r.csv"));
}

TEST(Cli, PipelineEqualsComposedStages) {
  TempDir dir;
  const std::string corpus = data_path("planted").string();
  const fs::path pipe = dir / "pipe";
  auto r = run("pipeline " + quote(corpus) + " -o " + quote(pipe.string()) + " --seed 9 --damping 0.8");
  ASSERT_EQ(r.code, 0) << r.out;

  const fs::path s = dir / "steps";
  fs::create_directories(s);
  auto q = [&](const char* name) { return quote((s / name).string()); };
  auto in = [&](const char* name) { return quote((fs::path(corpus) / name).string()); };
  ASSERT_EQ(run("convert " + in("weibo_network") + " --cache " + q("graph.cache")).code, 0);
  ASSERT_EQ(run("communities " + q("graph.cache") + " --seed 9 -o " + q("partition.csv")).code, 0);
  ASSERT_EQ(run("rank " + q("graph.cache") + " " + q("partition.csv") + " --damping 0.8 --uidlist " + in("uidlist") +
                " -o " + q("ranks.csv"))
                .code,
            0);
  ASSERT_EQ(run("detect " + q("ranks.csv") + " -o " + q("report.csv") + " --summary " + q("summary.json")).code, 0);
  ASSERT_EQ(run("evaluate " + q("report.csv") + " " + in("truth.csv") + " --regions " + in("profiles.csv") +
                " --uidlist " + in("uidlist") + " --regions-output " + q("regions.csv") + " -o " + q("metrics.json"))
                .code,
            0);

  for (const char* f : {"graph.cache", "partition.csv", "ranks.csv", "report.csv", "summary.json", "metrics.json",
                        "regions.csv"})
    EXPECT_EQ(slurp(pipe / f), slurp(s / f)) << f;

  // Each output names its producing run.
  auto manifest = json::parse(slurp(pipe / "manifest.json"));
  std::string first_line = slurp(pipe / "report.csv").substr(0, slurp(pipe / "report.csv").find('\n'));
  bool named = false;
  for (const auto& stage : manifest["stages"])
    if (first_line == "# run: " + stage["run_id"].get<std::string>()) named = stage["stage"] == "detect";
  EXPECT_TRUE(named) << first_line;
}

TEST(Cli, ManifestReplayReproducesReport) {
  TempDir dir;
  const std::string corpus = data_path("planted").string();
  auto r = run("pipeline " + quote(corpus) + " -o " + quote((dir / "a").string()) +
               " --seed 3 --mode even --min-size 7 --quartile-method nearest-rank");
  ASSERT_EQ(r.code, 0) << r.out;
  r = run("pipeline " + quote(corpus) + " -o " + quote((dir / "b").string()) + " --from-manifest " +
          quote((dir / "a" / "manifest.json").string()));
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(slurp(dir / "a" / "report.csv"), slurp(dir / "b" / "report.csv"));
  auto ma = json::parse(slurp(dir / "a" / "manifest.json"));
  auto mb = json::parse(slurp(dir / "b" / "manifest.json"));
  EXPECT_EQ(ma["config"], mb["config"]);
  EXPECT_EQ(ma["config"]["rank"]["mode"], "even");
  EXPECT_EQ(ma["config"]["detect"]["quartile_method"], "nearest-rank");
  EXPECT_EQ(ma["config"]["louvain"]["seed"].get<int>(), 3);
}

TEST(Cli, ThreadCountDoesNotChangeOutputs) {
  TempDir dir;
  const std::string corpus = data_path("planted").string();
  ASSERT_EQ(run("--threads 1 pipeline " + quote(corpus) + " -o " + quote((dir / "a").string())).code, 0);
  ASSERT_EQ(run("--threads 7 pipeline " + quote(corpus) + " -o " + quote((dir / "b").string())).code, 0);
  EXPECT_EQ(slurp(dir / "a" / "ranks.csv"), slurp(dir / "b" / "ranks.csv"));
}

TEST(Cli, SynthReproducesCommittedCorpora) {
  for (const char* name : {"planted", "corpus"}) {
    TempDir dir;
    auto r = run("synth " + quote(data_path(std::string(name) + "/config.json").string()) + " -o " +
                 quote(dir.path().string()));
    ASSERT_EQ(r.code, 0) << r.out;
    for (const char* f : {"weibo_network", "uidlist", "profiles.csv", "truth.csv"})
      EXPECT_EQ(slurp(dir / f), slurp(data_path(std::string(name) + "/" + f))) << name << "/" << f;
  }
}

TEST(Cli, CorpusPipelineMatchesPilotRun) {
  auto pilot = json::parse(slurp(data_path("corpus/pilot.json")));
  TempDir dir;
  auto r = run("pipeline " + quote(data_path("corpus")) + " -o " + quote(dir.path()));
  ASSERT_EQ(r.code, 0) << r.out;
  auto m = json::parse(slurp(dir / "metrics.json"));
  const auto& want = pilot["observed"];
  for (const char* k : {"tp", "fn", "fp", "tn"}) EXPECT_EQ(m[k], want[k]) << k;
  auto summary = json::parse(slurp(dir / "summary.json"));
  EXPECT_EQ(summary["flagged"], want["flagged"]);
  EXPECT_EQ(summary["communities"], want["communities"]);
  auto manifest = json::parse(slurp(dir / "manifest.json"));
  for (const auto& stage : manifest["stages"]) {
    if (stage["stage"] == "communities") {
      EXPECT_EQ(stage["summary"]["modularity"], want["modularity"]);
    }
  }

  const double tp = m["tp"], fn = m["fn"], fp = m["fp"], tn = m["tn"];
  EXPECT_GE(tp / (tp + fn), pilot["thresholds"]["recall_min"].get<double>());
  EXPECT_LE(fp / (fp + tn), pilot["thresholds"]["false_positive_rate_max"].get<double>());
}
