#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "json.hpp"
#include "synthetic.hpp"
#include "topictrace/serialize.hpp"

using namespace topictrace;
using namespace topictrace::testing;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "topictrace");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

SyntheticCorpus small_corpus() {
  auto c = make_lda_corpus(3, 60, 30, 40, 0.2, 0.1, 77);
  for (std::size_t d = 27; d < 30; ++d) {
    c.docs[d].meta.role = Role::writing;
    c.docs[d].meta.date = {1860, 1, 1};
  }
  return c;
}

}  // namespace

class CliPipeline : public ::testing::Test {
 protected:
  void SetUp() override {
    dir = fresh_temp_dir(::testing::UnitTest::GetInstance()->current_test_info()->name());
    manifest = write_text_corpus(dir / "in", small_corpus()).string();
    out = (dir / "out").string();
  }
  std::vector<std::string> global() const { return {"--seed", "5", "--output-dir", out}; }
  Result step(std::vector<std::string> args) const {
    auto g = global();
    g.insert(g.end(), args.begin(), args.end());
    return run(g);
  }
  fs::path dir;
  std::string manifest;
  std::string out;
};

TEST_F(CliPipeline, EndToEnd) {
  auto r = step({"ingest", "--manifest", manifest});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("30 documents, "), std::string::npos) << r.out;
  EXPECT_NE(r.out.find(" terms, "), std::string::npos);

  r = step({"train", "--corpus", out + "/corpus.json", "-K", "3", "--iters", "200"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("sweep 100/200"), std::string::npos);
  EXPECT_NE(r.out.find("sweep 200/200"), std::string::npos);

  r = step({"query", "--model", out + "/model.json", "--corpus", out + "/corpus.json", "--doc-id", "doc27",
            "-S", "20", "--iters", "40"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto ensemble = ensemble_from_json(read_file(out + "/ensemble_doc27.json"));
  EXPECT_EQ(ensemble.samples.size(), 20u);

  r = step({"cluster", "--ensemble", out + "/ensemble_doc27.json", "--model", out + "/model.json",
            "--k-max", "4", "--restarts", "3", "--svg"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(out + "/cluster_doc27.json"));
  EXPECT_TRUE(fs::exists(out + "/cluster_doc27.csv"));
  EXPECT_TRUE(balanced_xml(read_file(out + "/cluster_doc27.svg")));

  r = step({"query", "--model", out + "/model.json", "--corpus", out + "/corpus.json", "--doc-id", "doc28",
            "-S", "10", "--iters", "40"});
  ASSERT_EQ(r.code, 0) << r.err;

  r = step({"timeline", "--model", out + "/model.json", "--writing", out + "/ensemble_doc27.json",
            "--readings", manifest, "--snapshots", "yearly"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto tl = nlohmann::json::parse(read_file(out + "/timeline_doc27.json"));
  ASSERT_FALSE(tl["points"].empty());
  std::size_t prev = 0;
  for (const auto& p : tl["points"]) {
    EXPECT_GE(p["n_readings"].get<std::size_t>(), prev);
    EXPECT_GE(p["kl_bits"].get<double>(), 0.0);
    prev = p["n_readings"];
  }
  EXPECT_EQ(prev, 27u);

  r = step({"timeline", "--model", out + "/model.json", "--writing", out + "/ensemble_doc27.json",
            "--readings", out + "/corpus.json", "--reverse", "--format", "csv"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(out + "/timeline_reverse_doc27.csv"));

  r = step({"compare", "--model", out + "/model.json", "--ensembles", out + "/ensemble_doc27.json",
            out + "/ensemble_doc28.json", "--svg"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(balanced_xml(read_file(out + "/distance_matrix.svg")));
  const auto m = nlohmann::json::parse(read_file(out + "/distance_matrix.json"));
  EXPECT_EQ(m["d"][0][1], m["d"][1][0]);

  const auto runs = nlohmann::json::parse(read_file(out + "/run_manifest.json"))["runs"];
  for (const char* sub : {"ingest", "train", "query", "cluster", "timeline", "compare"})
    EXPECT_TRUE(runs.contains(sub)) << sub;
  EXPECT_EQ(runs["train"]["config"]["seed"], 5);
  EXPECT_FALSE(runs["train"]["config"].contains("threads"));
}

TEST_F(CliPipeline, RetrainingIsByteIdentical) {
  ASSERT_EQ(step({"ingest", "--manifest", manifest}).code, 0);
  ASSERT_EQ(step({"train", "--corpus", out + "/corpus.json", "-K", "3", "--iters", "50"}).code, 0);
  const auto first = read_file(out + "/model.json");
  auto g = global();
  g.insert(g.end(), {"--threads", "3", "train", "--corpus", out + "/corpus.json", "-K", "3", "--iters", "50"});
  ASSERT_EQ(run(g).code, 0);
  EXPECT_EQ(read_file(out + "/model.json"), first);
}

TEST_F(CliPipeline, QueryByPathDropsUnknownWords) {
  ASSERT_EQ(step({"ingest", "--manifest", manifest}).code, 0);
  ASSERT_EQ(step({"train", "--corpus", out + "/corpus.json", "-K", "3", "--iters", "30"}).code, 0);
  {
    std::ofstream f(dir / "novel.txt");
    f << "waaa waab zzzzunknown waac the of\n";
  }
  auto r = step({"query", "--model", out + "/model.json", "--path", (dir / "novel.txt").string(), "-S", "3",
                 "--iters", "10"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(out + "/ensemble_novel.json"));
  {
    std::ofstream f(dir / "alien.txt");
    f << "qqqq rrrr ssss\n";
  }
  r = step({"query", "--model", out + "/model.json", "--path", (dir / "alien.txt").string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("error:"), std::string::npos);
}

TEST_F(CliPipeline, SingleDistinctSampleReportsOneCluster) {
  ASSERT_EQ(step({"ingest", "--manifest", manifest}).code, 0);
  ASSERT_EQ(step({"train", "--corpus", out + "/corpus.json", "-K", "1", "--iters", "5"}).code, 0);
  ASSERT_EQ(step({"query", "--model", out + "/model.json", "--corpus", out + "/corpus.json", "--doc-id",
                  "doc27", "-S", "6", "--iters", "5"})
                .code,
            0);
  const auto r = step({"cluster", "--ensemble", out + "/ensemble_doc27.json", "--model", out + "/model.json"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.err.find("warning"), std::string::npos);
  const auto report = nlohmann::json::parse(read_file(out + "/cluster_doc27.json"));
  EXPECT_EQ(report["k"], 1);
  EXPECT_TRUE(report["mean_silhouette"].is_null());
}

TEST_F(CliPipeline, PlantedTwoModeEnsembleClustersIntoTwo) {
  ASSERT_EQ(step({"ingest", "--manifest", manifest}).code, 0);
  ASSERT_EQ(step({"train", "--corpus", out + "/corpus.json", "-K", "6", "--iters", "20"}).code, 0);
  const auto model = model_from_json(read_file(out + "/model.json"));
  const auto planted = planted_modes(2, 30, 6, 0.7, 300.0, 12);
  SampleEnsemble e{"planted", model_fingerprint(model), {}};
  for (std::size_t i = 0; i < planted.points.size(); ++i)
    e.samples.push_back({i, planted.points[i], 50.0 + static_cast<double>(planted.mode[i])});
  write_file(dir / "planted.json", ensemble_to_json(e));

  auto r = step({"cluster", "--ensemble", (dir / "planted.json").string(), "--model", out + "/model.json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto report = nlohmann::json::parse(read_file(out + "/cluster_planted.json"));
  EXPECT_EQ(report["k"], 2);
  EXPECT_EQ(report["clusters"][0]["size"].get<int>() + report["clusters"][1]["size"].get<int>(), 60);

  // An ensemble is only accepted together with the model it was sampled from.
  ASSERT_EQ(step({"train", "--corpus", out + "/corpus.json", "-K", "6", "--iters", "21"}).code, 0);
  r = step({"cluster", "--ensemble", (dir / "planted.json").string(), "--model", out + "/model.json"});
  EXPECT_EQ(r.code, 2);
}

TEST(CliErrors, ValidationFailuresExitTwo) {
  const auto dir = fresh_temp_dir("cli_errors");
  const auto out = (dir / "out").string();

  auto r = run({"train", "--corpus", "nowhere.json", "-K", "0"});
  EXPECT_EQ(r.code, 2);

  {
    std::ofstream m(dir / "manifest.csv");
    m << "doc_id,path,title,role,date\nr1,missing.txt,T,reading,1840\n";
  }
  r = run({"--output-dir", out, "ingest", "--manifest", (dir / "manifest.csv").string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("line 2"), std::string::npos) << r.err;

  {
    std::ofstream m(dir / "manifest.csv");
    m << "doc_id,path,title,role,date\nr1,a.txt,T,reading,1840\n";
    std::ofstream a(dir / "a.txt");
    a << "the of and to it is\n";
  }
  r = run({"--output-dir", out, "ingest", "--manifest", (dir / "manifest.csv").string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("error:"), std::string::npos);

  r = run({"--output-dir", out, "train", "--corpus", (dir / "absent.json").string()});
  EXPECT_EQ(r.code, 2);

  r = run({"cluster", "--ensemble", "x", "--model", "y", "--metric", "cosine"});
  EXPECT_EQ(r.code, 2);

  r = run({"--format", "xml", "ingest", "--manifest", "m.csv"});
  EXPECT_EQ(r.code, 2);
}

TEST(CliErrors, HelpAndVersion) {
  auto r = run({"--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("timeline"), std::string::npos);
  r = run({"--version"});
  EXPECT_EQ(r.code, 0);
}
