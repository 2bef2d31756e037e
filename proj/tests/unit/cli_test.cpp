#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>

#include <gtest/gtest.h>

#include "mcsum/artifact.hpp"
#include "mcsum/cli.hpp"

namespace fs = std::filesystem;
using namespace mcsum;

namespace {

const fs::path kData = MCSUM_TEST_DATA_DIR;
const fs::path kSamples = kData.parent_path() / "samples";

struct Result {
  int code = -1;
  std::string out;
  std::string err;
};

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / "mcsum_cli_test" / info->name();
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }

  Result run(const std::string& args) const {
    const auto out = dir_ / "stdout.txt";
    const auto err = dir_ / "stderr.txt";
    const std::string cmd = std::string("'") + MCSUM_CLI_PATH + "' " + args + " > '" + out.string() + "' 2> '" +
                            err.string() + "'";
    const int status = std::system(cmd.c_str());
    Result r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = read_file(out);
    r.err = read_file(err);
    return r;
  }

  std::string q(const fs::path& p) const { return "'" + p.string() + "'"; }

  fs::path dir_;
};

std::string write_fixture_artifact(const fs::path& path) {
  RunArtifact art;
  art.mode = Mode::kMarkovCluster;
  art.config = config_snapshot(RunConfig{});
  art.transition_matrix = TransitionMatrix::from_rows({{0.1, 0.2, 0.7}, {0.3, 0.3, 0.4}, {0.2, 0.8, 0.0}});
  art.path = solve_dp(*art.transition_matrix);
  const auto text = serialize(art);
  write_file_atomic(path, text);
  return text;
}

}  // namespace

TEST_F(Cli, SummarizeWithMocksIsDeterministic) {
  const auto doc = kSamples / "harbor_report.txt";
  const auto conf = kSamples / "demo.conf";
  const auto a = run("summarize " + q(doc) + " --config " + q(conf) + " --out-dir " + q(dir_ / "a"));
  ASSERT_EQ(a.code, 0) << a.err;
  const auto b = run("summarize " + q(doc) + " --config " + q(conf) + " --out-dir " + q(dir_ / "b"));
  ASSERT_EQ(b.code, 0) << b.err;
  for (const char* f : {"artifact.json", "summary.txt", "timings.json", "embeddings.cache"}) {
    EXPECT_TRUE(fs::exists(dir_ / "a" / f)) << f;
  }
  EXPECT_EQ(read_file(dir_ / "a" / "artifact.json"), read_file(dir_ / "b" / "artifact.json"));
  const auto art = load_artifact(dir_ / "a" / "artifact.json");
  EXPECT_EQ(read_file(dir_ / "a" / "summary.txt"), art.final_summary + "\n");
  for (const char* stage : {"[chunk", "[embed", "[cluster", "[markov", "[path", "[summarize", "[aggregate"}) {
    EXPECT_NE(a.out.find(stage), std::string::npos) << stage;
  }
  EXPECT_FALSE(ordered_json::parse(read_file(dir_ / "a" / "artifact.json")).contains("timings"));
  EXPECT_TRUE(ordered_json::parse(read_file(dir_ / "a" / "timings.json")).contains("embed"));
}

TEST_F(Cli, FlagsOverrideConfig) {
  const auto r = run("summarize " + q(kSamples / "harbor_report.txt") + " --config " + q(kSamples / "demo.conf") +
                     " --mode cluster-sum --k 3 --seed 9 --provider mock --timings-in-artifact --out-dir " +
                     q(dir_));
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = ordered_json::parse(read_file(dir_ / "artifact.json"));
  EXPECT_EQ(j["mode"], "cluster-sum");
  EXPECT_FALSE(j.contains("path"));
  EXPECT_EQ(j["config"]["k"], 3);
  EXPECT_EQ(j["config"]["seed"], 9);
  EXPECT_EQ(j["clustering"]["k"], 3);
  EXPECT_TRUE(j.contains("timings"));
}

TEST_F(Cli, SummarizeWithReferenceRecordsScores) {
  const auto ref = dir_ / "ref.txt";
  write_file_atomic(ref, "The report concludes that renewal of the harbor district is feasible.");
  const auto r = run("summarize " + q(kSamples / "harbor_report.txt") + " --config " + q(kSamples / "demo.conf") +
                     " --reference " + q(ref) + " --out-dir " + q(dir_));
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = ordered_json::parse(read_file(dir_ / "artifact.json"));
  ASSERT_TRUE(j.contains("eval"));
  EXPECT_GT(j["eval"]["rouge1"]["f1"].get<double>(), 0.0);
  EXPECT_TRUE(j["eval"]["coherence"].contains("first_order"));
}

TEST_F(Cli, MissingInputExitsTwoNamingThePath) {
  const auto missing = dir_ / "no_such_document.txt";
  const auto r = run("summarize " + q(missing) + " --provider mock --out-dir " + q(dir_));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find(missing.string()), std::string::npos) << r.err;
  EXPECT_FALSE(fs::exists(dir_ / "artifact.json"));
}

TEST_F(Cli, UsageAndConfigErrorsExitTwo) {
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("frobnicate").code, 2);
  EXPECT_EQ(run("summarize").code, 2);
  EXPECT_EQ(run("summarize x --provider cloud").code, 2);
  const auto conf = dir_ / "bad.conf";
  write_file_atomic(conf, "chunk_size = 10\nwat = 1\n");
  const auto r = run("summarize " + q(kSamples / "harbor_report.txt") + " --config " + q(conf));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("config line 2"), std::string::npos) << r.err;
  EXPECT_EQ(run("--help").code, 0);
}

TEST_F(Cli, ProviderFailureExitsOneWithStage) {
  const auto conf = dir_ / "remote.conf";
  write_file_atomic(conf,
                    "embedding.kind = remote\nembedding.endpoint = http://127.0.0.1:9/v1/embeddings\n"
                    "embedding.max_retries = 0\nembedding.timeout = 0.5\nllm.kind = mock-extractive\n");
  const auto r = run("summarize " + q(kSamples / "harbor_report.txt") + " --config " + q(conf) + " --out-dir " + q(dir_));
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("[embed]"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("transport"), std::string::npos) << r.err;
}

TEST_F(Cli, EvaluateIdenticalPair) {
  write_file_atomic(dir_ / "c.txt", "The tide turned. Boats came home.");
  write_file_atomic(dir_ / "manifest.txt", "c.txt c.txt markov-cluster\n");
  const auto r = run("evaluate " + q(dir_ / "manifest.txt") + " --out-dir " + q(dir_ / "out"));
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = ordered_json::parse(read_file(dir_ / "out" / "eval_report.json"));
  EXPECT_EQ(j["aggregates"]["markov-cluster"]["rouge1_f1"]["mean"], 1.0);
  EXPECT_NE(r.out.find("100.00"), std::string::npos) << r.out;
  EXPECT_EQ(read_file(dir_ / "out" / "eval_report.txt"), r.out);
}

TEST_F(Cli, EvaluateEmptyOrMissingManifestExitsTwo) {
  write_file_atomic(dir_ / "empty.txt", "# nothing here\n");
  EXPECT_EQ(run("evaluate " + q(dir_ / "empty.txt") + " --out-dir " + q(dir_)).code, 2);
  EXPECT_EQ(run("evaluate " + q(dir_ / "absent.txt") + " --out-dir " + q(dir_)).code, 2);
  fs::create_directories(dir_ / "empty_dir");
  EXPECT_EQ(run("evaluate " + q(dir_ / "empty_dir") + " --out-dir " + q(dir_)).code, 2);
}

TEST_F(Cli, EvaluateGoldenManifest) {
  const auto corpus = kData / "golden" / "eval_corpus";
  const auto r = run("evaluate " + q(corpus / "manifest.txt") + " --out-dir " + q(dir_));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(read_file(dir_ / "eval_report.json"), read_file(corpus / "eval_report.json"));
  EXPECT_EQ(read_file(dir_ / "eval_report.txt"), read_file(corpus / "eval_report.txt"));
}

TEST_F(Cli, InspectPathOnFixture) {
  write_fixture_artifact(dir_ / "artifact.json");
  const auto r = run("inspect " + q(dir_ / "artifact.json") + " path");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "0 → 2 → 1, p = 0.56");
  EXPECT_NE(r.out.find("0 → 2  p = 0.7"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("2 → 1  p = 0.8"), std::string::npos) << r.out;
}

TEST_F(Cli, InspectMatrixOnHandCountedLabels) {
  RunArtifact art;
  art.mode = Mode::kMarkovCluster;
  art.config = config_snapshot(RunConfig{});
  art.transition_matrix = build_transition_matrix({0, 0, 1, 2, 1}, 3);
  write_file_atomic(dir_ / "artifact.json", serialize(art));
  const auto r = run("inspect " + q(dir_ / "artifact.json") + " matrix");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out,
            "transition matrix k=3 (row-stochastic: yes)\n"
            "             0        1        2\n"
            "   0    0.5000   0.5000   0.0000  | sum = 1\n"
            "   1    0.0000   0.0000   1.0000  | sum = 1\n"
            "   2    0.0000   1.0000   0.0000  | sum = 1\n");
}

TEST_F(Cli, InspectClustersEchoesArtifact) {
  const auto s = run("summarize " + q(kSamples / "harbor_report.txt") + " --config " + q(kSamples / "demo.conf") +
                     " --out-dir " + q(dir_));
  ASSERT_EQ(s.code, 0) << s.err;
  const auto art = load_artifact(dir_ / "artifact.json");
  const auto r = run("inspect " + q(dir_ / "artifact.json") + " clusters");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, cli::render_clusters(art));
  EXPECT_NE(r.out.find("k=4 clusters over"), std::string::npos) << r.out;
}

TEST_F(Cli, InspectErrorsExitTwo) {
  write_file_atomic(dir_ / "corrupt.json", "{\"format\": \"mcsum-run/1\", \"mode\": ");
  EXPECT_EQ(run("inspect " + q(dir_ / "corrupt.json") + " path").code, 2);
  EXPECT_EQ(run("inspect " + q(dir_ / "absent.json") + " path").code, 2);
  EXPECT_EQ(run("inspect " + q(dir_ / "corrupt.json") + " everything").code, 2);

  const auto s = run("summarize " + q(kSamples / "harbor_report.txt") + " --config " + q(kSamples / "demo.conf") +
                     " --mode cluster-sum --out-dir " + q(dir_));
  ASSERT_EQ(s.code, 0) << s.err;
  const auto r = run("inspect " + q(dir_ / "artifact.json") + " path");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("no path"), std::string::npos);
}

TEST_F(Cli, BenchSchema) {
  const auto r = run("bench --max-k 12 --trials 3");
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream in(r.out);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "k,median_ms");
  std::size_t expected_k = 2;
  while (std::getline(in, line)) {
    const auto comma = line.find(',');
    ASSERT_NE(comma, std::string::npos) << line;
    EXPECT_EQ(std::stoul(line.substr(0, comma)), expected_k);
    EXPECT_GE(std::stod(line.substr(comma + 1)), 0.0);
    ++expected_k;
  }
  EXPECT_EQ(expected_k, 13u);
}

TEST_F(Cli, BenchRowForKTwentyAndCapEnforced) {
  const auto r = run("bench --min-k 20 --max-k 20 --trials 1");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.substr(0, r.out.find(',', 12)), "k,median_ms\n20");
  EXPECT_EQ(run("bench --max-k 23").code, 2);
  EXPECT_EQ(run("bench --min-k 5 --max-k 4").code, 2);
}
