#include <cstdlib>
#include <filesystem>

#include <gtest/gtest.h>

#include "mcsum/artifact.hpp"
#include "mcsum/summarize.hpp"

namespace fs = std::filesystem;
using namespace mcsum;

namespace {

const fs::path kData = MCSUM_TEST_DATA_DIR;

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected an error";
  return ErrorKind::kContract;
}

RunConfig mock_config(Mode mode) {
  RunConfig cfg;
  cfg.chunker = {30, 3};
  cfg.embedding.kind = EmbeddingKind::kDeterministicTest;
  cfg.llm.kind = LlmKind::kMockExtractive;
  cfg.k = 3;
  cfg.mode = mode;
  return cfg;
}

}  // namespace

TEST(RunConfig, DefaultValues) {
  const RunConfig cfg;
  EXPECT_EQ(cfg.chunker.chunk_size, 500u);
  EXPECT_EQ(cfg.chunker.overlap, 20u);
  EXPECT_EQ(cfg.top_k, 5u);
  EXPECT_EQ(cfg.path_cap, 22u);
  EXPECT_FALSE(cfg.k.has_value());
  EXPECT_FALSE(cfg.collapse_runs);
  EXPECT_EQ(cfg.mode, Mode::kMarkovCluster);
  EXPECT_EQ(cfg.embedding.model_name, "nomic-embed-text-v1");
  EXPECT_EQ(cfg.llm.model_name, "gpt-4o-mini");
  EXPECT_EQ(cfg.llm.temperature, 0.0);
  EXPECT_EQ(parse_config("").chunker.chunk_size, 500u);
}

TEST(ParseConfig, ReadsKeysCommentsAndWhitespace) {
  const auto cfg = parse_config(
      "# demo\n"
      "  chunk_size = 120 \n"
      "overlap=12\n"
      "\n"
      "k = 4\n"
      "top_k = 2\n"
      "collapse_runs = true\n"
      "mode = cluster-sum\n"
      "seed = 18446744073709551615\n"
      "embedding.kind = deterministic-test\n"
      "llm.kind = mock-extractive\n"
      "llm.temperature = 0.25\n"
      "kmeans.tol = 1e-8\n"
      "out_dir = /tmp/x y\n");
  EXPECT_EQ(cfg.chunker.chunk_size, 120u);
  EXPECT_EQ(cfg.chunker.overlap, 12u);
  EXPECT_EQ(cfg.k, 4u);
  EXPECT_EQ(cfg.top_k, 2u);
  EXPECT_TRUE(cfg.collapse_runs);
  EXPECT_EQ(cfg.mode, Mode::kClusterSum);
  EXPECT_EQ(cfg.seed, 18446744073709551615ull);
  EXPECT_EQ(cfg.llm.temperature, 0.25);
  EXPECT_EQ(cfg.kmeans.tol, 1e-8);
  EXPECT_EQ(cfg.out_dir, "/tmp/x y");
  EXPECT_FALSE(parse_config("k = auto").k.has_value());
}

TEST(ParseConfig, InterpolatesEnvironment) {
  ::setenv("MCSUM_TEST_HOST", "embed.internal:8080", 1);
  const auto cfg = parse_config(
      "embedding.kind = remote\nembedding.endpoint = http://${MCSUM_TEST_HOST}/v1/embeddings\n");
  EXPECT_EQ(cfg.embedding.endpoint, "http://embed.internal:8080/v1/embeddings");
  ::unsetenv("MCSUM_TEST_HOST");
  EXPECT_EQ(kind_of([] { parse_config("embedding.endpoint = ${MCSUM_TEST_HOST}"); }), ErrorKind::kParse);
  EXPECT_EQ(kind_of([] { parse_config("embedding.endpoint = ${OPEN"); }), ErrorKind::kParse);
}

TEST(ParseConfig, ErrorsNameTheLine) {
  try {
    parse_config("chunk_size = 10\n\nbogus_key = 1\n");
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kParse);
    EXPECT_NE(std::string(e.what()).find("config line 3"), std::string::npos) << e.what();
  }
  for (const char* bad : {"chunk_size = -5", "chunk_size = 12abc", "top_k =", "collapse_runs = maybe",
                          "mode = fastest", "llm.temperature = warm", "just words"}) {
    EXPECT_EQ(kind_of([&] { parse_config(bad); }), ErrorKind::kParse) << bad;
  }
}

TEST(RunConfig, ValidateRejectsBrokenInvariants) {
  auto cfg = parse_config("chunk_size = 20\noverlap = 20\n");
  EXPECT_EQ(kind_of([&] { cfg.validate(); }), ErrorKind::kContract);
  cfg = parse_config("top_k = 0");
  EXPECT_EQ(kind_of([&] { cfg.validate(); }), ErrorKind::kContract);
  cfg = parse_config("llm.kind = remote-chat\nllm.endpoint =\n");
  EXPECT_EQ(kind_of([&] { cfg.validate(); }), ErrorKind::kContract);
  cfg = parse_config("llm.temperature = -0.5");
  EXPECT_EQ(kind_of([&] { cfg.validate(); }), ErrorKind::kContract);
}

TEST(RunConfig, RenderAndSnapshotRoundTrip) {
  auto cfg = parse_config("chunk_size = 64\noverlap = 8\nk = 7\nllm.backoff = 0.125\nkmeans.tol = 1e-06\n");
  const auto snap = config_snapshot(cfg);
  EXPECT_EQ(config_snapshot(config_from_snapshot(snap)), snap);
  const auto reparsed = parse_config(render_config(cfg));
  EXPECT_EQ(config_snapshot(reparsed), snap);
  EXPECT_EQ(reparsed.out_dir, cfg.out_dir);
  EXPECT_EQ(config_snapshot(config_from_snapshot(config_snapshot(RunConfig{}))), config_snapshot(RunConfig{}));
}

TEST(RunConfig, SampleConfigsParse) {
  const auto demo = load_config(kData.parent_path() / "samples" / "demo.conf");
  EXPECT_NO_THROW(demo.validate());
  ::setenv("EMBEDDING_ENDPOINT", "http://localhost:8000/v1/embeddings", 1);
  const auto remote = load_config(kData.parent_path() / "samples" / "remote.conf");
  EXPECT_EQ(remote.llm.kind, LlmKind::kRemoteChat);
  EXPECT_NO_THROW(remote.validate());
  ::unsetenv("EMBEDDING_ENDPOINT");
}

TEST(Artifact, PipelineArtifactsRoundTripByteIdentical) {
  const auto doc = read_file(kData / "golden" / "three_topics.txt");
  for (auto mode : {Mode::kMarkovCluster, Mode::kClusterSum, Mode::kLlmFull}) {
    DeterministicEmbedder embedder;
    MockExtractiveProvider llm;
    auto art = run_pipeline(doc, mock_config(mode), embedder, llm);
    art.timings = ordered_json{{"chunk", 0.5}};
    const auto text = serialize(art);
    EXPECT_EQ(serialize(parse_artifact(text)), text) << to_string(mode);
  }
}

TEST(Artifact, GoldenFileRoundTrips) {
  const auto text = read_file(kData / "golden" / "three_topics.artifact.json");
  const auto art = parse_artifact(text);
  EXPECT_EQ(serialize(art), text);
  EXPECT_EQ(art.cluster_summaries.size(), art.clustering->k);
}

TEST(Artifact, ModeFieldsFollowTheMode) {
  const auto doc = read_file(kData / "golden" / "three_topics.txt");
  DeterministicEmbedder embedder;
  MockExtractiveProvider llm;
  const auto j = to_json(run_pipeline(doc, mock_config(Mode::kClusterSum), embedder, llm));
  EXPECT_FALSE(j.contains("path"));
  EXPECT_FALSE(j.contains("transition_matrix"));
  EXPECT_TRUE(j.contains("clustering"));
  const auto m = to_json(run_pipeline(doc, mock_config(Mode::kMarkovCluster), embedder, llm));
  EXPECT_TRUE(m.contains("path"));
  EXPECT_EQ(m["config"]["seed"], 42);
}

TEST(Artifact, NegativeInfinityLogProbIsNull) {
  RunArtifact art;
  art.mode = Mode::kMarkovCluster;
  art.config = config_snapshot(RunConfig{});
  art.transition_matrix = build_transition_matrix({0, 1}, 3);
  art.path = HamiltonianPath{{0, 1, 2}, kNegInf, PathMethod::kDp};
  const auto text = serialize(art);
  EXPECT_TRUE(to_json(art)["path"]["log_prob"].is_null());
  const auto back = parse_artifact(text);
  EXPECT_EQ(back.path->log_prob, kNegInf);
  EXPECT_EQ(back.path->probability(), 0.0);
  EXPECT_EQ(*back.transition_matrix, *art.transition_matrix);
  EXPECT_EQ(serialize(back), text);
}

TEST(Artifact, CorruptInputIsParseError) {
  const auto good = read_file(kData / "golden" / "three_topics.artifact.json");
  auto wrong_format = good;
  wrong_format.replace(wrong_format.find("mcsum-run/1"), 11, "mcsum-run/9");
  auto missing_field = ordered_json::parse(good);
  missing_field.erase("chunks");
  auto bad_type = ordered_json::parse(good);
  bad_type["path"]["order"] = "0,1,2";
  for (const std::string& text : {std::string("{"), std::string("[]"), good.substr(0, good.size() / 2), wrong_format,
                                  missing_field.dump(), bad_type.dump()}) {
    EXPECT_EQ(kind_of([&] { parse_artifact(text); }), ErrorKind::kParse) << text.substr(0, 40);
  }
}

TEST(Io, AtomicWriteReplacesWithoutLeavingTemp) {
  const auto dir = fs::temp_directory_path() / "mcsum_io_test";
  fs::remove_all(dir);
  const auto path = dir / "nested" / "file.json";
  write_file_atomic(path, "first");
  write_file_atomic(path, "second");
  EXPECT_EQ(read_file(path), "second");
  EXPECT_FALSE(fs::exists(path.string() + ".tmp"));
  EXPECT_EQ(kind_of([&] { read_file(dir / "absent"); }), ErrorKind::kIo);
}
