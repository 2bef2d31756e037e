#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <iterator>

#include <gtest/gtest.h>

#include "mcsum/eval.hpp"
#include "mcsum/rng.hpp"

namespace fs = std::filesystem;
using namespace mcsum;

namespace {

const fs::path kData = MCSUM_TEST_DATA_DIR;

// Independent ROUGE-N: sorted n-gram lists intersected with std::set_intersection,
// which keeps min(multiplicity) of every shared element.
struct OracleRouge {
  double p = 0.0;
  double r = 0.0;
};

std::vector<std::string> oracle_words(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      cur += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    } else if (!cur.empty()) {
      out.push_back(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

OracleRouge oracle_rouge(const std::string& cand, const std::string& ref, std::size_t n) {
  auto grams = [n](const std::vector<std::string>& w) {
    std::vector<std::string> g;
    for (std::size_t i = 0; i + n <= w.size(); ++i) {
      std::string s;
      for (std::size_t j = 0; j < n; ++j) s += w[i + j] + "\x1f";
      g.push_back(s);
    }
    std::sort(g.begin(), g.end());
    return g;
  };
  const auto c = grams(oracle_words(cand));
  const auto r = grams(oracle_words(ref));
  std::vector<std::string> shared;
  std::set_intersection(c.begin(), c.end(), r.begin(), r.end(), std::back_inserter(shared));
  OracleRouge o;
  o.p = c.empty() ? 0.0 : static_cast<double>(shared.size()) / static_cast<double>(c.size());
  o.r = r.empty() ? 0.0 : static_cast<double>(shared.size()) / static_cast<double>(r.size());
  return o;
}

std::string random_text(Rng& rng, std::size_t max_words) {
  static const char* words[] = {"tide", "harbor", "Tide", "nets", "the", "a", "quay", "gulls", "boat"};
  static const char* punct[] = {" ", " ", " ", ", ", ". ", "! "};
  std::string out;
  const auto n = rng.below(max_words + 1);
  for (std::size_t i = 0; i < n; ++i) {
    out += words[rng.below(std::size(words))];
    out += punct[rng.below(std::size(punct))];
  }
  return out;
}

}  // namespace

TEST(Rouge, IdentityIsPerfect) {
  const auto s = rouge_n("the harbor district grew", "the harbor district grew", 1);
  EXPECT_DOUBLE_EQ(s.precision, 1.0);
  EXPECT_DOUBLE_EQ(s.recall, 1.0);
  EXPECT_DOUBLE_EQ(s.f1, 1.0);
}

TEST(Rouge, DisjointIsZero) {
  const auto s = rouge_n("flour yeast dough", "telescope galaxy orbit", 1);
  EXPECT_TRUE(s.defined);
  EXPECT_EQ(s.precision, 0.0);
  EXPECT_EQ(s.recall, 0.0);
  EXPECT_EQ(s.f1, 0.0);
}

TEST(Rouge, BigramHandCount) {
  const auto s = rouge_n("a b c", "a b d", 2);
  EXPECT_DOUBLE_EQ(s.precision, 0.5);
  EXPECT_DOUBLE_EQ(s.recall, 0.5);
  EXPECT_DOUBLE_EQ(s.f1, 0.5);
}

TEST(Rouge, CountsAreClipped) {
  const auto s = rouge_n("the the the", "the cat", 1);
  EXPECT_DOUBLE_EQ(s.precision, 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(s.recall, 0.5);
  EXPECT_DOUBLE_EQ(s.f1, 0.4);
}

TEST(Rouge, LowercasesAndIgnoresPunctuation) {
  const auto s = rouge_n("The cat, sat!", "the cat sat", 2);
  EXPECT_DOUBLE_EQ(s.f1, 1.0);
  EXPECT_EQ(rouge_tokens("Día, 'quote' «x»"), (std::vector<std::string>{"día", "quote", "x"}));
}

TEST(Rouge, EmptyReferenceIsUndefined) {
  EXPECT_FALSE(rouge_n("some text", "", 1).defined);
  EXPECT_FALSE(rouge_n("some text", "...", 1).defined);
  EXPECT_FALSE(rouge_n("some text", "single", 2).defined);
  const auto s = rouge_n("", "reference words", 1);
  EXPECT_TRUE(s.defined);
  EXPECT_EQ(s.f1, 0.0);
}

TEST(Rouge, OrderMustBeOneOrTwo) {
  EXPECT_THROW(rouge_n("a", "a", 0), Error);
  EXPECT_THROW(rouge_n("a b c", "a b c", 3), Error);
}

TEST(Rouge, MatchesOracleAndIsBoundedAndSymmetric) {
  Rng rng(77);
  for (int i = 0; i < 1000; ++i) {
    const auto cand = random_text(rng, 14);
    const auto ref = random_text(rng, 14);
    for (std::size_t n : {1u, 2u}) {
      const auto s = rouge_n(cand, ref, n);
      const auto swapped = rouge_n(ref, cand, n);
      for (double v : {s.precision, s.recall, s.f1}) {
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0);
      }
      if (!s.defined) continue;
      const auto o = oracle_rouge(cand, ref, n);
      EXPECT_NEAR(s.precision, o.p, 1e-15) << cand << " | " << ref;
      EXPECT_NEAR(s.recall, o.r, 1e-15) << cand << " | " << ref;
      if (swapped.defined) {
        EXPECT_DOUBLE_EQ(s.precision, swapped.recall);
        EXPECT_DOUBLE_EQ(s.recall, swapped.precision);
        EXPECT_NEAR(s.f1, swapped.f1, 1e-15);
      }
    }
  }
}

TEST(Rouge, SelfScoreIsPerfectWheneverDefined) {
  Rng rng(78);
  for (int i = 0; i < 300; ++i) {
    const auto x = random_text(rng, 12);
    for (std::size_t n : {1u, 2u}) {
      const auto s = rouge_n(x, x, n);
      if (rouge_tokens(x).size() >= n) {
        EXPECT_DOUBLE_EQ(s.f1, 1.0) << x;
      } else {
        EXPECT_FALSE(s.defined);
      }
    }
  }
}

TEST(SplitSentences, Examples) {
  EXPECT_EQ(split_sentences("A b. C d."), (std::vector<std::string>{"A b.", "C d."}));
  EXPECT_TRUE(split_sentences("").empty());
  EXPECT_EQ(split_sentences("One sentence"), (std::vector<std::string>{"One sentence"}));
  EXPECT_EQ(split_sentences("Wait!  Really?\nYes. 3.14 is pi"),
            (std::vector<std::string>{"Wait!", "Really?", "Yes.", "3.14 is pi"}));
  EXPECT_EQ(split_sentences("Dr. Smith arrived."), (std::vector<std::string>{"Dr.", "Smith arrived."}));
}

TEST(Coherence, RepeatedSentenceScoresOne) {
  DeterministicEmbedder e;
  const auto c = coherence("The tide turned. The tide turned. The tide turned. The tide turned.", e);
  ASSERT_TRUE(c.first_order && c.second_order);
  EXPECT_NEAR(*c.first_order, 1.0, 1e-6);
  EXPECT_NEAR(*c.second_order, 1.0, 1e-6);
  EXPECT_EQ(c.sentence_count, 4u);
}

TEST(Coherence, TooFewSentencesAreUndefined) {
  DeterministicEmbedder e;
  const auto one = coherence("Only one sentence here.", e);
  EXPECT_FALSE(one.first_order.has_value());
  EXPECT_FALSE(one.second_order.has_value());
  EXPECT_EQ(one.sentence_count, 1u);
  EXPECT_FALSE(coherence("", e).first_order.has_value());
  const auto two = coherence("First one. Second one.", e);
  EXPECT_TRUE(two.first_order.has_value());
  EXPECT_FALSE(two.second_order.has_value());
}

TEST(Coherence, MatchesHandComputedCosines) {
  DeterministicEmbedder e;
  const std::string a = "Boats left the harbor.";
  const std::string b = "The harbor was calm.";
  const std::string c = "Bread rose in the oven.";
  const auto va = e.embed_one(a);
  const auto vb = e.embed_one(b);
  const auto vc = e.embed_one(c);
  auto cosine = [](const EmbeddingVector& x, const EmbeddingVector& y) {
    double d = 0, nx = 0, ny = 0;
    for (std::size_t i = 0; i < x.dim(); ++i) {
      d += x[i] * y[i];
      nx += x[i] * x[i];
      ny += y[i] * y[i];
    }
    return d / std::sqrt(nx * ny);
  };
  const auto score = coherence(a + " " + b + " " + c, e);
  EXPECT_NEAR(*score.first_order, (cosine(va, vb) + cosine(vb, vc)) / 2.0, 1e-12);
  EXPECT_NEAR(*score.second_order, cosine(va, vc), 1e-12);
  EXPECT_GE(*score.first_order, -1.0);
  EXPECT_LE(*score.first_order, 1.0);
}

TEST(EvaluateCorpus, IdenticalPairGivesPerfectRouge) {
  DeterministicEmbedder e;
  const auto r = evaluate_corpus({{"d", "m", "The tide turned. Boats came home.", "The tide turned. Boats came home.", {}}}, e);
  const auto& m = r.aggregates.at("m");
  EXPECT_DOUBLE_EQ(m.at("rouge1_f1").mean, 1.0);
  EXPECT_DOUBLE_EQ(m.at("rouge2_f1").mean, 1.0);
  EXPECT_EQ(r.failures, 0u);
}

TEST(EvaluateCorpus, MeansAreArithmeticMeansPerMode) {
  DeterministicEmbedder e;
  const std::vector<EvalPair> pairs = {
      {"x", "m", "a b c", "a b d", {{"bertscore_f1", 0.8}}},
      {"y", "m", "a b", "a b", {{"bertscore_f1", 0.6}}},
      {"z", "other", "q", "r", {}},
  };
  const auto r = evaluate_corpus(pairs, e);
  const auto& m = r.aggregates.at("m");
  EXPECT_DOUBLE_EQ(m.at("rouge2_f1").mean, (0.5 + 1.0) / 2.0);
  EXPECT_DOUBLE_EQ(m.at("rouge1_f1").mean, (2.0 / 3.0 + 1.0) / 2.0);
  EXPECT_DOUBLE_EQ(m.at("bertscore_f1").mean, 0.7);
  EXPECT_EQ(m.at("rouge1_f1").count, 2u);
  EXPECT_FALSE(m.contains("coherence_first"));
  EXPECT_DOUBLE_EQ(r.aggregates.at("other").at("rouge1_f1").mean, 0.0);
}

TEST(EvaluateCorpus, FailuresAreCountedAndExcluded) {
  DeterministicEmbedder e;
  const auto r = evaluate_corpus({{"ok", "m", "a b", "a b", {}}, {"bad", "m", "a b", "  ", {}}}, e);
  EXPECT_EQ(r.failures, 1u);
  EXPECT_TRUE(r.documents[1].error.has_value());
  EXPECT_DOUBLE_EQ(r.aggregates.at("m").at("rouge1_f1").mean, 1.0);
  EXPECT_EQ(r.aggregates.at("m").at("rouge1_f1").count, 1u);
  EXPECT_NE(report_table(r).find("1 document(s) failed"), std::string::npos);
  EXPECT_THROW(evaluate_corpus({}, e), Error);
}

TEST(EvaluateCorpus, TableLayout) {
  DeterministicEmbedder e;
  const auto r = evaluate_corpus({{"x", "markov-cluster", "a b c", "a b d", {}}}, e);
  const auto table = report_table(r);
  EXPECT_EQ(table,
            "Approach          R-1     R-2  1st-O  2nd-O  BF1  BLRT\n"
            "------------------------------------------------------\n"
            "markov-cluster  66.67  50.000      -      -    -     -\n");
}

TEST(EvalPairs, ManifestAndDirectoryForms) {
  const auto dir = kData / "golden" / "eval_corpus";
  const auto from_manifest = load_eval_pairs(dir / "manifest.txt", "candidate");
  ASSERT_EQ(from_manifest.size(), 3u);
  EXPECT_EQ(from_manifest[0].id, "harbor");
  EXPECT_EQ(from_manifest[0].mode, "markov-cluster");
  EXPECT_DOUBLE_EQ(from_manifest[0].external.at("bertscore_f1"), 0.861);
  EXPECT_EQ(from_manifest[2].mode, "cluster-sum");

  const auto from_dir = load_eval_pairs(dir, "candidate");
  ASSERT_EQ(from_dir.size(), 3u);
  EXPECT_EQ(from_dir[0].id, "bakery");
  EXPECT_EQ(from_dir[0].mode, "candidate");
  EXPECT_EQ(from_dir[0].reference, from_manifest[1].reference);
}

TEST(EvalPairs, BadManifestLines) {
  const auto dir = fs::temp_directory_path() / "mcsum_eval_test";
  fs::create_directories(dir);
  write_file_atomic(dir / "c.txt", "x");
  write_file_atomic(dir / "one_field.txt", "c.txt\n");
  write_file_atomic(dir / "bad_score.txt", "c.txt c.txt bleurt=high\n");
  write_file_atomic(dir / "missing.txt", "c.txt nope.txt\n");
  EXPECT_THROW(load_eval_pairs(dir / "one_field.txt", "m"), Error);
  EXPECT_THROW(load_eval_pairs(dir / "bad_score.txt", "m"), Error);
  EXPECT_THROW(load_eval_pairs(dir / "missing.txt", "m"), Error);
}

TEST(EvaluateCorpus, GoldenReport) {
  const auto dir = kData / "golden" / "eval_corpus";
  DeterministicEmbedder e;
  const auto report = evaluate_corpus(load_eval_pairs(dir / "manifest.txt", "candidate"), e);
  const auto json = report_json(report).dump(2) + "\n";
  const auto table = report_table(report);
  if (std::getenv("MCSUM_UPDATE_GOLDEN")) {
    write_file_atomic(dir / "eval_report.json", json);
    write_file_atomic(dir / "eval_report.txt", table);
  }
  EXPECT_EQ(json, read_file(dir / "eval_report.json"));
  EXPECT_EQ(table, read_file(dir / "eval_report.txt"));
}
