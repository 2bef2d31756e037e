#include <iostream>

#include <CLI11.hpp>

#include "mcsum/cli.hpp"

int main(int argc, char** argv) {
  using namespace mcsum::cli;

  CLI::App app{"Long-document summarization via clustered chunks ordered by a Markov transition path"};
  app.require_subcommand(1);

  SummarizeArgs sum;
  std::string provider;
  auto* summarize = app.add_subcommand("summarize", "Summarize a UTF-8 text document");
  summarize->add_option("input", sum.input, "Document to summarize")->required();
  summarize->add_option("--config", sum.config, "Config file (key = value)");
  summarize->add_option("--mode", sum.mode, "markov-cluster | cluster-sum | llm-full");
  summarize->add_option("--k", sum.k, "Number of clusters (default: chosen from the chunk count)");
  summarize->add_option("--seed", sum.seed, "Clustering seed");
  summarize->add_option("--out-dir", sum.out_dir, "Output directory");
  summarize->add_option("--provider", sum.provider, "remote | mock (overrides both providers)")
      ->check(CLI::IsMember({"remote", "mock"}));
  summarize->add_option("--reference", sum.reference, "Reference summary; adds ROUGE and coherence to the artifact");
  summarize->add_flag("--timings-in-artifact", sum.timings_in_artifact,
                      "Also store stage timings inside artifact.json (breaks byte-identical reruns)");

  EvaluateArgs ev;
  auto* evaluate = app.add_subcommand("evaluate", "Score candidate summaries against references");
  evaluate->add_option("manifest", ev.manifest, "Manifest file or directory of *.candidate.txt/*.reference.txt")
      ->required();
  evaluate->add_option("--config", ev.config, "Config file (embedding provider for coherence)");
  evaluate->add_option("--out-dir", ev.out_dir, "Output directory");
  evaluate->add_option("--mode", ev.mode, "Approach label for pairs that do not name one");

  std::string artifact;
  std::string what = "path";
  auto* inspect = app.add_subcommand("inspect", "Print parts of a run artifact");
  inspect->add_option("artifact", artifact, "artifact.json")->required();
  inspect->add_option("what", what, "matrix | path | clusters")->check(CLI::IsMember({"matrix", "path", "clusters"}));

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("bench", "Time the exact path solver, CSV on stdout");
  bench_cmd->add_option("--max-k", bench.max_k, "Largest k (<= 22)");
  bench_cmd->add_option("--min-k", bench.min_k, "Smallest k");
  bench_cmd->add_option("--trials", bench.trials, "Random matrices per k");
  bench_cmd->add_option("--seed", bench.seed, "Matrix seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  if (*summarize) return cmd_summarize(sum, std::cout, std::cerr);
  if (*evaluate) return cmd_evaluate(ev, std::cout, std::cerr);
  if (*inspect) return cmd_inspect(artifact, what, std::cout, std::cerr);
  if (*bench_cmd) return cmd_bench(bench, std::cout, std::cerr);
  return kExitUsage;
}
