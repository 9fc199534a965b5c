#include <iostream>

#include <CLI11.hpp>

#include "patvar/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"patvar: pattern-guided counterfactual augmentation for active learning"};
  app.require_subcommand(1);

  patvar::CommandOptions opts;
  std::uint64_t seed = 0;
  std::string cache_dir, out;

  const std::pair<const char*, const char*> commands[] = {
      {"synth", "synthesize per-label patterns"},
      {"gen", "generate counterfactual candidates"},
      {"filter", "filter candidates and report PKR/SLFR/LFR"},
      {"simulate", "run the active-learning simulation"},
      {"ablate", "run the five filter ablation arms"},
      {"report", "render Markdown tables"},
  };
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", opts.config, "experiment config (JSON)")->required();
    sub->add_option("--seed", seed, "first seed; later seeds count up from it");
    sub->add_option("--cache-dir", cache_dir, "LLM response cache directory");
    sub->add_option("--out", out, "output directory");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  auto* sub = app.get_subcommands().front();
  if (sub->count("--seed")) opts.seed = seed;
  if (sub->count("--cache-dir")) opts.cache_dir = cache_dir;
  if (sub->count("--out")) opts.out = out;
  return patvar::run_command(sub->get_name(), opts, std::cerr);
}
