#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "patvar/active_learning.hpp"
#include "patvar/config.hpp"
#include "patvar/filter.hpp"
#include "patvar/llm.hpp"

namespace patvar {

struct CommandOptions {
  std::filesystem::path config;
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> cache_dir;
  std::optional<std::filesystem::path> out;
};

/// Patterns chosen for one label, with scores.
struct LabelPatterns {
  std::string label;
  std::vector<ScoredPattern> patterns;
};

/// One experiment: config, backend, annotation resources and the dataset,
/// loaded on first use. Each command writes its files into output_dir and
/// records them in manifest.json.
class Experiment {
 public:
  /// `backend` replaces the configured backend when given (tests inject a
  /// MockBackend to count calls).
  explicit Experiment(ExperimentConfig cfg, llm::Backend* backend = nullptr);
  ~Experiment();

  void synth();
  void gen();
  void filter();
  void simulate();
  void ablate();
  void report();

  const ExperimentConfig& config() const { return cfg_; }
  const std::filesystem::path& output_dir() const { return cfg_.output_dir; }
  llm::Backend& backend() { return *backend_; }
  llm::Gateway& gateway() { return *gateway_; }
  const Dataset& dataset();
  const SynonymLexicon& lexicon() const { return lexicon_; }
  const AnnotationProvider& provider() const { return *provider_; }

  std::vector<LabelPatterns> synthesize_all();
  std::vector<CounterfactualCandidate> generate_all(const std::vector<LabelPatterns>& patterns);

  /// Survivor index for one generation mode from filtered candidates.
  static SurvivorIndex survivor_index(const std::vector<CounterfactualCandidate>& survivors,
                                      GenerationMode mode);

 private:
  std::vector<LabelPatterns> load_or_synthesize();
  std::vector<CounterfactualCandidate> load_or_generate();
  SimulationDeps simulation_deps(const PipelineResult& filtered) const;
  void begin(const std::string& command);
  void finish(const std::string& command, const std::vector<std::string>& files);

  ExperimentConfig cfg_;
  std::unique_ptr<llm::Backend> owned_backend_;
  llm::Backend* backend_ = nullptr;
  std::unique_ptr<llm::Gateway> gateway_;
  SynonymLexicon lexicon_;
  std::unique_ptr<AnnotationProvider> fixture_provider_;
  std::unique_ptr<AnnotationProvider> provider_;
  std::optional<Dataset> dataset_;
};

/// Loads the config, applies the overrides, runs one subcommand and maps
/// failures to exit codes: 2 config, 3 backend, 4 data, 1 anything else.
int run_command(const std::string& command, const CommandOptions& options, std::ostream& err);

/// Applies --seed/--cache-dir/--out to a loaded config. --seed N replaces
/// the seed list with N, N+1, ... keeping its length.
void apply_overrides(ExperimentConfig& cfg, const CommandOptions& options);

}  // namespace patvar
