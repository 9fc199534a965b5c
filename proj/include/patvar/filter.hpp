#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "patvar/counterfactual.hpp"

namespace patvar {

struct FilterConfig {
  bool enable_heuristic = false;
  bool enable_symbolic = false;
  bool enable_discriminator = false;

  static FilterConfig none() { return {}; }
  static FilterConfig all() { return {true, true, true}; }

  /// "none", "heuristic", "heuristic+symbolic", ... in stage order.
  std::string name() const;

  /// True when every stage enabled here is also enabled in `other`.
  bool subset_of(const FilterConfig& other) const;

  bool operator==(const FilterConfig&) const = default;
};

/// The five ablation arms, weakest first.
std::vector<FilterConfig> ablation_arms();

struct DiscriminatorVerdict {
  std::string l_hat;     // label the discriminator chose
  std::string L_target;  // label the generator aimed for
  std::string l_orig;    // label of the source example

  bool operator==(const DiscriminatorVerdict&) const = default;
};

/// Counts behind PKR, SLFR and LFR. PKR is over n_pattern candidates, the
/// two flip rates over n_label. A rate is nullopt when its N is zero.
struct QualityReport {
  std::size_t n_total = 0;
  std::size_t n_pattern = 0;
  std::size_t pattern_kept = 0;
  std::size_t n_label = 0;
  std::size_t soft_flips = 0;
  std::size_t hard_flips = 0;
  std::optional<double> pkr;
  std::optional<double> slfr;
  std::optional<double> lfr;
};

struct MetricFlags {
  std::optional<bool> pattern_kept;
  std::optional<DiscriminatorVerdict> verdict;
};

QualityReport compute_metrics(const std::vector<MetricFlags>& flags);

nlohmann::ordered_json to_json(const QualityReport& report);
QualityReport quality_report_from_json(const nlohmann::json& j);

/// Rule checks on the raw generation: refusal, prompt echo, incomplete
/// output, trivial output.
StageVerdict heuristic_filter(const CounterfactualCandidate& c);

/// Re-annotates the generated text and requires the source pattern to match.
/// Not applicable to candidates without a pattern.
StageVerdict symbolic_filter(const CounterfactualCandidate& c, const SynonymLexicon& lexicon,
                             const AnnotationProvider& provider);

llm::CompletionRequest build_discriminator_request(const std::string& text,
                                                   const std::vector<std::string>& label_set);

/// Maps a discriminator answer onto label_set (case-insensitive, surrounding
/// quotes and a final period ignored). Throws ResponseFormatError.
std::string parse_discriminator_label(const std::string& response,
                                      const std::vector<std::string>& label_set);

/// Passes iff the discriminator picks the target label.
std::pair<StageVerdict, DiscriminatorVerdict> discriminator_filter(
    const CounterfactualCandidate& c, const std::vector<std::string>& label_set,
    llm::Gateway& gateway);

struct FilterDeps {
  const SynonymLexicon& lexicon;
  const AnnotationProvider& provider;
  llm::Gateway* gateway = nullptr;  // required when the discriminator is enabled
  std::vector<std::string> label_set;
};

struct PipelineResult {
  std::vector<CounterfactualCandidate> survivors;
  std::vector<CounterfactualCandidate> audited;  // every input with its verdicts
  QualityReport report;
};

/// Runs the enabled stages in order heuristic, symbolic, discriminator. A
/// candidate reaches a stage only if it passed every earlier enabled stage.
/// Disabled stages are recorded as skipped. Errors raised while judging one
/// candidate fail that candidate; gateway errors abort the run.
PipelineResult run_pipeline(std::vector<CounterfactualCandidate> candidates,
                            const FilterConfig& cfg, const FilterDeps& deps);

/// Metric flags recovered from already-judged candidates.
MetricFlags metric_flags(const CounterfactualCandidate& c);

void write_jsonl(const std::filesystem::path& path,
                 const std::vector<CounterfactualCandidate>& candidates);
std::vector<CounterfactualCandidate> read_candidates(const std::filesystem::path& path);

}  // namespace patvar
