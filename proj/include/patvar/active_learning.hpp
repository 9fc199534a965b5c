#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "patvar/classifier.hpp"
#include "patvar/selection.hpp"
#include "patvar/synthesis.hpp"

namespace patvar {

struct Dataset {
  std::string name;
  std::vector<LabeledExample> pool;
  std::vector<std::string> label_set;
  std::vector<LabeledExample> holdout;
};

/// Throws UnknownLabel for labels outside label_set and DataError when an id
/// appears in both pool and holdout.
void validate(const Dataset& dataset);

/// Strictly increasing shot counts, the first at least 1 and the last at
/// most pool_size. Throws ConfigError("schedule", ...).
void validate_schedule(const std::vector<std::size_t>& shots, std::size_t pool_size);

inline const std::vector<std::string> kConditions = {"random", "cluster", "uncertainty",
                                                     "cf_no_vt", "counterfactual"};

struct Augmentation {
  std::string text;
  std::string target_label;

  bool operator==(const Augmentation&) const = default;
};

/// Example id -> filtered counterfactuals for that example.
using SurvivorIndex = std::map<std::string, std::vector<Augmentation>>;

/// Originals first, then each original's counterfactuals in selection order.
std::vector<TrainingItem> augment_with_counterfactuals(const std::vector<LabeledExample>& selected,
                                                       const SurvivorIndex& survivors);

struct SimulationDeps {
  ClassifierFactory classifier_factory;
  const Embedder* embedder = nullptr;  // cluster condition only
  std::optional<std::size_t> cluster_k;
  SurvivorIndex counterfactual;  // used by "counterfactual"
  SurvivorIndex no_vt;           // used by "cf_no_vt"
  std::string reference = "counterfactual";
};

struct RunResult {
  std::string condition;
  std::string dataset;
  std::vector<std::size_t> shots;
  std::vector<std::uint64_t> seeds;
  std::vector<std::vector<std::optional<double>>> grid;  // [shot][seed]
  std::vector<std::optional<double>> mean;
  std::vector<std::optional<double>> sd;
  std::vector<std::optional<double>> p_value;  // vs the reference condition
};

/// Mean and sample SD per shot over the seeds that produced a value.
void summarize(RunResult& result);

/// Paired t-test p-value per shot of every result against `reference`,
/// over seeds present in both. The reference row gets none.
void attach_p_values(std::vector<RunResult>& results, const std::string& reference);

/// Simulated annotation loop. For each condition and seed the schedule is
/// walked with nested selections; at each shot a fresh classifier is
/// trained and scored by macro-F1 on the holdout. Counterfactual conditions
/// use the random selection and add their survivors. A failing cell is
/// recorded as missing.
std::vector<RunResult> run_simulation(const Dataset& dataset,
                                      const std::vector<std::string>& conditions,
                                      const std::vector<std::size_t>& shots,
                                      const std::vector<std::uint64_t>& seeds,
                                      const SimulationDeps& deps);

/// condition,dataset,shot,seed,macro_f1
void write_results_csv(const std::filesystem::path& path, const std::vector<RunResult>& results);

/// condition,dataset,shot,mean,sd,p_vs_<reference>,stars
void write_summary_csv(const std::filesystem::path& path, const std::vector<RunResult>& results,
                       const std::string& reference = "counterfactual");

/// Reads a results CSV (own output or external numbers) back into
/// summarized RunResults, one per (condition, dataset) in first-seen order.
std::vector<RunResult> read_results_csv(const std::filesystem::path& path);

std::string format_fixed(double value, int decimals);

}  // namespace patvar
