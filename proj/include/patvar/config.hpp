#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "patvar/counterfactual.hpp"
#include "patvar/dataset.hpp"
#include "patvar/filter.hpp"
#include "patvar/synthesis.hpp"

namespace patvar {

struct BackendConfig {
  std::string kind = "mock";  // mock | http
  std::string model = "gpt-4o";
  std::string api_base;
  std::string api_key;
  std::optional<std::filesystem::path> mock_table;
  bool mock_template_fallback = true;
  std::string endpoint = "/chat/completions";
  std::string text_path = "/choices/0/message/content";
  std::string finish_path = "/choices/0/finish_reason";
  int max_concurrent = 4;
  int timeout_seconds = 60;
  int max_retries = 3;
  int initial_backoff_ms = 500;
};

struct ReportConfig {
  /// Column name -> quality_report.json; columns keep file order.
  std::vector<std::pair<std::string, std::filesystem::path>> quality_reports;
  std::vector<std::filesystem::path> results;  // summary sources for the F1 grid
};

struct ExperimentConfig {
  std::filesystem::path config_dir;
  DatasetSpec dataset;
  std::optional<std::filesystem::path> annotations;
  std::optional<std::filesystem::path> lexicon;
  SynthesisConfig synthesis;
  double fallback_precision = 0.8;
  TargetPolicy targets;
  FilterConfig filters = FilterConfig::all();
  std::vector<std::size_t> schedule = {10, 15, 30, 50, 70, 90, 120};
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5, 6, 7, 8};
  std::vector<std::string> conditions = {"random", "cluster", "uncertainty", "cf_no_vt",
                                         "counterfactual"};
  std::optional<std::size_t> cluster_k;
  BackendConfig backend;
  std::optional<std::filesystem::path> cache_dir;
  std::filesystem::path output_dir = "out";
  std::optional<std::filesystem::path> external_results;
  ReportConfig report;
};

/// Parses a JSON experiment file. Relative paths resolve against the file's
/// directory; referenced input files must exist. Unknown keys, wrong types
/// and bad values raise ConfigError naming the dotted key.
ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig parse_config(const nlohmann::ordered_json& j, const std::filesystem::path& base_dir);

/// LLM_API_BASE, LLM_API_KEY and LLM_MODEL override the backend section.
void apply_environment(BackendConfig& backend);

}  // namespace patvar
