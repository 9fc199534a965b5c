#include "patvar/config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>

#include "patvar/active_learning.hpp"
#include "patvar/error.hpp"

namespace patvar {
namespace {

using Json = nlohmann::ordered_json;

class Section {
 public:
  Section(const Json& j, std::string prefix, const std::filesystem::path& base)
      : j_(j), prefix_(std::move(prefix)), base_(base) {
    if (!j_.is_object()) throw ConfigError(prefix_.empty() ? "<root>" : prefix_, "must be an object");
  }

  void allow(std::initializer_list<const char*> keys) const {
    std::set<std::string> ok(keys.begin(), keys.end());
    for (const auto& [k, v] : j_.items())
      if (!ok.count(k)) throw ConfigError(key(k), "unknown key");
  }

  bool has(const char* k) const { return j_.contains(k) && !j_.at(k).is_null(); }
  std::string key(const std::string& k) const { return prefix_.empty() ? k : prefix_ + "." + k; }
  const Json& at(const char* k) const { return j_.at(k); }
  const std::filesystem::path& base() const { return base_; }
  Section sub(const char* k) const { return Section(j_.at(k), key(k), base_); }

  template <typename T>
  void get(const char* k, T& out) const {
    if (!has(k)) return;
    try {
      out = j_.at(k).get<T>();
    } catch (const nlohmann::json::exception&) {
      throw ConfigError(key(k), "wrong type");
    }
  }

  void get_string(const char* k, std::string& out) const {
    if (!has(k)) return;
    if (!j_.at(k).is_string()) throw ConfigError(key(k), "expected a string");
    out = j_.at(k).get<std::string>();
  }

  void get_bool(const char* k, bool& out) const {
    if (!has(k)) return;
    if (!j_.at(k).is_boolean()) throw ConfigError(key(k), "expected true or false");
    out = j_.at(k).get<bool>();
  }

  template <typename T>
  void get_uint(const char* k, T& out) const {
    if (!has(k)) return;
    if (!j_.at(k).is_number_unsigned()) throw ConfigError(key(k), "expected a non-negative integer");
    out = j_.at(k).get<T>();
  }

  void get_int(const char* k, int& out, int min) const {
    if (!has(k)) return;
    if (!j_.at(k).is_number_integer()) throw ConfigError(key(k), "expected an integer");
    out = j_.at(k).get<int>();
    if (out < min) throw ConfigError(key(k), "must be at least " + std::to_string(min));
  }

  void get_number(const char* k, double& out) const {
    if (!has(k)) return;
    if (!j_.at(k).is_number()) throw ConfigError(key(k), "expected a number");
    out = j_.at(k).get<double>();
  }

  std::filesystem::path path(const char* k, bool must_exist) const {
    if (!j_.at(k).is_string()) throw ConfigError(key(k), "expected a path string");
    std::filesystem::path p = j_.at(k).get<std::string>();
    if (p.is_relative()) p = base_ / p;
    if (must_exist && !std::filesystem::exists(p))
      throw ConfigError(key(k), "file not found: " + p.string());
    return p;
  }

  std::optional<std::filesystem::path> opt_path(const char* k, bool must_exist) const {
    if (!has(k)) return std::nullopt;
    return path(k, must_exist);
  }

 private:
  const Json& j_;
  std::string prefix_;
  const std::filesystem::path& base_;
};

void parse_dataset(const Section& s, DatasetSpec& d) {
  s.allow({"path", "format", "name", "text_field", "label_field", "id_field", "multi_label",
           "label_separator", "holdout_fraction", "split_seed", "labels"});
  if (!s.has("path")) throw ConfigError(s.key("path"), "required");
  d.path = s.path("path", true);
  s.get_string("format", d.format);
  if (d.format != "csv" && d.format != "jsonl")
    throw ConfigError(s.key("format"), "expected csv or jsonl");
  s.get_string("name", d.name);
  s.get_string("text_field", d.text_field);
  s.get_string("label_field", d.label_field);
  s.get_string("id_field", d.id_field);
  s.get_bool("multi_label", d.multi_label);
  s.get_string("label_separator", d.label_separator);
  s.get_number("holdout_fraction", d.holdout_fraction);
  if (!(d.holdout_fraction > 0.0 && d.holdout_fraction < 1.0))
    throw ConfigError(s.key("holdout_fraction"), "must lie strictly between 0 and 1");
  s.get_uint("split_seed", d.split_seed);
  s.get("labels", d.labels);
}

void parse_synthesis(const Section& s, ExperimentConfig& c) {
  s.allow({"max_patterns", "max_atoms", "min_precision", "beam_width", "fallback_precision"});
  s.get_int("max_patterns", c.synthesis.max_patterns, 1);
  s.get_int("max_atoms", c.synthesis.max_atoms, 1);
  s.get_int("beam_width", c.synthesis.beam_width, 1);
  s.get_number("min_precision", c.synthesis.min_precision);
  s.get_number("fallback_precision", c.fallback_precision);
  for (auto [k, v] : {std::pair{"min_precision", c.synthesis.min_precision},
                      std::pair{"fallback_precision", c.fallback_precision}})
    if (v < 0.0 || v > 1.0) throw ConfigError(s.key(k), "must lie in [0, 1]");
}

void parse_targets(const Section& s, TargetPolicy& t) {
  s.allow({"policy", "k", "seed"});
  std::string policy = "default";
  s.get_string("policy", policy);
  if (policy == "default") {
    t.kind = TargetPolicy::Kind::Default;
  } else if (policy == "all_others") {
    t.kind = TargetPolicy::Kind::AllOthers;
  } else if (policy == "round_robin") {
    t.kind = TargetPolicy::Kind::RoundRobin;
  } else if (policy == "random") {
    t.kind = TargetPolicy::Kind::Random;
  } else {
    throw ConfigError(s.key("policy"), "expected default, all_others, round_robin or random");
  }
  s.get_int("k", t.k, 1);
  s.get_uint("seed", t.seed);
}

void parse_backend(const Section& s, BackendConfig& b) {
  s.allow({"kind", "model", "api_base", "api_key", "mock_table", "mock_fallback", "endpoint",
           "text_path", "finish_path", "max_concurrent", "timeout_seconds", "max_retries",
           "initial_backoff_ms"});
  s.get_string("kind", b.kind);
  if (b.kind != "mock" && b.kind != "http") throw ConfigError(s.key("kind"), "expected mock or http");
  s.get_string("model", b.model);
  s.get_string("api_base", b.api_base);
  s.get_string("api_key", b.api_key);
  b.mock_table = s.opt_path("mock_table", true);
  if (s.has("mock_fallback")) {
    std::string f;
    s.get_string("mock_fallback", f);
    if (f != "template" && f != "none") throw ConfigError(s.key("mock_fallback"), "expected template or none");
    b.mock_template_fallback = f == "template";
  }
  s.get_string("endpoint", b.endpoint);
  s.get_string("text_path", b.text_path);
  s.get_string("finish_path", b.finish_path);
  s.get_int("max_concurrent", b.max_concurrent, 1);
  s.get_int("timeout_seconds", b.timeout_seconds, 1);
  s.get_int("max_retries", b.max_retries, 0);
  s.get_int("initial_backoff_ms", b.initial_backoff_ms, 0);
}

void parse_report(const Section& s, ReportConfig& r) {
  s.allow({"quality_reports", "results"});
  if (s.has("quality_reports")) {
    auto q = s.sub("quality_reports");
    for (const auto& item : s.at("quality_reports").items()) {
      const auto& name = item.key();
      r.quality_reports.emplace_back(name, q.path(name.c_str(), false));
    }
  }
  if (s.has("results")) {
    const auto& arr = s.at("results");
    if (!arr.is_array()) throw ConfigError(s.key("results"), "expected a list of paths");
    for (const auto& item : arr) {
      if (!item.is_string()) throw ConfigError(s.key("results"), "expected a list of paths");
      std::filesystem::path p = item.get<std::string>();
      r.results.push_back(p.is_relative() ? s.base() / p : p);
    }
  }
}

}  // namespace

ExperimentConfig parse_config(const nlohmann::ordered_json& j, const std::filesystem::path& base) {
  Section root(j, "", base);
  root.allow({"dataset", "annotations", "lexicon", "synthesis", "targets", "filters", "schedule",
              "seeds", "conditions", "cluster_k", "backend", "cache_dir", "output_dir",
              "external_results", "report"});
  ExperimentConfig c;
  c.config_dir = base;
  if (!root.has("dataset")) throw ConfigError("dataset", "required");
  parse_dataset(root.sub("dataset"), c.dataset);
  c.annotations = root.opt_path("annotations", true);
  c.lexicon = root.opt_path("lexicon", true);
  if (root.has("synthesis")) parse_synthesis(root.sub("synthesis"), c);
  if (root.has("targets")) parse_targets(root.sub("targets"), c.targets);
  if (root.has("filters")) {
    auto f = root.sub("filters");
    f.allow({"heuristic", "symbolic", "discriminator"});
    f.get_bool("heuristic", c.filters.enable_heuristic);
    f.get_bool("symbolic", c.filters.enable_symbolic);
    f.get_bool("discriminator", c.filters.enable_discriminator);
  }
  if (root.has("schedule")) {
    root.get("schedule", c.schedule);
    try {
      validate_schedule(c.schedule, static_cast<std::size_t>(-1));
    } catch (const ConfigError& e) {
      throw ConfigError("schedule", e.what());
    }
  }
  if (root.has("seeds")) {
    const auto& s = root.at("seeds");
    if (s.is_number_unsigned()) {
      c.seeds.clear();
      for (std::uint64_t i = 1; i <= s.get<std::uint64_t>(); ++i) c.seeds.push_back(i);
    } else {
      root.get("seeds", c.seeds);
    }
    if (c.seeds.empty()) throw ConfigError("seeds", "at least one seed is required");
  }
  if (root.has("conditions")) {
    root.get("conditions", c.conditions);
    for (const auto& cond : c.conditions)
      if (std::find(kConditions.begin(), kConditions.end(), cond) == kConditions.end())
        throw ConfigError("conditions", "unknown condition '" + cond + "'");
  }
  if (root.has("cluster_k")) {
    std::size_t k = 0;
    root.get_uint("cluster_k", k);
    if (k == 0) throw ConfigError("cluster_k", "must be positive");
    c.cluster_k = k;
  }
  if (root.has("backend")) parse_backend(root.sub("backend"), c.backend);
  c.cache_dir = root.opt_path("cache_dir", false);
  if (root.has("output_dir")) c.output_dir = root.path("output_dir", false);
  else c.output_dir = base / "out";
  c.external_results = root.opt_path("external_results", true);
  if (root.has("report")) parse_report(root.sub("report"), c.report);
  apply_environment(c.backend);
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config", "cannot open " + path.string());
  nlohmann::ordered_json j;
  try {
    j = nlohmann::ordered_json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("--config", std::string("invalid JSON: ") + e.what());
  }
  auto base = std::filesystem::absolute(path).parent_path();
  return parse_config(j, base);
}

void apply_environment(BackendConfig& b) {
  if (const char* v = std::getenv("LLM_API_BASE"); v && *v) b.api_base = v;
  if (const char* v = std::getenv("LLM_API_KEY"); v && *v) b.api_key = v;
  if (const char* v = std::getenv("LLM_MODEL"); v && *v) b.model = v;
}

}  // namespace patvar
