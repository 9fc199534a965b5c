#include "patvar/commands.hpp"

#include <algorithm>
#include <fstream>
#include <ostream>

#include "patvar/digest.hpp"
#include "patvar/error.hpp"
#include "patvar/log.hpp"
#include "patvar/report.hpp"

namespace patvar {
namespace {

namespace fs = std::filesystem;

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
  if (!out) throw DataError("short write to " + path.string());
}

nlohmann::json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

nlohmann::ordered_json scored_json(const ScoredPattern& p) {
  nlohmann::ordered_json j;
  j["pattern"] = render_pattern(p.pattern);
  j["precision"] = p.precision;
  j["recall"] = p.recall;
  j["f1"] = p.f1;
  j["matched_positive_ids"] = p.matched_positive_ids;
  j["matched_negative_ids"] = p.matched_negative_ids;
  return j;
}

ScoredPattern scored_from_json(const nlohmann::json& j) {
  ScoredPattern p;
  p.pattern = parse_pattern(j.at("pattern").get<std::string>());
  p.precision = j.value("precision", 0.0);
  p.recall = j.value("recall", 0.0);
  p.f1 = j.value("f1", 0.0);
  p.matched_positive_ids = j.value("matched_positive_ids", std::set<std::string>{});
  p.matched_negative_ids = j.value("matched_negative_ids", std::set<std::string>{});
  return p;
}

std::unique_ptr<llm::Backend> make_backend(const BackendConfig& b) {
  if (b.kind == "http") {
    if (b.api_base.empty()) throw ConfigError("backend.api_base", "required for the http backend");
    llm::HttpOptions o;
    o.api_base = b.api_base;
    o.api_key = b.api_key;
    o.endpoint = b.endpoint;
    o.text_path = b.text_path;
    o.finish_path = b.finish_path;
    o.timeout = std::chrono::seconds(b.timeout_seconds);
    return std::make_unique<llm::HttpBackend>(o);
  }
  auto mock = std::make_unique<llm::MockBackend>();
  if (b.mock_table) mock->load_table(*b.mock_table);
  if (b.mock_template_fallback) mock->set_responder(template_response);
  return mock;
}

}  // namespace

Experiment::Experiment(ExperimentConfig cfg, llm::Backend* backend) : cfg_(std::move(cfg)) {
  if (backend) {
    backend_ = backend;
  } else {
    owned_backend_ = make_backend(cfg_.backend);
    backend_ = owned_backend_.get();
  }
  llm::GatewayOptions g;
  g.cache_dir = cfg_.cache_dir;
  g.retry.max_retries = cfg_.backend.max_retries;
  g.retry.initial_backoff = std::chrono::milliseconds(cfg_.backend.initial_backoff_ms);
  g.max_concurrent = cfg_.backend.max_concurrent;
  g.model = cfg_.backend.model;
  gateway_ = std::make_unique<llm::Gateway>(*backend_, g);

  lexicon_ = cfg_.lexicon ? SynonymLexicon::load(*cfg_.lexicon) : SynonymLexicon::fixture();
  fixture_provider_ = std::make_unique<FixtureProvider>();
  if (cfg_.annotations) {
    provider_ = std::make_unique<LookupProvider>(load_annotations_file(*cfg_.annotations),
                                                 *fixture_provider_);
  } else {
    provider_ = std::make_unique<FixtureProvider>();
  }
  fs::create_directories(cfg_.output_dir);
}

Experiment::~Experiment() = default;

const Dataset& Experiment::dataset() {
  if (!dataset_) dataset_ = ingest(cfg_.dataset, *provider_, gateway_.get());
  return *dataset_;
}

void Experiment::begin(const std::string& command) {
  const auto path = cfg_.output_dir / "manifest.json";
  nlohmann::json m = nlohmann::json::object();
  if (fs::exists(path)) {
    try {
      m = read_json_file(path);
    } catch (const DataError&) {
      log::warn("ignoring unreadable manifest " + path.string());
      m = nlohmann::json::object();
    }
  }
  m[command] = {{"complete", false}, {"files", nlohmann::json::object()}};
  write_text(path, m.dump(2) + "\n");
}

void Experiment::finish(const std::string& command, const std::vector<std::string>& files) {
  const auto path = cfg_.output_dir / "manifest.json";
  nlohmann::json m = read_json_file(path);
  nlohmann::json hashes = nlohmann::json::object();
  for (const auto& f : files) hashes[f] = sha256_file(cfg_.output_dir / f);
  m[command] = {{"complete", true}, {"files", hashes}};
  write_text(path, m.dump(2) + "\n");
}

std::vector<LabelPatterns> Experiment::synthesize_all() {
  const auto& ds = dataset();
  std::vector<LabelPatterns> out;
  for (const auto& label : ds.label_set) {
    std::vector<LabeledExample> pos, neg;
    for (const auto& ex : ds.pool) (ex.label == label ? pos : neg).push_back(ex);
    LabelPatterns lp{label, {}};
    if (pos.empty()) {
      log::warn("label '" + label + "' has no pool examples; no patterns");
      out.push_back(std::move(lp));
      continue;
    }
    try {
      lp.patterns = synthesize_scored(pos, neg, cfg_.synthesis, lexicon_);
    } catch (const NoViablePattern&) {
      auto relaxed = cfg_.synthesis;
      relaxed.min_precision = cfg_.fallback_precision;
      try {
        lp.patterns = synthesize_scored(pos, neg, relaxed, lexicon_);
        log::warn("label '" + label + "': no exact pattern, used precision >= " +
                  format_fixed(cfg_.fallback_precision, 2));
      } catch (const NoViablePattern& e) {
        log::warn("label '" + label + "': " + e.what());
      }
    }
    out.push_back(std::move(lp));
  }
  return out;
}

void Experiment::synth() {
  begin("synth");
  auto all = synthesize_all();
  std::string txt;
  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  for (const auto& lp : all) {
    nlohmann::ordered_json entry;
    entry["label"] = lp.label;
    entry["patterns"] = nlohmann::ordered_json::array();
    for (const auto& p : lp.patterns) {
      txt += lp.label + "\t" + render_pattern(p.pattern) + "\n";
      entry["patterns"].push_back(scored_json(p));
    }
    j.push_back(std::move(entry));
  }
  write_text(cfg_.output_dir / "patterns.txt", txt);
  write_text(cfg_.output_dir / "patterns.json", j.dump(2) + "\n");
  finish("synth", {"patterns.txt", "patterns.json"});
}

std::vector<LabelPatterns> Experiment::load_or_synthesize() {
  const auto path = cfg_.output_dir / "patterns.json";
  if (!fs::exists(path)) return synthesize_all();
  std::vector<LabelPatterns> out;
  try {
    for (const auto& entry : read_json_file(path)) {
      LabelPatterns lp{entry.at("label").get<std::string>(), {}};
      for (const auto& p : entry.at("patterns")) lp.patterns.push_back(scored_from_json(p));
      out.push_back(std::move(lp));
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  } catch (const SyntaxError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
  return out;
}

std::vector<CounterfactualCandidate> Experiment::generate_all(
    const std::vector<LabelPatterns>& patterns) {
  const auto& ds = dataset();
  std::vector<CounterfactualCandidate> out;
  for (const auto& ex : ds.pool) {
    const PatternAst* pattern = nullptr;
    for (const auto& lp : patterns) {
      if (lp.label != ex.label) continue;
      for (const auto& p : lp.patterns)
        if (!pattern && match_sentence(p.pattern, ex.sentence, lexicon_)) pattern = &p.pattern;
    }
    for (const auto& target : plan_targets(ex, ds.label_set, cfg_.targets)) {
      if (pattern) {
        try {
          auto task = make_task(ex.sentence, ex.label, target, *pattern, lexicon_);
          auto phrases = generate_candidate_phrases(task, lexicon_, *provider_, *gateway_);
          out.push_back(generate_counterfactual(task, phrases, *gateway_));
        } catch (const GatewayError&) {
          throw;
        } catch (const Error& e) {
          log::warn("no counterfactual for " + ex.sentence.id + " -> " + target + ": " + e.what());
        }
      }
      out.push_back(generate_without_vt(ex.sentence, ex.label, target, *gateway_));
    }
  }
  return out;
}

void Experiment::gen() {
  begin("gen");
  auto candidates = generate_all(load_or_synthesize());
  write_jsonl(cfg_.output_dir / "candidates.jsonl", candidates);
  finish("gen", {"candidates.jsonl"});
}

std::vector<CounterfactualCandidate> Experiment::load_or_generate() {
  const auto path = cfg_.output_dir / "candidates.jsonl";
  if (fs::exists(path)) return read_candidates(path);
  return generate_all(load_or_synthesize());
}

void Experiment::filter() {
  begin("filter");
  const auto& ds = dataset();
  FilterDeps deps{lexicon_, *provider_, gateway_.get(), ds.label_set};
  auto result = run_pipeline(load_or_generate(), cfg_.filters, deps);
  write_jsonl(cfg_.output_dir / "survivors.jsonl", result.survivors);
  write_jsonl(cfg_.output_dir / "audit.jsonl", result.audited);
  write_text(cfg_.output_dir / "quality_report.json", to_json(result.report).dump(2) + "\n");
  write_text(cfg_.output_dir / "quality_report.md",
             render_quality_table({{ds.name, result.report}}));
  finish("filter",
         {"survivors.jsonl", "audit.jsonl", "quality_report.json", "quality_report.md"});
}

SurvivorIndex Experiment::survivor_index(const std::vector<CounterfactualCandidate>& survivors,
                                         GenerationMode mode) {
  SurvivorIndex index;
  for (const auto& c : survivors)
    if (c.mode == mode) index[c.task.original.id].push_back({c.generated_text, c.task.target_label});
  return index;
}

SimulationDeps Experiment::simulation_deps(const PipelineResult& filtered) const {
  SimulationDeps deps;
  auto labels = dataset_->label_set;
  const AnnotationProvider* provider = provider_.get();
  deps.classifier_factory = [labels, provider] {
    return std::make_unique<NaiveBayesClassifier>(labels, provider);
  };
  deps.cluster_k = cfg_.cluster_k;
  deps.counterfactual = survivor_index(filtered.survivors, GenerationMode::Vt);
  deps.no_vt = survivor_index(filtered.survivors, GenerationMode::NoVt);
  return deps;
}

void Experiment::simulate() {
  begin("simulate");
  const auto& ds = dataset();
  std::vector<CounterfactualCandidate> candidates;
  const bool needs_cf = std::any_of(cfg_.conditions.begin(), cfg_.conditions.end(),
                                    [](const auto& c) { return c == "counterfactual" || c == "cf_no_vt"; });
  if (needs_cf) candidates = load_or_generate();
  FilterDeps fdeps{lexicon_, *provider_, gateway_.get(), ds.label_set};
  auto filtered = run_pipeline(std::move(candidates), cfg_.filters, fdeps);
  auto results = run_simulation(ds, cfg_.conditions, cfg_.schedule, cfg_.seeds,
                                simulation_deps(filtered));
  write_results_csv(cfg_.output_dir / "results.csv", results);
  write_summary_csv(cfg_.output_dir / "summary.csv", results);
  write_text(cfg_.output_dir / "results.md", "## " + ds.name + "\n\n" + render_f1_grid(results));
  finish("simulate", {"results.csv", "summary.csv", "results.md"});
}

void Experiment::ablate() {
  begin("ablate");
  const auto& ds = dataset();
  const auto candidates = load_or_generate();
  FilterDeps fdeps{lexicon_, *provider_, gateway_.get(), ds.label_set};
  std::vector<RunResult> results;
  std::vector<std::pair<std::string, QualityReport>> quality;
  for (const auto& arm : ablation_arms()) {
    auto filtered = run_pipeline(candidates, arm, fdeps);
    auto deps = simulation_deps(filtered);
    auto r = run_simulation(ds, {"counterfactual"}, cfg_.schedule, cfg_.seeds, deps);
    r.front().condition = arm.name();
    results.push_back(std::move(r.front()));
    quality.emplace_back(display_name(arm.name()), filtered.report);
  }
  attach_p_values(results, "all");
  write_results_csv(cfg_.output_dir / "ablation_results.csv", results);
  write_summary_csv(cfg_.output_dir / "ablation_summary.csv", results, "all");
  write_text(cfg_.output_dir / "ablation.md",
             "## Filter ablation: " + ds.name + "\n\n" + render_f1_grid(results) +
                 "\n## Candidate quality per arm\n\n" + render_quality_table(quality));
  finish("ablate", {"ablation_results.csv", "ablation_summary.csv", "ablation.md"});
}

void Experiment::report() {
  begin("report");
  auto quality_sources = cfg_.report.quality_reports;
  if (quality_sources.empty() && fs::exists(cfg_.output_dir / "quality_report.json")) {
    auto name = cfg_.dataset.name.empty() ? cfg_.dataset.path.stem().string() : cfg_.dataset.name;
    quality_sources.emplace_back(name, cfg_.output_dir / "quality_report.json");
  }
  std::vector<std::pair<std::string, QualityReport>> quality;
  for (const auto& [name, path] : quality_sources)
    quality.emplace_back(name, quality_report_from_json(read_json_file(path)));

  auto result_sources = cfg_.report.results;
  if (result_sources.empty() && fs::exists(cfg_.output_dir / "results.csv"))
    result_sources.push_back(cfg_.output_dir / "results.csv");
  if (cfg_.external_results) result_sources.push_back(*cfg_.external_results);

  std::vector<std::string> datasets;
  std::map<std::string, std::vector<RunResult>> by_dataset;
  for (const auto& src : result_sources)
    for (auto& r : read_results_csv(src)) {
      if (!by_dataset.count(r.dataset)) datasets.push_back(r.dataset);
      by_dataset[r.dataset].push_back(std::move(r));
    }

  std::string md = "# Results\n";
  if (!quality.empty()) md += "\n## Counterfactual quality\n\n" + render_quality_table(quality);
  if (!datasets.empty()) md += "\n## Macro F1 (mean (sd), stars vs Counterfactuals)\n";
  for (const auto& name : datasets) {
    auto& rs = by_dataset[name];
    attach_p_values(rs, "counterfactual");
    md += "\n### " + name + "\n\n" + render_f1_grid(rs);
  }
  write_text(cfg_.output_dir / "report.md", md);
  write_text(cfg_.output_dir / "quality_table.md", render_quality_table(quality));
  finish("report", {"report.md", "quality_table.md"});
}

void apply_overrides(ExperimentConfig& cfg, const CommandOptions& o) {
  if (o.seed) {
    const auto n = cfg.seeds.size();
    cfg.seeds.clear();
    for (std::size_t i = 0; i < n; ++i) cfg.seeds.push_back(*o.seed + i);
  }
  if (o.cache_dir) cfg.cache_dir = *o.cache_dir;
  if (o.out) cfg.output_dir = *o.out;
}

int run_command(const std::string& command, const CommandOptions& options, std::ostream& err) {
  try {
    auto cfg = load_config(options.config);
    apply_overrides(cfg, options);
    Experiment exp(std::move(cfg));
    if (command == "synth") {
      exp.synth();
    } else if (command == "gen") {
      exp.gen();
    } else if (command == "filter") {
      exp.filter();
    } else if (command == "simulate") {
      exp.simulate();
    } else if (command == "ablate") {
      exp.ablate();
    } else if (command == "report") {
      exp.report();
    } else {
      err << "patvar: unknown command '" << command << "'\n";
      return 2;
    }
    return 0;
  } catch (const ConfigError& e) {
    err << "patvar: config error: " << e.what() << '\n';
    return 2;
  } catch (const GatewayError& e) {
    err << "patvar: backend error: " << e.what() << '\n';
    return 3;
  } catch (const DataError& e) {
    err << "patvar: data error: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    err << "patvar: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace patvar
