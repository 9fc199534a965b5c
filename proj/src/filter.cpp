#include "patvar/filter.hpp"

#include <fstream>

#include "patvar/error.hpp"
#include "patvar/log.hpp"
#include "patvar/prompts.hpp"
#include "patvar/strings.hpp"

namespace patvar {
namespace {

constexpr std::string_view kRefusal = "cannot generate counterfactual";

constexpr std::string_view kScaffoldMarkers[] = {
    "modified text:",  "original text:", "original label:", "modified label:",
    "generated phrases:", "criteria 1",   "criteria 2",      "criteria 3",
    "--- system",      "--- user",       "--- assistant",
};

bool starts_with_role(std::string_view line) {
  auto l = str::lower(str::trim(line));
  for (std::string_view role : {"system:", "user:", "assistant:"})
    if (l.rfind(role, 0) == 0) return true;
  return false;
}

std::size_t word_count(std::string_view text) {
  std::size_t n = 0;
  bool in_word = false;
  for (char ch : text) {
    bool space = std::isspace(static_cast<unsigned char>(ch));
    if (!space && !in_word) ++n;
    in_word = !space;
  }
  return n;
}

bool ends_terminal(std::string_view text) {
  text = str::trim(text);
  while (!text.empty() && (text.back() == '"' || text.back() == '\'' || text.back() == ')'))
    text.remove_suffix(1);
  return !text.empty() && (text.back() == '.' || text.back() == '!' || text.back() == '?');
}

bool is_vacuous(const PatternAst& p) {
  for (const auto& seq : p.alternatives)
    if (seq.size() == 1 && seq.front().kind == AtomKind::Wildcard) return true;
  return false;
}

std::optional<double> rate(std::size_t num, std::size_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

nlohmann::ordered_json opt_json(const std::optional<double>& v) {
  return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

std::optional<double> opt_from(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

}  // namespace

std::string FilterConfig::name() const {
  std::vector<std::string> parts;
  if (enable_heuristic) parts.emplace_back("heuristic");
  if (enable_symbolic) parts.emplace_back("symbolic");
  if (enable_discriminator) parts.emplace_back("discriminator");
  if (parts.empty()) return "none";
  if (parts.size() == 3) return "all";
  return str::join(parts, "+");
}

bool FilterConfig::subset_of(const FilterConfig& o) const {
  return (!enable_heuristic || o.enable_heuristic) && (!enable_symbolic || o.enable_symbolic) &&
         (!enable_discriminator || o.enable_discriminator);
}

std::vector<FilterConfig> ablation_arms() {
  return {FilterConfig{false, false, false}, FilterConfig{true, false, false},
          FilterConfig{true, true, false}, FilterConfig{true, false, true},
          FilterConfig{true, true, true}};
}

QualityReport compute_metrics(const std::vector<MetricFlags>& flags) {
  QualityReport r;
  r.n_total = flags.size();
  for (const auto& f : flags) {
    if (f.pattern_kept) {
      ++r.n_pattern;
      if (*f.pattern_kept) ++r.pattern_kept;
    }
    if (f.verdict) {
      ++r.n_label;
      if (f.verdict->l_hat == f.verdict->L_target) ++r.hard_flips;
      if (f.verdict->l_hat != f.verdict->l_orig) ++r.soft_flips;
    }
  }
  r.pkr = rate(r.pattern_kept, r.n_pattern);
  r.slfr = rate(r.soft_flips, r.n_label);
  r.lfr = rate(r.hard_flips, r.n_label);
  return r;
}

nlohmann::ordered_json to_json(const QualityReport& r) {
  nlohmann::ordered_json j;
  j["n_total"] = r.n_total;
  j["n_pattern"] = r.n_pattern;
  j["pattern_kept"] = r.pattern_kept;
  j["n_label"] = r.n_label;
  j["soft_flips"] = r.soft_flips;
  j["hard_flips"] = r.hard_flips;
  j["pkr"] = opt_json(r.pkr);
  j["slfr"] = opt_json(r.slfr);
  j["lfr"] = opt_json(r.lfr);
  return j;
}

QualityReport quality_report_from_json(const nlohmann::json& j) {
  QualityReport r;
  r.n_total = j.value("n_total", std::size_t{0});
  r.n_pattern = j.value("n_pattern", std::size_t{0});
  r.pattern_kept = j.value("pattern_kept", std::size_t{0});
  r.n_label = j.value("n_label", std::size_t{0});
  r.soft_flips = j.value("soft_flips", std::size_t{0});
  r.hard_flips = j.value("hard_flips", std::size_t{0});
  r.pkr = opt_from(j, "pkr");
  r.slfr = opt_from(j, "slfr");
  r.lfr = opt_from(j, "lfr");
  return r;
}

StageVerdict heuristic_filter(const CounterfactualCandidate& c) {
  const auto& text = c.generated_text;
  if (str::icontains(text, kRefusal)) return StageVerdict::failed("refusal");
  for (auto marker : kScaffoldMarkers)
    if (str::icontains(text, marker)) return StageVerdict::failed("prompt echo");
  for (const auto& line : str::split(text, '\n'))
    if (starts_with_role(line)) return StageVerdict::failed("prompt echo");
  const auto words = word_count(text);
  if (c.finish_reason == llm::FinishReason::Length) return StageVerdict::failed("incomplete");
  if (!ends_terminal(text) && words > 3) return StageVerdict::failed("incomplete");
  if (words < 3) return StageVerdict::failed("trivial");
  if (text == c.task.original.raw) return StageVerdict::failed("trivial");
  return StageVerdict::passed();
}

StageVerdict symbolic_filter(const CounterfactualCandidate& c, const SynonymLexicon& lexicon,
                             const AnnotationProvider& provider) {
  if (!c.has_pattern()) return {StageStatus::NotApplicable, "no pattern"};
  if (is_vacuous(c.task.pattern))
    log::warn("pattern " + render_pattern(c.task.pattern) + " matches every sentence");
  auto sentence = annotate(c.generated_text, provider);
  sentence.id = c.id;
  if (match_sentence(c.task.pattern, sentence, lexicon)) return StageVerdict::passed();
  return StageVerdict::failed("pattern lost: " + render_pattern(c.task.pattern));
}

llm::CompletionRequest build_discriminator_request(const std::string& text,
                                                   const std::vector<std::string>& label_set) {
  llm::CompletionRequest req;
  req.messages = prompts::render(prompts::Template::Discriminator,
                                 {{"text", text}, {"labels", str::join(label_set, ", ")}});
  req.temperature = 0.0;
  req.max_tokens = 16;
  return req;
}

std::string parse_discriminator_label(const std::string& response,
                                      const std::vector<std::string>& label_set) {
  std::string_view s = str::trim(response);
  auto strip = [&] {
    bool changed = true;
    while (changed && !s.empty()) {
      changed = false;
      if (s.back() == '.' || s.back() == '"' || s.back() == '\'' || s.back() == '`') {
        s.remove_suffix(1);
        changed = true;
      }
      if (!s.empty() && (s.front() == '"' || s.front() == '\'' || s.front() == '`')) {
        s.remove_prefix(1);
        changed = true;
      }
      s = str::trim(s);
    }
  };
  strip();
  const auto wanted = str::lower(s);
  for (const auto& l : label_set)
    if (str::lower(l) == wanted) return l;
  throw ResponseFormatError("discriminator answer '" + response + "' is not in the label set");
}

std::pair<StageVerdict, DiscriminatorVerdict> discriminator_filter(
    const CounterfactualCandidate& c, const std::vector<std::string>& label_set,
    llm::Gateway& gateway) {
  auto resp = gateway.complete(build_discriminator_request(c.generated_text, label_set));
  DiscriminatorVerdict v{parse_discriminator_label(resp.text, label_set), c.task.target_label,
                         c.task.original_label};
  if (v.l_hat == v.L_target) return {StageVerdict::passed(), v};
  if (v.l_hat == v.l_orig) return {StageVerdict::failed("kept original"), v};
  return {StageVerdict::failed("missed target"), v};
}

MetricFlags metric_flags(const CounterfactualCandidate& c) {
  MetricFlags f;
  const auto sym = c.verdict(Stage::Symbolic).status;
  if (c.mode == GenerationMode::Vt && (sym == StageStatus::Passed || sym == StageStatus::Failed))
    f.pattern_kept = sym == StageStatus::Passed;
  if (c.discriminator_label)
    f.verdict = DiscriminatorVerdict{*c.discriminator_label, c.task.target_label,
                                     c.task.original_label};
  return f;
}

PipelineResult run_pipeline(std::vector<CounterfactualCandidate> candidates,
                            const FilterConfig& cfg, const FilterDeps& deps) {
  if (cfg.enable_discriminator && !deps.gateway)
    throw PreconditionViolation("discriminator stage enabled without a gateway");

  PipelineResult out;
  std::vector<MetricFlags> flags;
  for (auto& c : candidates) {
    c.verdicts = {};
    c.discriminator_label.reset();
    bool alive = true;

    auto judge = [&](Stage stage, bool enabled, auto&& fn) {
      if (!enabled) {
        c.set_verdict(stage, {StageStatus::Skipped, "disabled"});
        return;
      }
      if (!alive) return;
      StageVerdict v;
      try {
        v = fn();
      } catch (const GatewayError&) {
        throw;
      } catch (const std::exception& e) {
        v = StageVerdict::failed(std::string("error: ") + e.what());
      }
      if (v.status == StageStatus::Failed) alive = false;
      c.set_verdict(stage, std::move(v));
    };

    judge(Stage::Heuristic, cfg.enable_heuristic, [&] { return heuristic_filter(c); });
    judge(Stage::Symbolic, cfg.enable_symbolic,
          [&] { return symbolic_filter(c, deps.lexicon, deps.provider); });
    judge(Stage::Discriminator, cfg.enable_discriminator, [&] {
      auto [verdict, dv] = discriminator_filter(c, deps.label_set, *deps.gateway);
      c.discriminator_label = dv.l_hat;
      return verdict;
    });

    flags.push_back(metric_flags(c));
    if (alive) out.survivors.push_back(c);
    out.audited.push_back(std::move(c));
  }
  out.report = compute_metrics(flags);
  return out;
}

void write_jsonl(const std::filesystem::path& path,
                 const std::vector<CounterfactualCandidate>& candidates) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  for (const auto& c : candidates) out << to_json(c).dump() << '\n';
}

std::vector<CounterfactualCandidate> read_candidates(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<CounterfactualCandidate> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (str::is_blank(line)) continue;
    try {
      out.push_back(candidate_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(lineno, e.what());
    } catch (const SyntaxError& e) {
      throw ParseError(lineno, e.what());
    }
  }
  return out;
}

}  // namespace patvar
