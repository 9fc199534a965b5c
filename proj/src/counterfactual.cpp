#include "patvar/counterfactual.hpp"

#include <algorithm>
#include <random>
#include <regex>
#include <set>

#include "patvar/error.hpp"
#include "patvar/log.hpp"
#include "patvar/prompts.hpp"
#include "patvar/strings.hpp"

namespace patvar {
namespace {

std::string normalize_quotes(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '`') {
      out += '\'';
    } else if (i + 2 < s.size() && static_cast<unsigned char>(s[i]) == 0xE2 &&
               static_cast<unsigned char>(s[i + 1]) == 0x80 &&
               (static_cast<unsigned char>(s[i + 2]) == 0x98 ||
                static_cast<unsigned char>(s[i + 2]) == 0x99)) {
      out += '\'';
      i += 2;
    } else {
      out += s[i];
    }
  }
  return out;
}

std::string canonical_label(std::string_view raw, const std::vector<std::string>& labels) {
  auto wanted = str::lower(str::trim(raw));
  for (const auto& l : labels)
    if (str::lower(l) == wanted) return l;
  return {};
}

std::string strip_phrase(std::string_view s) {
  auto is_junk = [](char c) {
    return std::isspace(static_cast<unsigned char>(c)) || c == '\'' || c == '"' || c == '[' ||
           c == ']' || c == '.';
  };
  while (!s.empty() && is_junk(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_junk(s.back())) s.remove_suffix(1);
  return std::string(s);
}

std::string without_terminal_punct(std::string_view s) {
  s = str::trim(s);
  while (!s.empty() && (s.back() == '.' || s.back() == '!' || s.back() == '?')) s.remove_suffix(1);
  return std::string(s);
}

const llm::ChatMessage* last_user(const llm::CompletionRequest& req) {
  for (auto it = req.messages.rbegin(); it != req.messages.rend(); ++it)
    if (it->role == llm::Role::User) return &*it;
  return nullptr;
}

std::string capture(const std::string& text, const std::regex& re, std::size_t group = 1) {
  std::smatch m;
  if (std::regex_search(text, m, re) && m.size() > group) return m[group].str();
  return {};
}

nlohmann::ordered_json verdict_json(const StageVerdict& v) {
  nlohmann::ordered_json j;
  j["status"] = std::string(to_string(v.status));
  j["reason"] = v.reason;
  return j;
}

}  // namespace

GenerationTask make_task(AnnotatedSentence original, std::string original_label,
                         std::string target_label, PatternAst pattern,
                         const SynonymLexicon& lexicon) {
  if (original_label == target_label)
    throw PreconditionViolation("original and target label are both '" + target_label + "'");
  auto spans = find_matches(pattern, original, lexicon);
  if (spans.empty())
    throw PreconditionViolation("pattern " + render_pattern(pattern) + " does not match '" +
                                original.raw + "'");
  GenerationTask task;
  task.matched_phrase = render_tokens(original.tokens, spans.front().start, spans.front().end);
  task.original = std::move(original);
  task.original_label = std::move(original_label);
  task.target_label = std::move(target_label);
  task.pattern = std::move(pattern);
  return task;
}

std::string_view to_string(Stage stage) {
  switch (stage) {
    case Stage::Heuristic:
      return "heuristic";
    case Stage::Symbolic:
      return "symbolic";
    case Stage::Discriminator:
      return "discriminator";
  }
  return "heuristic";
}

std::string_view to_string(StageStatus status) {
  switch (status) {
    case StageStatus::Pending:
      return "pending";
    case StageStatus::Passed:
      return "passed";
    case StageStatus::Failed:
      return "failed";
    case StageStatus::Skipped:
      return "skipped";
    case StageStatus::NotApplicable:
      return "not_applicable";
  }
  return "pending";
}

std::string_view to_string(GenerationMode mode) {
  return mode == GenerationMode::Vt ? "vt" : "no_vt";
}

StageStatus stage_status_from_string(std::string_view name) {
  for (auto s : {StageStatus::Pending, StageStatus::Passed, StageStatus::Failed,
                 StageStatus::Skipped, StageStatus::NotApplicable})
    if (to_string(s) == name) return s;
  throw DataError("unknown stage status '" + std::string(name) + "'");
}

void CounterfactualCandidate::set_verdict(Stage s, StageVerdict v) {
  if (v.status == StageStatus::Passed) {
    for (std::size_t i = 0; i < static_cast<std::size_t>(s); ++i)
      if (verdicts[i].status == StageStatus::Failed)
        throw PreconditionViolation(std::string(to_string(s)) + " cannot pass after " +
                                    std::string(to_string(static_cast<Stage>(i))) + " failed");
  }
  verdicts[static_cast<std::size_t>(s)] = std::move(v);
}

nlohmann::ordered_json to_json(const CounterfactualCandidate& c) {
  nlohmann::ordered_json j;
  j["id"] = c.id;
  j["mode"] = std::string(to_string(c.mode));
  j["original"] = nlohmann::ordered_json::parse(to_jsonl(c.task.original));
  j["original_label"] = c.task.original_label;
  j["target_label"] = c.task.target_label;
  j["pattern"] = c.has_pattern() ? render_pattern(c.task.pattern) : std::string();
  j["matched_phrase"] = c.task.matched_phrase;
  j["phrases"] = c.phrases;
  j["generated_text"] = c.generated_text;
  j["used_phrase"] = c.used_phrase ? nlohmann::ordered_json(*c.used_phrase) : nullptr;
  j["finish_reason"] = std::string(llm::to_string(c.finish_reason));
  for (auto s : {Stage::Heuristic, Stage::Symbolic, Stage::Discriminator})
    j[std::string(to_string(s))] = verdict_json(c.verdict(s));
  j["discriminator_label"] =
      c.discriminator_label ? nlohmann::ordered_json(*c.discriminator_label) : nullptr;
  return j;
}

CounterfactualCandidate candidate_from_json(const nlohmann::json& j) {
  CounterfactualCandidate c;
  c.id = j.at("id").get<std::string>();
  c.mode = j.at("mode").get<std::string>() == "no_vt" ? GenerationMode::NoVt : GenerationMode::Vt;
  const auto& o = j.at("original");
  c.task.original.id = o.at("id").get<std::string>();
  c.task.original.raw = o.at("raw").get<std::string>();
  for (const auto& t : o.at("tokens")) {
    Token tok;
    tok.surface = t.at("surface").get<std::string>();
    tok.lemma = t.at("lemma").get<std::string>();
    tok.pos = pos_from_string(t.at("pos").get<std::string>()).value_or(Pos::Other);
    if (auto it = t.find("entity"); it != t.end() && !it->is_null()) tok.entity = it->get<std::string>();
    c.task.original.tokens.push_back(std::move(tok));
  }
  c.task.original_label = j.at("original_label").get<std::string>();
  c.task.target_label = j.at("target_label").get<std::string>();
  if (auto p = j.at("pattern").get<std::string>(); !p.empty()) c.task.pattern = parse_pattern(p);
  c.task.matched_phrase = j.value("matched_phrase", "");
  c.phrases = j.value("phrases", std::vector<std::string>{});
  c.generated_text = j.at("generated_text").get<std::string>();
  if (const auto& u = j.at("used_phrase"); !u.is_null()) c.used_phrase = u.get<std::string>();
  c.finish_reason = llm::finish_reason_from_string(j.value("finish_reason", "stop"));
  for (auto s : {Stage::Heuristic, Stage::Symbolic, Stage::Discriminator}) {
    const auto key = std::string(to_string(s));
    if (!j.contains(key)) continue;
    const auto& v = j.at(key);
    c.verdicts[static_cast<std::size_t>(s)] = {
        stage_status_from_string(v.at("status").get<std::string>()),
        v.value("reason", "")};
  }
  if (auto it = j.find("discriminator_label"); it != j.end() && !it->is_null())
    c.discriminator_label = it->get<std::string>();
  return c;
}

// ---------------------------------------------------------------------------
// Multi-label separation

llm::CompletionRequest build_separator_request(const std::string& raw_text,
                                               const std::vector<PatternAst>& patterns,
                                               const std::vector<std::string>& labels) {
  std::vector<std::string> quoted;
  for (const auto& p : patterns) quoted.push_back("'" + render_pattern(p) + "'");
  llm::CompletionRequest req;
  req.messages = prompts::render(prompts::Template::Separator,
                                 {{"text", raw_text},
                                  {"pattern", "[" + str::join(quoted, ", ") + "]"},
                                  {"label", str::join(labels, ", ")}});
  req.temperature = 0.0;
  req.max_tokens = kSeparatorMaxTokens;
  return req;
}

std::vector<SeparatedPart> parse_separator_response(const std::string& response,
                                                    const std::vector<std::string>& labels) {
  const auto s = normalize_quotes(str::trim(response));
  if (s.size() < 2 || s.front() != '\'')
    throw ResponseFormatError("separator response does not start with a quoted field");

  std::vector<std::vector<std::string>> records(1);
  std::string field;
  bool closed = false;
  std::size_t i = 1;
  while (i < s.size()) {
    if (s[i] == '\'') {
      std::size_t j = i + 1;
      while (j < s.size() && std::isspace(static_cast<unsigned char>(s[j]))) ++j;
      if (j == s.size() || ((s[j] == ';' || s[j] == '.') && str::is_blank(std::string_view(s).substr(j + 1)))) {
        records.back().push_back(field);
        closed = true;
        break;
      }
      if (s[j] == '+' || s[j] == ';') {
        std::size_t k = j + 1;
        while (k < s.size() && std::isspace(static_cast<unsigned char>(s[k]))) ++k;
        if (k < s.size() && s[k] == '\'') {
          records.back().push_back(field);
          field.clear();
          if (s[j] == ';') records.emplace_back();
          i = k + 1;
          continue;
        }
      }
    }
    field += s[i++];
  }
  if (!closed) throw ResponseFormatError("separator response has an unterminated field");

  std::vector<SeparatedPart> parts;
  for (const auto& rec : records) {
    if (rec.size() != 3)
      throw ResponseFormatError("expected 'text' + 'pattern' + 'label', got " +
                                std::to_string(rec.size()) + " fields");
    SeparatedPart part;
    part.text = rec[0];
    if (!str::is_blank(rec[1])) {
      try {
        part.pattern = parse_pattern(rec[1]);
      } catch (const SyntaxError& e) {
        throw ResponseFormatError("invalid pattern '" + rec[1] + "': " + e.what());
      }
    }
    part.label = canonical_label(rec[2], labels);
    if (part.label.empty()) throw LabelMismatch("label '" + rec[2] + "' is not one of the inputs");
    parts.push_back(std::move(part));
  }
  return parts;
}

std::vector<SeparatedPart> separate_multilabel(const std::string& raw_text,
                                               const std::vector<PatternAst>& patterns,
                                               const std::vector<std::string>& labels,
                                               llm::Gateway& gateway) {
  if (labels.empty()) throw PreconditionViolation("separate_multilabel needs at least one label");
  auto resp = gateway.complete(build_separator_request(raw_text, patterns, labels));
  return parse_separator_response(resp.text, labels);
}

// ---------------------------------------------------------------------------
// Candidate phrases

llm::CompletionRequest build_phrase_request(const GenerationTask& task,
                                            const SynonymLexicon& lexicon) {
  llm::CompletionRequest req;
  req.messages = prompts::render(prompts::Template::Phrases,
                                 {{"matched_phrase", task.matched_phrase},
                                  {"pattern", render_pattern(task.pattern)},
                                  {"label", task.original_label},
                                  {"target_label", task.target_label}});
  std::set<std::string> soft;
  for (const auto& seq : task.pattern.alternatives)
    for (const auto& a : seq)
      if (a.kind == AtomKind::Soft) soft.insert(a.value);
  for (const auto& word : soft) {
    auto syns = lexicon.synonyms_of(word);
    std::vector<std::string> words(syns.begin(), syns.end());
    auto extra = prompts::render(prompts::Template::SoftMatch,
                                 {{"match", word}, {"soft-match_words", str::join(words, ", ")}});
    req.messages.insert(req.messages.end(), extra.begin(), extra.end());
  }
  req.temperature = 0.0;
  req.max_tokens = kGenerationMaxTokens;
  return req;
}

CandidatePhrases generate_candidate_phrases(const GenerationTask& task,
                                            const SynonymLexicon& lexicon,
                                            const AnnotationProvider& provider,
                                            llm::Gateway& gateway) {
  auto resp = gateway.complete(build_phrase_request(task, lexicon));
  CandidatePhrases out{task, {}};
  std::set<std::string> seen;
  for (const auto& piece : str::split(resp.text, ',')) {
    auto phrase = strip_phrase(piece);
    if (phrase.empty() || !seen.insert(str::lower(phrase)).second) continue;
    auto annotated = annotate(phrase, provider);
    if (match_sentence(task.pattern, annotated, lexicon)) {
      out.phrases.push_back(std::move(phrase));
    } else {
      log::warn("phrase '" + phrase + "' does not match " + render_pattern(task.pattern) +
                "; dropped");
    }
  }
  if (out.phrases.empty())
    throw NoValidPhrases("no generated phrase matches " + render_pattern(task.pattern));
  return out;
}

// ---------------------------------------------------------------------------
// Counterfactual generation

std::string format_phrase_list(const std::vector<std::string>& phrases) {
  std::vector<std::string> quoted;
  for (const auto& p : phrases) quoted.push_back("'" + p + "'");
  return "[" + str::join(quoted, ", ") + "]";
}

llm::CompletionRequest build_counterfactual_request(const GenerationTask& task,
                                                    const std::vector<std::string>& phrases) {
  llm::CompletionRequest req;
  req.messages = prompts::render(prompts::Template::Counterfactual,
                                 {{"text", task.original.raw},
                                  {"label", task.original_label},
                                  {"target_label", task.target_label},
                                  {"generated_phrases", format_phrase_list(phrases)}});
  req.temperature = 0.0;
  req.max_tokens = kGenerationMaxTokens;
  return req;
}

CounterfactualCandidate generate_counterfactual(const GenerationTask& task,
                                                const CandidatePhrases& phrases,
                                                llm::Gateway& gateway) {
  if (phrases.phrases.empty()) throw PreconditionViolation("no candidate phrases");
  auto resp = gateway.complete(build_counterfactual_request(task, phrases.phrases));
  CounterfactualCandidate c;
  c.id = "vt:" + task.original.id + ":" + task.target_label;
  c.mode = GenerationMode::Vt;
  c.task = task;
  c.phrases = phrases.phrases;
  c.generated_text = std::string(str::trim(resp.text));
  c.finish_reason = resp.finish_reason;
  for (const auto& p : phrases.phrases) {
    if (str::icontains(c.generated_text, p)) {
      c.used_phrase = p;
      break;
    }
  }
  return c;
}

llm::CompletionRequest build_no_vt_request(const AnnotatedSentence& original,
                                           const std::string& original_label,
                                           const std::string& target_label) {
  llm::CompletionRequest req;
  req.messages = prompts::render(prompts::Template::NoVt, {{"text", original.raw},
                                                           {"label", original_label},
                                                           {"target_label", target_label}});
  req.temperature = 0.0;
  req.max_tokens = kGenerationMaxTokens;
  return req;
}

CounterfactualCandidate generate_without_vt(const AnnotatedSentence& original,
                                            const std::string& original_label,
                                            const std::string& target_label,
                                            llm::Gateway& gateway) {
  if (original_label == target_label)
    throw PreconditionViolation("original and target label are both '" + target_label + "'");
  auto resp = gateway.complete(build_no_vt_request(original, original_label, target_label));
  CounterfactualCandidate c;
  c.id = "no_vt:" + original.id + ":" + target_label;
  c.mode = GenerationMode::NoVt;
  c.task.original = original;
  c.task.original_label = original_label;
  c.task.target_label = target_label;
  c.generated_text = std::string(str::trim(resp.text));
  c.finish_reason = resp.finish_reason;
  c.set_verdict(Stage::Symbolic, {StageStatus::NotApplicable, "no pattern in no-VT mode"});
  return c;
}

// ---------------------------------------------------------------------------
// Target planning

std::vector<std::string> plan_targets(const LabeledExample& example,
                                      const std::vector<std::string>& label_set,
                                      const TargetPolicy& policy) {
  if (label_set.size() < 2) throw PreconditionViolation("need at least two labels");
  std::vector<std::string> others;
  for (const auto& l : label_set)
    if (l != example.label) others.push_back(l);

  auto kind = policy.kind;
  auto k = static_cast<std::size_t>(std::max(policy.k, 0));
  if (kind == TargetPolicy::Kind::Default) {
    kind = label_set.size() <= 6 ? TargetPolicy::Kind::AllOthers : TargetPolicy::Kind::Random;
    k = 3;
  }
  switch (kind) {
    case TargetPolicy::Kind::AllOthers:
    case TargetPolicy::Kind::Default:
      return others;
    case TargetPolicy::Kind::RoundRobin: {
      auto it = std::find(label_set.begin(), label_set.end(), example.label);
      std::size_t start = it == label_set.end() ? 0 : static_cast<std::size_t>(it - label_set.begin());
      std::vector<std::string> out;
      for (std::size_t step = 1; step < label_set.size() && out.size() < k; ++step)
        out.push_back(label_set[(start + step) % label_set.size()]);
      return out;
    }
    case TargetPolicy::Kind::Random: {
      std::mt19937_64 rng(policy.seed ^ str::fnv1a(example.sentence.id));
      std::shuffle(others.begin(), others.end(), rng);
      if (others.size() > k) others.resize(k);
      return others;
    }
  }
  return others;
}

// ---------------------------------------------------------------------------
// Template mock

llm::CompletionResponse template_response(const llm::CompletionRequest& req) {
  const auto* user = last_user(req);
  const std::string system =
      !req.messages.empty() && req.messages.front().role == llm::Role::System
          ? req.messages.front().content
          : std::string();
  if (!user) return {"", llm::FinishReason::Stop, false};
  const auto& u = user->content;

  if (system.find("separate the given multi-labeled") != std::string::npos) {
    static const std::regex re(R"(Conversation: (.*) Pattern: \[.*\] Label: (.*)$)");
    auto text = capture(u, re, 1);
    auto labels = str::split(capture(u, re, 2), ',');
    for (auto& l : labels) l = std::string(str::trim(l));
    auto pieces = str::split(text, ',');
    std::vector<std::string> records;
    for (std::size_t i = 0; i < labels.size() && i < pieces.size(); ++i) {
      std::string chunk = pieces[i];
      if (i + 1 == labels.size())
        for (std::size_t k = i + 1; k < pieces.size(); ++k) chunk += "," + pieces[k];
      records.push_back("'" + std::string(str::trim(chunk)) + "' + '' + '" + labels[i] + "'");
    }
    return {str::join(records, "; "), llm::FinishReason::Stop, false};
  }
  if (system.find("list of phrases") != std::string::npos) {
    static const std::regex re(R"(text: (.*), pattern: )");
    for (const auto& m : req.messages) {
      auto phrase = capture(m.content, re);
      if (!phrase.empty()) return {phrase, llm::FinishReason::Stop, false};
    }
    return {"", llm::FinishReason::Stop, false};
  }
  if (system.find("counterfactual example") != std::string::npos) {
    static const std::regex re(R"(original text:(.*), original label:(.*), modified label:(.*), generated phrases:)");
    std::smatch m;
    if (std::regex_search(u, m, re))
      return {without_terminal_punct(m[1].str()) + " and it is all about " + m[3].str() + ".",
              llm::FinishReason::Stop, false};
    return {"cannot generate counterfactual", llm::FinishReason::Stop, false};
  }
  if (system.find("different label") != std::string::npos) {
    static const std::regex re(R"(original text:(.*), original label:(.*), modified label:(.*), modified text:)");
    std::smatch m;
    if (std::regex_search(u, m, re))
      return {without_terminal_punct(m[1].str()) + " but really about " + m[3].str() + ".",
              llm::FinishReason::Stop, false};
    return {"cannot generate counterfactual", llm::FinishReason::Stop, false};
  }
  if (system.find("exactly one label") != std::string::npos) {
    static const std::regex re(R"(text: ([\s\S]*)\nlabels: (.*)\n)");
    std::smatch m;
    if (!std::regex_search(u, m, re)) return {"", llm::FinishReason::Stop, false};
    auto text = str::lower(m[1].str());
    auto labels = str::split(m[2].str(), ',');
    std::string best;
    std::size_t best_pos = 0;
    for (auto& l : labels) {
      auto name = std::string(str::trim(l));
      auto pos = text.rfind(str::lower(name));
      if (pos != std::string::npos && (best.empty() || pos >= best_pos)) {
        best = name;
        best_pos = pos;
      }
    }
    if (best.empty() && !labels.empty()) best = std::string(str::trim(labels.front()));
    return {best, llm::FinishReason::Stop, false};
  }
  return {"", llm::FinishReason::Stop, false};
}

}  // namespace patvar
