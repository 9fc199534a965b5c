#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "patvar/annotation.hpp"
#include "patvar/llm.hpp"
#include "patvar/pattern.hpp"
#include "patvar/synthesis.hpp"

namespace patvar {

inline constexpr int kSeparatorMaxTokens = 512;
inline constexpr int kGenerationMaxTokens = 256;

/// One counterfactual job: rewrite `original` toward `target_label` while
/// keeping `pattern`. `matched_phrase` is the text of the first span the
/// pattern matched in the original.
struct GenerationTask {
  AnnotatedSentence original;
  std::string original_label;
  std::string target_label;
  PatternAst pattern;
  std::string matched_phrase;
};

/// Builds a task, checking that the labels differ and the pattern matches.
/// Throws PreconditionViolation otherwise.
GenerationTask make_task(AnnotatedSentence original, std::string original_label,
                         std::string target_label, PatternAst pattern,
                         const SynonymLexicon& lexicon);

struct CandidatePhrases {
  GenerationTask task;
  std::vector<std::string> phrases;
};

enum class Stage { Heuristic = 0, Symbolic = 1, Discriminator = 2 };
enum class StageStatus { Pending, Passed, Failed, Skipped, NotApplicable };
enum class GenerationMode { Vt, NoVt };

std::string_view to_string(Stage stage);
std::string_view to_string(StageStatus status);
std::string_view to_string(GenerationMode mode);
StageStatus stage_status_from_string(std::string_view name);

struct StageVerdict {
  StageStatus status = StageStatus::Pending;
  std::string reason;

  static StageVerdict passed() { return {StageStatus::Passed, {}}; }
  static StageVerdict failed(std::string why) { return {StageStatus::Failed, std::move(why)}; }

  bool operator==(const StageVerdict&) const = default;
};

struct CounterfactualCandidate {
  std::string id;
  GenerationMode mode = GenerationMode::Vt;
  GenerationTask task;  // pattern is empty in NoVt mode
  std::vector<std::string> phrases;
  std::string generated_text;
  std::optional<std::string> used_phrase;
  llm::FinishReason finish_reason = llm::FinishReason::Stop;
  std::array<StageVerdict, 3> verdicts{};
  std::optional<std::string> discriminator_label;

  const StageVerdict& verdict(Stage s) const { return verdicts[static_cast<std::size_t>(s)]; }

  /// Records a stage outcome. Throws PreconditionViolation when an earlier
  /// stage has failed and this one would be marked passed.
  void set_verdict(Stage s, StageVerdict v);

  bool has_pattern() const { return !task.pattern.alternatives.empty(); }
};

/// Serialization used for candidates.jsonl (one record per line).
nlohmann::ordered_json to_json(const CounterfactualCandidate& c);
CounterfactualCandidate candidate_from_json(const nlohmann::json& j);

struct SeparatedPart {
  std::string text;
  std::optional<PatternAst> pattern;
  std::string label;

  bool operator==(const SeparatedPart&) const = default;
};

llm::CompletionRequest build_separator_request(const std::string& raw_text,
                                               const std::vector<PatternAst>& patterns,
                                               const std::vector<std::string>& labels);

/// Parses `'text' + 'pattern' + 'label'; ...`. Backticks and curly quotes
/// are read as plain single quotes.
std::vector<SeparatedPart> parse_separator_response(const std::string& response,
                                                    const std::vector<std::string>& labels);

/// Splits a multi-label sentence into single-label parts through the LLM.
std::vector<SeparatedPart> separate_multilabel(const std::string& raw_text,
                                               const std::vector<PatternAst>& patterns,
                                               const std::vector<std::string>& labels,
                                               llm::Gateway& gateway);

/// Candidate-phrase prompt. One soft-match constraint message is appended
/// per distinct soft atom in the pattern, listing its synonym set.
llm::CompletionRequest build_phrase_request(const GenerationTask& task,
                                            const SynonymLexicon& lexicon);

/// Asks for phrases, splits on commas and keeps only those the pattern
/// matches once annotated. Throws NoValidPhrases when none survive.
CandidatePhrases generate_candidate_phrases(const GenerationTask& task,
                                            const SynonymLexicon& lexicon,
                                            const AnnotationProvider& provider,
                                            llm::Gateway& gateway);

/// `['a', 'b']` as it appears in the generation prompt.
std::string format_phrase_list(const std::vector<std::string>& phrases);

llm::CompletionRequest build_counterfactual_request(const GenerationTask& task,
                                                    const std::vector<std::string>& phrases);

/// Generates one pattern-constrained counterfactual; all stages pending.
/// `used_phrase` is the first provided phrase found in the output
/// (case-insensitive substring).
CounterfactualCandidate generate_counterfactual(const GenerationTask& task,
                                                const CandidatePhrases& phrases,
                                                llm::Gateway& gateway);

llm::CompletionRequest build_no_vt_request(const AnnotatedSentence& original,
                                           const std::string& original_label,
                                           const std::string& target_label);

/// Baseline rewrite without patterns or phrases. The symbolic stage is
/// marked not-applicable.
CounterfactualCandidate generate_without_vt(const AnnotatedSentence& original,
                                            const std::string& original_label,
                                            const std::string& target_label,
                                            llm::Gateway& gateway);

struct TargetPolicy {
  enum class Kind { Default, AllOthers, RoundRobin, Random };
  Kind kind = Kind::Default;
  int k = 3;
  std::uint64_t seed = 0;
};

/// Target labels for one example. Default is every other label when there
/// are at most six labels, otherwise three drawn at random.
std::vector<std::string> plan_targets(const LabeledExample& example,
                                      const std::vector<std::string>& label_set,
                                      const TargetPolicy& policy);

/// Mock responder that answers each built-in prompt from fields it reads
/// back out of the prompt. Lets the whole pipeline run with no network.
llm::CompletionResponse template_response(const llm::CompletionRequest& req);

}  // namespace patvar
