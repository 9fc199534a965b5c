#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace patvar {

/// The eight part-of-speech tags the pattern language can name, plus a
/// catch-all for everything else an external tagger may produce.
enum class Pos { Verb, Propn, Noun, Adj, Adv, Aux, Pron, Num, Other };

std::string_view to_string(Pos pos);

/// Maps a tag name to a Pos. Anything outside the eight tags (including
/// lowercase spellings) yields std::nullopt.
std::optional<Pos> pos_from_string(std::string_view name);

struct Token {
  std::string surface;
  std::string lemma;
  Pos pos = Pos::Other;
  std::optional<std::string> entity;

  bool operator==(const Token&) const = default;
};

struct AnnotatedSentence {
  std::string id;
  std::string raw;
  std::vector<Token> tokens;

  bool operator==(const AnnotatedSentence&) const = default;
};

/// Throws InvariantViolation when the sentence breaks the token invariants
/// (empty token, missing lemma, surfaces that do not rebuild the raw text).
void validate(const AnnotatedSentence& sentence);

/// Symmetric synonym relation over lowercase lemmas.
class SynonymLexicon {
 public:
  SynonymLexicon() = default;

  /// Adds `lemma ~ syn` for every syn, plus the reverse edges.
  void add(std::string_view lemma, const std::vector<std::string>& synonyms);

  /// Makes every member of the group a synonym of every other member.
  void add_group(const std::vector<std::string>& group);

  /// The lemma's synonym set, always containing the lemma itself.
  std::set<std::string> synonyms_of(std::string_view lemma) const;

  bool contains(std::string_view lemma) const;
  bool related(std::string_view a, std::string_view b) const;
  std::size_t size() const { return entries_.size(); }

  /// Reads `lemma<TAB>syn1,syn2,...` lines. Blank lines and `#` comments
  /// are skipped.
  static SynonymLexicon load(const std::filesystem::path& path);

  /// Lexicon covering the running restaurant/assistant examples.
  static SynonymLexicon fixture();

 private:
  std::map<std::string, std::set<std::string>, std::less<>> entries_;
};

std::set<std::string> synonyms_of(std::string_view lemma, const SynonymLexicon& lexicon);

/// Splits on whitespace, then detaches trailing . , ! ? ; : characters into
/// their own tokens. Case is preserved.
std::vector<std::string> tokenize(std::string_view raw);

/// Turns raw text into an annotated sentence. Implementations must be
/// deterministic.
class AnnotationProvider {
 public:
  virtual ~AnnotationProvider() = default;
  virtual AnnotatedSentence annotate(std::string_view raw) const = 0;
};

/// Table-driven tagger over a hand-written lexicon; no statistical model.
class FixtureProvider final : public AnnotationProvider {
 public:
  FixtureProvider();
  AnnotatedSentence annotate(std::string_view raw) const override;

  std::string lemmatize(std::string_view word) const;

 private:
  Pos tag(std::string_view surface, std::string_view lemma, bool sentence_initial) const;

  std::unordered_map<std::string, Pos> pos_;
  std::unordered_map<std::string, std::string> irregular_;
  std::vector<std::pair<std::vector<std::string>, std::string>> entities_;
};

/// Serves annotations loaded from a file, keyed by raw text, and defers to a
/// fallback provider for texts it has never seen.
class LookupProvider final : public AnnotationProvider {
 public:
  LookupProvider(std::vector<AnnotatedSentence> sentences, const AnnotationProvider& fallback);
  AnnotatedSentence annotate(std::string_view raw) const override;

 private:
  std::unordered_map<std::string, AnnotatedSentence> by_raw_;
  const AnnotationProvider& fallback_;
};

/// Runs the provider and validates its output. Malformed output is reported
/// as ProviderFailure.
AnnotatedSentence annotate(std::string_view raw, const AnnotationProvider& provider);

/// Reads line-delimited JSON records {id, raw, tokens:[{surface, lemma, pos,
/// entity?}]}. Unknown POS tags degrade to OTHER with a warning.
std::vector<AnnotatedSentence> load_annotations_file(const std::filesystem::path& path);

/// Inverse of load_annotations_file for a single record (no trailing newline).
std::string to_jsonl(const AnnotatedSentence& sentence);

/// Surfaces joined with single spaces, without a space before punctuation.
std::string render_tokens(const std::vector<Token>& tokens, std::size_t begin, std::size_t end);

}  // namespace patvar
