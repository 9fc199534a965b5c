#pragma once

#include <compare>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "patvar/annotation.hpp"

namespace patvar {

enum class AtomKind { PosTag, Stem, Soft, Entity, Wildcard };

/// One element of a pattern sequence.
///
///   NOUN       part-of-speech tag
///   [word]     lemma equality
///   (word)     lemma within the synonym set of `word`
///   $TAG       token carrying the entity tag
///   *          zero or more tokens
struct Atom {
  AtomKind kind = AtomKind::Wildcard;
  Pos pos = Pos::Other;  // PosTag only
  std::string value;     // lemma for Stem/Soft, tag for Entity

  static Atom pos_tag(Pos p) { return {AtomKind::PosTag, p, {}}; }
  static Atom stem(std::string lemma) { return {AtomKind::Stem, Pos::Other, std::move(lemma)}; }
  static Atom soft(std::string lemma) { return {AtomKind::Soft, Pos::Other, std::move(lemma)}; }
  static Atom entity(std::string tag) { return {AtomKind::Entity, Pos::Other, std::move(tag)}; }
  static Atom wildcard() { return {}; }

  bool is_wildcard() const { return kind == AtomKind::Wildcard; }

  bool operator==(const Atom&) const = default;
  auto operator<=>(const Atom&) const = default;
};

using Sequence = std::vector<Atom>;

/// Flat alternation of sequences: `seq ('|' seq)*`, `seq := atom ('+' atom)*`.
struct PatternAst {
  std::vector<Sequence> alternatives;

  bool operator==(const PatternAst&) const = default;
  auto operator<=>(const PatternAst&) const = default;

  std::size_t atom_count() const;
};

/// A contiguous token span matched by one alternative. `bindings[i]` is the
/// [begin, end) token range bound to atom i of that alternative.
struct MatchSpan {
  std::size_t start = 0;
  std::size_t end = 0;
  std::size_t alternative = 0;
  std::vector<std::pair<std::size_t, std::size_t>> bindings;

  bool operator==(const MatchSpan&) const = default;
};

/// Parses pattern text. Whitespace around atoms and operators is ignored,
/// lemmas are lowercased, and runs of adjacent wildcards collapse to one.
/// Throws SyntaxError with the 1-based column of the offending character.
PatternAst parse_pattern(std::string_view text);

std::string render_atom(const Atom& atom);
std::string render_pattern(const PatternAst& pattern);
std::string render_sequence(const Sequence& sequence);

/// Whether a single non-wildcard atom accepts the token.
bool atom_accepts(const Atom& atom, const Token& token, const SynonymLexicon& lexicon);

/// True iff some alternative matches a contiguous span anywhere in the
/// sentence. `+` joins adjacent spans; only `*` absorbs gaps.
bool match_sentence(const PatternAst& pattern, const AnnotatedSentence& sentence,
                    const SynonymLexicon& lexicon);

/// Non-overlapping matches scanned left to right. At each start position the
/// earliest-ending match wins, with wildcards bound as short as possible
/// (leftmost first). Empty spans are only reported when nothing else
/// matches, and then once, at the first position that matches.
std::vector<MatchSpan> find_matches(const PatternAst& pattern, const AnnotatedSentence& sentence,
                                    const SynonymLexicon& lexicon);

/// Exhaustive reference matcher: tries every span and every split of it
/// among the atoms. Limited to sentences of at most 12 tokens and sequences
/// of at most 5 atoms (InputTooLarge otherwise).
bool brute_force_match(const PatternAst& pattern, const AnnotatedSentence& sentence,
                       const SynonymLexicon& lexicon);

inline constexpr std::size_t kBruteForceMaxTokens = 12;
inline constexpr std::size_t kBruteForceMaxAtoms = 5;

}  // namespace patvar
