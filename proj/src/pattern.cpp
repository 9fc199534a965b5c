#include "patvar/pattern.hpp"

#include <cctype>
#include <optional>

#include "patvar/error.hpp"
#include "patvar/strings.hpp"

namespace patvar {
namespace {

bool is_word_char(char c) {
  auto u = static_cast<unsigned char>(c);
  return std::isalnum(u) || c == '-' || c == '\'' || c == '_' || u >= 0x80;
}

bool is_tag_char(char c) {
  auto u = static_cast<unsigned char>(c);
  return std::isupper(u) || std::isdigit(u) || c == '_' || c == '-';
}

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  PatternAst parse() {
    PatternAst ast;
    skip_space();
    if (at_end()) fail(pos_, "empty pattern");
    for (;;) {
      ast.alternatives.push_back(sequence());
      skip_space();
      if (at_end()) break;
      if (peek() != '|') fail(pos_, std::string("unexpected '") + peek() + "'");
      ++pos_;
    }
    return ast;
  }

 private:
  Sequence sequence() {
    Sequence seq;
    for (;;) {
      skip_space();
      if (at_end() || peek() == '|') {
        fail(pos_, seq.empty() ? "empty alternation branch" : "empty atom after '+'");
      }
      Atom a = atom();
      if (!(a.is_wildcard() && !seq.empty() && seq.back().is_wildcard())) seq.push_back(std::move(a));
      skip_space();
      if (at_end() || peek() != '+') return seq;
      ++pos_;
    }
  }

  Atom atom() {
    const std::size_t start = pos_;
    char c = peek();
    if (c == '*') {
      ++pos_;
      return Atom::wildcard();
    }
    if (c == '[' || c == '(') {
      const char close = c == '[' ? ']' : ')';
      ++pos_;
      std::size_t word_start = pos_;
      while (!at_end() && is_word_char(peek())) ++pos_;
      if (at_end()) fail(start, std::string("unbalanced '") + c + "'");
      if (peek() != close) {
        if (std::isspace(static_cast<unsigned char>(peek())))
          fail(pos_, "lemma must be a single word");
        fail(pos_, std::string("expected '") + close + "'");
      }
      if (pos_ == word_start) fail(start, "empty atom");
      auto lemma = str::lower(text_.substr(word_start, pos_ - word_start));
      ++pos_;
      return c == '[' ? Atom::stem(std::move(lemma)) : Atom::soft(std::move(lemma));
    }
    if (c == '$') {
      ++pos_;
      std::size_t tag_start = pos_;
      while (!at_end() && is_tag_char(peek())) ++pos_;
      if (pos_ == tag_start) fail(start, "entity tag must be an uppercase identifier");
      if (!at_end() && is_word_char(peek())) fail(pos_, "entity tag must be an uppercase identifier");
      return Atom::entity(std::string(text_.substr(tag_start, pos_ - tag_start)));
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      while (!at_end() && is_word_char(peek())) ++pos_;
      auto name = text_.substr(start, pos_ - start);
      if (auto p = pos_from_string(name)) return Atom::pos_tag(*p);
      fail(start, "unknown POS tag '" + std::string(name) + "'");
    }
    if (c == ']' || c == ')') fail(start, std::string("unbalanced '") + c + "'");
    fail(start, std::string("unexpected '") + c + "'");
  }

  [[noreturn]] void fail(std::size_t at, const std::string& what) const {
    throw SyntaxError(at + 1, what);
  }

  void skip_space() {
    while (!at_end() && std::isspace(static_cast<unsigned char>(peek()))) ++pos_;
  }
  bool at_end() const { return pos_ >= text_.size(); }
  char peek() const { return text_[pos_]; }

  std::string_view text_;
  std::size_t pos_ = 0;
};

// Memoized suffix matcher: can atoms[a..] match starting at token t?
class SequenceMatcher {
 public:
  SequenceMatcher(const Sequence& seq, const AnnotatedSentence& s, const SynonymLexicon& lex)
      : seq_(seq), s_(s), lex_(lex),
        memo_((seq.size() + 1) * (s.tokens.size() + 1), -1) {}

  bool from(std::size_t a, std::size_t t) {
    if (a == seq_.size()) return true;
    auto& slot = memo_[a * (s_.tokens.size() + 1) + t];
    if (slot >= 0) return slot == 1;
    bool ok;
    if (seq_[a].is_wildcard()) {
      ok = from(a + 1, t) || (t < s_.tokens.size() && from(a, t + 1));
    } else {
      ok = t < s_.tokens.size() && atom_accepts(seq_[a], s_.tokens[t], lex_) && from(a + 1, t + 1);
    }
    slot = ok ? 1 : 0;
    return ok;
  }

  // Follows the memo table greedily, preferring the shortest wildcard binding
  // at each step; the resulting match ends as early as possible.
  std::optional<MatchSpan> shortest_from(std::size_t t0) {
    if (!from(0, t0)) return std::nullopt;
    MatchSpan span;
    span.start = t0;
    std::size_t t = t0;
    for (std::size_t a = 0; a < seq_.size(); ++a) {
      if (seq_[a].is_wildcard()) {
        std::size_t e = t;
        while (!from(a + 1, e)) ++e;
        span.bindings.emplace_back(t, e);
        t = e;
      } else {
        span.bindings.emplace_back(t, t + 1);
        ++t;
      }
    }
    span.end = t;
    return span;
  }

 private:
  const Sequence& seq_;
  const AnnotatedSentence& s_;
  const SynonymLexicon& lex_;
  std::vector<signed char> memo_;
};

bool brute_split(const Sequence& seq, std::size_t a, const AnnotatedSentence& s, std::size_t t,
                 std::size_t end, const SynonymLexicon& lex) {
  if (a == seq.size()) return t == end;
  if (seq[a].is_wildcard()) {
    for (std::size_t len = 0; t + len <= end; ++len)
      if (brute_split(seq, a + 1, s, t + len, end, lex)) return true;
    return false;
  }
  return t < end && atom_accepts(seq[a], s.tokens[t], lex) && brute_split(seq, a + 1, s, t + 1, end, lex);
}

}  // namespace

std::size_t PatternAst::atom_count() const {
  std::size_t n = 0;
  for (const auto& seq : alternatives) n += seq.size();
  return n;
}

PatternAst parse_pattern(std::string_view text) { return Parser(text).parse(); }

std::string render_atom(const Atom& atom) {
  switch (atom.kind) {
    case AtomKind::PosTag:
      return std::string(to_string(atom.pos));
    case AtomKind::Stem:
      return "[" + atom.value + "]";
    case AtomKind::Soft:
      return "(" + atom.value + ")";
    case AtomKind::Entity:
      return "$" + atom.value;
    case AtomKind::Wildcard:
      return "*";
  }
  return "*";
}

std::string render_sequence(const Sequence& sequence) {
  std::string out;
  for (std::size_t i = 0; i < sequence.size(); ++i) {
    if (i) out += '+';
    out += render_atom(sequence[i]);
  }
  return out;
}

std::string render_pattern(const PatternAst& pattern) {
  std::string out;
  for (std::size_t i = 0; i < pattern.alternatives.size(); ++i) {
    if (i) out += '|';
    out += render_sequence(pattern.alternatives[i]);
  }
  return out;
}

bool atom_accepts(const Atom& atom, const Token& token, const SynonymLexicon& lexicon) {
  switch (atom.kind) {
    case AtomKind::PosTag:
      return token.pos == atom.pos;
    case AtomKind::Stem:
      return str::lower(token.lemma) == atom.value;
    case AtomKind::Soft:
      return lexicon.related(atom.value, token.lemma);
    case AtomKind::Entity:
      return token.entity && *token.entity == atom.value;
    case AtomKind::Wildcard:
      return true;
  }
  return false;
}

bool match_sentence(const PatternAst& pattern, const AnnotatedSentence& sentence,
                    const SynonymLexicon& lexicon) {
  for (const auto& seq : pattern.alternatives) {
    SequenceMatcher m(seq, sentence, lexicon);
    for (std::size_t t = 0; t <= sentence.tokens.size(); ++t)
      if (m.from(0, t)) return true;
  }
  return false;
}

std::vector<MatchSpan> find_matches(const PatternAst& pattern, const AnnotatedSentence& sentence,
                                    const SynonymLexicon& lexicon) {
  const std::size_t n = sentence.tokens.size();
  std::vector<SequenceMatcher> matchers;
  matchers.reserve(pattern.alternatives.size());
  for (const auto& seq : pattern.alternatives) matchers.emplace_back(seq, sentence, lexicon);

  std::vector<MatchSpan> spans;
  std::optional<MatchSpan> first_empty;
  std::size_t t = 0;
  while (t <= n) {
    std::optional<MatchSpan> best;
    std::optional<MatchSpan> empty;
    for (std::size_t alt = 0; alt < matchers.size(); ++alt) {
      auto m = matchers[alt].shortest_from(t);
      if (!m) continue;
      m->alternative = alt;
      if (m->end == m->start) {
        if (!empty) empty = std::move(m);
        continue;
      }
      if (!best || m->end < best->end) best = std::move(m);
    }
    if (!best) {
      if (empty && !first_empty) first_empty = std::move(empty);
      ++t;
      continue;
    }
    t = best->end;
    spans.push_back(std::move(*best));
  }
  if (spans.empty() && first_empty) spans.push_back(std::move(*first_empty));
  return spans;
}

bool brute_force_match(const PatternAst& pattern, const AnnotatedSentence& sentence,
                       const SynonymLexicon& lexicon) {
  const std::size_t n = sentence.tokens.size();
  if (n > kBruteForceMaxTokens)
    throw InputTooLarge("sentence has " + std::to_string(n) + " tokens");
  for (const auto& seq : pattern.alternatives)
    if (seq.size() > kBruteForceMaxAtoms)
      throw InputTooLarge("sequence has " + std::to_string(seq.size()) + " atoms");
  for (const auto& seq : pattern.alternatives)
    for (std::size_t start = 0; start <= n; ++start)
      for (std::size_t end = start; end <= n; ++end)
        if (brute_split(seq, 0, sentence, start, end, lexicon)) return true;
  return false;
}

}  // namespace patvar
