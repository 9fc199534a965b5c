#include <doctest.h>

#include <random>

#include "patvar/annotation.hpp"
#include "patvar/error.hpp"
#include "patvar/pattern.hpp"

using namespace patvar;

namespace {

const FixtureProvider& provider() {
  static const FixtureProvider p;
  return p;
}

const SynonymLexicon& lexicon() {
  static const SynonymLexicon lex = SynonymLexicon::fixture();
  return lex;
}

bool matches(const std::string& pattern, const std::string& text) {
  return match_sentence(parse_pattern(pattern), annotate(text, provider()), lexicon());
}

// Anchored check written against the atom semantics alone: does `seq`
// consume exactly tokens [t, end)?
bool anchored(const Sequence& seq, std::size_t a, const AnnotatedSentence& s, std::size_t t,
              std::size_t end) {
  if (a == seq.size()) return t == end;
  if (seq[a].is_wildcard()) {
    for (std::size_t k = t; k <= end; ++k)
      if (anchored(seq, a + 1, s, k, end)) return true;
    return false;
  }
  return t < end && atom_accepts(seq[a], s.tokens[t], lexicon()) && anchored(seq, a + 1, s, t + 1, end);
}

std::string random_atom(std::mt19937& rng) {
  static const std::vector<std::string> atoms = {
      "NOUN", "ADJ", "VERB", "AUX", "PRON", "ADV", "[food]", "[be]", "[price]", "(cheap)",
      "(amazing)", "(food)", "$DATE", "$LOCATION", "*", "[the]", "NUM"};
  return atoms[rng() % atoms.size()];
}

std::string random_pattern(std::mt19937& rng) {
  std::string out;
  const int alts = 1 + static_cast<int>(rng() % 2);
  for (int a = 0; a < alts; ++a) {
    if (a) out += " | ";
    const int len = 1 + static_cast<int>(rng() % 4);
    for (int i = 0; i < len; ++i) {
      if (i) out += "+";
      out += random_atom(rng);
    }
  }
  return out;
}

std::string random_sentence(std::mt19937& rng) {
  static const std::vector<std::string> words = {
      "the", "food", "was", "amazing", "cheap", "prices", "is", "great", "I", "paid", "5",
      "next", "monday", "in", "houston", "very", "good", "meal", "tasty", "staff", "affordable"};
  std::string out;
  const int len = static_cast<int>(rng() % 11);
  for (int i = 0; i < len; ++i) {
    if (i) out += ' ';
    out += words[rng() % words.size()];
  }
  if (len > 0 && rng() % 2) out += '.';
  return out;
}

}  // namespace

TEST_CASE("parse and render canonical forms") {
  CHECK(render_pattern(parse_pattern("NOUN + [be] + ADJ")) == "NOUN+[be]+ADJ");
  CHECK(render_pattern(parse_pattern("(customer)+*+[service]")) == "(customer)+*+[service]");
  CHECK(render_pattern(parse_pattern("(pay) | (sale)")) == "(pay)|(sale)");
  CHECK(render_pattern(parse_pattern("[Food]")) == "[food]");
  CHECK(render_pattern(parse_pattern("* + * + NOUN")) == "*+NOUN");
  CHECK(render_pattern(parse_pattern("$DATE")) == "$DATE");
}

TEST_CASE("parse structure") {
  auto p = parse_pattern("NOUN+[be]+ADJ|(pay)");
  REQUIRE(p.alternatives.size() == 2);
  CHECK(p.alternatives[0] ==
        Sequence{Atom::pos_tag(Pos::Noun), Atom::stem("be"), Atom::pos_tag(Pos::Adj)});
  CHECK(p.alternatives[1] == Sequence{Atom::soft("pay")});
  CHECK(p.atom_count() == 4);
}

TEST_CASE("syntax errors carry the column") {
  auto column_of = [](const std::string& text) -> std::size_t {
    try {
      parse_pattern(text);
    } catch (const SyntaxError& e) {
      return e.column();
    }
    return 0;
  };
  CHECK(column_of("[food") == 1);
  CHECK(column_of("") == 1);
  CHECK(column_of("NOUN+") == 6);
  CHECK(column_of("NOUN|") == 6);
  CHECK(column_of("NOUNS") == 1);
  CHECK(column_of("NOUN+[two words]") == 10);
  CHECK(column_of("[]") == 1);
  CHECK(column_of("NOUN ADJ") == 6);
  CHECK(column_of("$date") == 1);
  CHECK(column_of("food]") == 1);
}

TEST_CASE("running example matches") {
  CHECK(matches("NOUN+[be]+ADJ", "The food was amazing."));
  CHECK(matches("[food]+*+(amazing)", "The food was really great."));
  CHECK_FALSE(matches("[food]+(amazing)", "The food was amazing."));
  CHECK(matches("(pay)|(sale)", "I spend a lot here."));
  CHECK(matches("$DATE", "see you next monday"));
  CHECK_FALSE(matches("$LOCATION", "see you next monday"));
}

TEST_CASE("find_matches: spans and bindings") {
  auto s = annotate("The food was amazing and the meal was great.", provider());
  auto spans = find_matches(parse_pattern("NOUN+[be]+ADJ"), s, lexicon());
  REQUIRE(spans.size() == 2);
  CHECK(spans[0].start == 1);
  CHECK(spans[0].end == 4);
  CHECK(spans[1].start == 6);
  CHECK(spans[1].end == 9);
  CHECK(spans[0].bindings == std::vector<std::pair<std::size_t, std::size_t>>{{1, 2}, {2, 3}, {3, 4}});
}

TEST_CASE("find_matches: shortest wildcard binding") {
  auto s = annotate("food was good and food was great", provider());
  auto spans = find_matches(parse_pattern("[food]+*+ADJ"), s, lexicon());
  REQUIRE(spans.size() == 2);
  CHECK(spans[0].start == 0);
  CHECK(spans[0].end == 3);
  CHECK(spans[0].bindings[1] == std::pair<std::size_t, std::size_t>{1, 2});
}

TEST_CASE("find_matches: a bare wildcard reports one empty span") {
  auto s = annotate("hello there", provider());
  auto spans = find_matches(parse_pattern("*"), s, lexicon());
  REQUIRE(spans.size() == 1);
  CHECK(spans[0].start == spans[0].end);
}

TEST_CASE("brute force rejects oversized inputs") {
  auto s = annotate("a b c d e f g h i j k l m", provider());
  CHECK_THROWS_AS(brute_force_match(parse_pattern("NOUN"), s, lexicon()), InputTooLarge);
  auto small = annotate("a b", provider());
  CHECK_THROWS_AS(brute_force_match(parse_pattern("*+NOUN+*+ADJ+*+VERB"), small, lexicon()),
                  InputTooLarge);
}

TEST_CASE("matcher agrees with brute force on random inputs") {
  std::mt19937 rng(2024);
  for (int i = 0; i < 3000; ++i) {
    auto pattern = parse_pattern(random_pattern(rng));
    auto s = annotate(random_sentence(rng), provider());
    const bool fast = match_sentence(pattern, s, lexicon());
    CHECK(fast == brute_force_match(pattern, s, lexicon()));
    auto spans = find_matches(pattern, s, lexicon());
    CHECK(fast == !spans.empty());
    std::size_t last_end = 0;
    for (const auto& span : spans) {
      CHECK(span.start >= last_end);
      CHECK(anchored(pattern.alternatives[span.alternative], 0, s, span.start, span.end));
      last_end = span.end;
    }
  }
}

TEST_CASE("properties: wildcard padding, alternation, containment") {
  std::mt19937 rng(99);
  for (int i = 0; i < 1000; ++i) {
    const auto text = random_pattern(rng);
    auto p = parse_pattern(text);
    auto q = parse_pattern(random_pattern(rng));
    auto s = annotate(random_sentence(rng), provider());
    const bool m = match_sentence(p, s, lexicon());

    // Unanchored matching makes leading and trailing wildcards redundant.
    if (p.alternatives.size() == 1) {
      auto padded = parse_pattern("*+" + text + "+*");
      CHECK(match_sentence(padded, s, lexicon()) == m);
    }

    // Alternation is a union.
    auto both = parse_pattern(render_pattern(p) + "|" + render_pattern(q));
    CHECK(match_sentence(both, s, lexicon()) == (m || match_sentence(q, s, lexicon())));

    // A sentence that contains a matching sentence as a prefix still matches.
    auto longer = annotate(s.raw + " and more words", provider());
    if (m && !s.raw.empty() && s.raw.back() != '.') CHECK(match_sentence(p, longer, lexicon()));
  }
}

TEST_CASE("render then parse is the identity on random patterns") {
  std::mt19937 rng(5);
  for (int i = 0; i < 1000; ++i) {
    auto p = parse_pattern(random_pattern(rng));
    CHECK(parse_pattern(render_pattern(p)) == p);
  }
}
