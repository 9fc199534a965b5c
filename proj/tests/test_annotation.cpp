#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "patvar/annotation.hpp"
#include "patvar/error.hpp"
#include "patvar/log.hpp"

using namespace patvar;

namespace {

// Independent splitter: walk characters, cut on whitespace, then peel
// punctuation off the end of each word one character at a time.
std::vector<std::string> reference_tokenize(const std::string& raw) {
  auto is_punct = [](char c) {
    return c == '.' || c == ',' || c == '!' || c == '?' || c == ';' || c == ':';
  };
  std::vector<std::string> out;
  std::string word;
  auto flush = [&] {
    if (word.empty()) return;
    std::size_t cut = word.size();
    while (cut > 0 && is_punct(word[cut - 1])) --cut;
    if (cut > 0) out.push_back(word.substr(0, cut));
    for (std::size_t i = cut; i < word.size(); ++i) out.push_back(std::string(1, word[i]));
    word.clear();
  };
  for (char c : raw) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f') {
      flush();
    } else {
      word += c;
    }
  }
  flush();
  return out;
}

std::filesystem::path temp_file(const std::string& name, const std::string& body) {
  auto dir = std::filesystem::temp_directory_path() / "patvar_test_annotation";
  std::filesystem::create_directories(dir);
  auto p = dir / name;
  std::ofstream(p) << body;
  return p;
}

std::vector<Pos> tags(const AnnotatedSentence& s) {
  std::vector<Pos> out;
  for (const auto& t : s.tokens) out.push_back(t.pos);
  return out;
}

}  // namespace

TEST_CASE("tokenize examples") {
  CHECK(tokenize("The food was amazing.") ==
        std::vector<std::string>{"The", "food", "was", "amazing", "."});
  CHECK(tokenize("").empty());
  CHECK(tokenize("cheap, tasty!") == std::vector<std::string>{"cheap", ",", "tasty", "!"});
  CHECK(tokenize("cheap, tasty!") == reference_tokenize("cheap, tasty!"));
}

TEST_CASE("tokenize agrees with the character-level reference on random strings") {
  const std::string alphabet = "ab .,!?;:\t\nX1'";
  std::mt19937 rng(7);
  for (int i = 0; i < 2000; ++i) {
    std::string s;
    const int len = static_cast<int>(rng() % 20);
    for (int k = 0; k < len; ++k) s += alphabet[rng() % alphabet.size()];
    auto toks = tokenize(s);
    CHECK(toks == reference_tokenize(s));
    for (const auto& t : toks) CHECK_FALSE(t.empty());
  }
}

TEST_CASE("fixture provider tags the running example") {
  FixtureProvider p;
  auto s = annotate("The food was amazing.", p);
  CHECK(tags(s) == std::vector<Pos>{Pos::Other, Pos::Noun, Pos::Aux, Pos::Adj, Pos::Other});
  CHECK(s.tokens[2].lemma == "be");
  CHECK(s.tokens[1].lemma == "food");
}

TEST_CASE("fixture provider: empty text") {
  FixtureProvider p;
  auto s = annotate("", p);
  CHECK(s.tokens.empty());
}

TEST_CASE("fixture provider: DATE entity on next monday") {
  FixtureProvider p;
  auto s = annotate("see you next monday", p);
  REQUIRE(s.tokens.size() == 4);
  CHECK(s.tokens[2].entity == std::optional<std::string>("DATE"));
  CHECK(s.tokens[3].entity == std::optional<std::string>("DATE"));
  CHECK_FALSE(s.tokens[0].entity.has_value());
}

TEST_CASE("fixture provider: multi-token location and numbers") {
  FixtureProvider p;
  auto s = annotate("Find me a train ticket to new york city", p);
  CHECK(s.tokens[6].entity == std::optional<std::string>("LOCATION"));
  CHECK(s.tokens[8].entity == std::optional<std::string>("LOCATION"));
  auto n = annotate("see 5 stars", p);
  CHECK(n.tokens[1].pos == Pos::Num);
  CHECK(n.tokens[2].lemma == "star");
}

TEST_CASE("fixture lemmatizer: irregulars and suffixes") {
  FixtureProvider p;
  CHECK(p.lemmatize("was") == "be");
  CHECK(p.lemmatize("has") == "have");
  CHECK(p.lemmatize("had") == "have");
  CHECK(p.lemmatize("prices") == "price");
  CHECK(p.lemmatize("played") == "play");
  CHECK(p.lemmatize("playing") == "play");
  CHECK(p.lemmatize("Songs") == "song");
  CHECK(p.lemmatize("zzzs") == "zzzs");
}

TEST_CASE("annotation is deterministic") {
  FixtureProvider p;
  const std::string raw = "Play me a song called New York City by Taylor Swift.";
  auto a = annotate(raw, p);
  CHECK(a == annotate(raw, p));
  CHECK(a == annotate(a.raw, p));
}

TEST_CASE("synonyms: fixture sets, unknowns, symmetry") {
  auto lex = SynonymLexicon::fixture();
  CHECK(synonyms_of("pricey", lex) == std::set<std::string>{"pricey", "expensive", "costly"});
  CHECK(synonyms_of("zzz", lex) == std::set<std::string>{"zzz"});
  CHECK(synonyms_of("expensive", lex).count("pricey") == 1);
}

TEST_CASE("synonym relation is symmetric and reflexive over the fixture") {
  auto lex = SynonymLexicon::fixture();
  std::vector<std::string> words = {"pricey", "cheap", "amazing", "great", "good", "food",
                                    "staff", "song", "pay", "sale", "environment", "affordable"};
  for (const auto& a : words) {
    CHECK(synonyms_of(a, lex).count(a) == 1);
    for (const auto& b : synonyms_of(a, lex)) CHECK(synonyms_of(b, lex).count(a) == 1);
  }
}

TEST_CASE("lexicon file: load, comments, symmetric closure") {
  auto path = temp_file("lex.tsv", "# comment\n\nhappy\tglad,joyful\nsad\tunhappy\n");
  auto lex = SynonymLexicon::load(path);
  CHECK(lex.related("glad", "happy"));
  CHECK(lex.related("happy", "joyful"));
  CHECK(lex.synonyms_of("unhappy").count("sad") == 1);
}

TEST_CASE("lexicon file: malformed line") {
  auto path = temp_file("bad_lex.tsv", "happy glad\n");
  CHECK_THROWS_AS(SynonymLexicon::load(path), ParseError);
}

TEST_CASE("annotations file: two records") {
  auto path = temp_file(
      "two.jsonl",
      R"({"id":"a","raw":"Good food.","tokens":[{"surface":"Good","lemma":"good","pos":"ADJ"},{"surface":"food","lemma":"food","pos":"NOUN"},{"surface":".","lemma":".","pos":"PUNCT"}]})"
      "\n"
      R"({"id":"b","raw":"next monday","tokens":[{"surface":"next","lemma":"next","pos":"ADJ","entity":"DATE"},{"surface":"monday","lemma":"monday","pos":"PROPN","entity":"date"}]})"
      "\n");
  std::vector<std::string> warnings;
  log::ScopedSink sink([&](const std::string& m) { warnings.push_back(m); });
  auto sents = load_annotations_file(path);
  REQUIRE(sents.size() == 2);
  CHECK(sents[0].id == "a");
  CHECK(sents[0].tokens[2].pos == Pos::Other);
  CHECK(warnings.size() == 1);
  CHECK(sents[1].tokens[1].entity == std::optional<std::string>("DATE"));
}

TEST_CASE("annotations file: unknown POS maps to OTHER with a warning") {
  auto path = temp_file(
      "xyz.jsonl",
      R"({"id":"x","raw":"hi","tokens":[{"surface":"hi","lemma":"hi","pos":"XYZ"}]})"
      "\n");
  std::vector<std::string> warnings;
  log::ScopedSink sink([&](const std::string& m) { warnings.push_back(m); });
  auto sents = load_annotations_file(path);
  CHECK(sents[0].tokens[0].pos == Pos::Other);
  CHECK_FALSE(warnings.empty());
}

TEST_CASE("annotations file: surfaces that do not rebuild raw") {
  auto path = temp_file(
      "mismatch.jsonl",
      R"({"id":"m1","raw":"Good food.","tokens":[{"surface":"Bad","lemma":"bad","pos":"ADJ"}]})"
      "\n");
  try {
    load_annotations_file(path);
    FAIL("expected InvariantViolation");
  } catch (const InvariantViolation& e) {
    CHECK(e.record_id() == "m1");
  }
}

TEST_CASE("annotations file: broken JSON reports the line") {
  auto path = temp_file("broken.jsonl",
                        R"({"id":"a","raw":"hi","tokens":[{"surface":"hi","lemma":"hi","pos":"X"}]})"
                        "\n{not json\n");
  try {
    load_annotations_file(path);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
}

TEST_CASE("jsonl round trip") {
  FixtureProvider p;
  auto s = annotate("see you next monday in houston.", p);
  s.id = "rt";
  auto path = temp_file("rt.jsonl", to_jsonl(s) + "\n");
  auto back = load_annotations_file(path);
  REQUIRE(back.size() == 1);
  CHECK(back[0] == s);
}

TEST_CASE("validate rejects empty lemma on alphanumeric token") {
  AnnotatedSentence s{"v", "hi", {Token{"hi", "", Pos::Other, std::nullopt}}};
  CHECK_THROWS_AS(validate(s), InvariantViolation);
}

TEST_CASE("render_tokens keeps punctuation attached") {
  FixtureProvider p;
  auto s = annotate("cheap, tasty food!", p);
  CHECK(render_tokens(s.tokens, 0, s.tokens.size()) == "cheap, tasty food!");
  CHECK(render_tokens(s.tokens, 2, 4) == "tasty food");
}
