#include <doctest.h>

#include <sstream>

#include "patvar/csv.hpp"
#include "patvar/digest.hpp"
#include "patvar/error.hpp"
#include "patvar/log.hpp"
#include "patvar/strings.hpp"

using namespace patvar;

TEST_CASE("fill replaces known slots and leaves others") {
  CHECK(str::fill("a {x} b {y} {x}", {{"x", "1"}}) == "a 1 b {y} 1");
  CHECK(str::fill("{soft-match_words}!", {{"soft-match_words", "a, b"}}) == "a, b!");
  CHECK(str::fill("no slots", {}) == "no slots");
}

TEST_CASE("fill does not rescan substituted text") {
  CHECK(str::fill("{a}", {{"a", "{b}"}, {"b", "x"}}) == "{b}");
}

TEST_CASE("trim split join") {
  CHECK(str::trim("  a b \n") == "a b");
  CHECK(str::split("a,,b", ',') == std::vector<std::string>{"a", "", "b"});
  CHECK(str::join({"a", "b", "c"}, ", ") == "a, b, c");
  CHECK(str::icontains("Modified Text: x", "modified text:"));
  CHECK_FALSE(str::icontains("abc", "abd"));
}

TEST_CASE("fnv1a reference values") {
  CHECK(str::fnv1a("") == 0xcbf29ce484222325ULL);
  CHECK(str::fnv1a("a") == 0xaf63dc4c8601ec8cULL);
}

TEST_CASE("sha256 known digests") {
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("csv reader handles quotes, commas and newlines") {
  std::istringstream in("id,text\n1,\"a, b\"\n2,\"say \"\"hi\"\"\"\n3,\"two\nlines\"\r\n4,plain\n");
  auto rows = csv::read(in);
  REQUIRE(rows.size() == 5);
  CHECK(rows[1].fields[1] == "a, b");
  CHECK(rows[2].fields[1] == "say \"hi\"");
  CHECK(rows[3].fields[1] == "two\nlines");
  CHECK(rows[4].line == 6);
  CHECK(rows[4].fields[1] == "plain");
}

TEST_CASE("csv unterminated quote is a parse error") {
  std::istringstream in("a,b\n1,\"oops\n");
  CHECK_THROWS_AS(csv::read(in), ParseError);
}

TEST_CASE("csv escape round trip") {
  for (std::string s : {"plain", "a,b", "q\"q", "multi\nline"}) {
    std::istringstream in(csv::escape(s) + "\n");
    auto rows = csv::read(in);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].fields[0] == s);
  }
}

TEST_CASE("warning sink captures messages") {
  std::vector<std::string> seen;
  {
    log::ScopedSink sink([&](const std::string& m) { seen.push_back(m); });
    log::warn("one");
  }
  CHECK(seen == std::vector<std::string>{"one"});
}
