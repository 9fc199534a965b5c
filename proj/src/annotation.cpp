#include "patvar/annotation.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <initializer_list>

#include <json.hpp>

#include "patvar/error.hpp"
#include "patvar/log.hpp"
#include "patvar/strings.hpp"

namespace patvar {
namespace {

constexpr std::array<std::pair<Pos, std::string_view>, 9> kPosNames{{
    {Pos::Verb, "VERB"},
    {Pos::Propn, "PROPN"},
    {Pos::Noun, "NOUN"},
    {Pos::Adj, "ADJ"},
    {Pos::Adv, "ADV"},
    {Pos::Aux, "AUX"},
    {Pos::Pron, "PRON"},
    {Pos::Num, "NUM"},
    {Pos::Other, "OTHER"},
}};

bool is_terminal_punct(char c) {
  return c == '.' || c == ',' || c == '!' || c == '?' || c == ';' || c == ':';
}

std::string strip_whitespace(std::string_view s) {
  std::string out;
  for (unsigned char c : s)
    if (!std::isspace(c)) out += static_cast<char>(c);
  return out;
}

bool all_digits(std::string_view s) {
  bool any = false;
  for (unsigned char c : s) {
    if (std::isdigit(c)) {
      any = true;
    } else if (c != '.' && c != ',' && c != '$' && c != '%') {
      return false;
    }
  }
  return any;
}

// Hand-written tag table for the fixture provider.
const std::vector<std::pair<Pos, std::vector<std::string>>>& fixture_tags() {
  static const std::vector<std::pair<Pos, std::vector<std::string>>> table{
      {Pos::Noun,
       {"food", "meal", "dish", "cuisine", "menu", "lobster", "price", "cost", "service",
        "staff", "employee", "waiter", "waitress", "server", "manager", "customer", "client",
        "patron", "variety", "place", "restaurant", "bar", "cafe", "atmosphere", "environment",
        "ambiance", "ambience", "setting", "music", "song", "track", "tune", "playlist", "album",
        "artist", "ticket", "train", "flight", "hotel", "room", "city", "weather", "forecast",
        "rain", "temperature", "alarm", "reminder", "recipe", "dinner", "lunch", "breakfast",
        "pizza", "pasta", "burger", "steak", "salad", "coffee", "tea", "drink", "wine", "beer",
        "dessert", "portion", "table", "seat", "decor", "view", "parking", "location", "value",
        "deal", "bill", "tip", "money", "dollar", "star", "review", "experience", "time", "day",
        "week", "night", "weekend", "morning", "evening", "quality", "taste", "flavor",
        "product", "item", "order", "delivery", "wait", "line", "chef", "kitchen", "sale",
        "discount", "budget", "friend", "family", "news", "email", "message", "call", "phone",
        "light", "volume", "radio", "podcast", "movie", "game", "book", "question", "answer",
        "joy", "fear", "anger", "love", "sadness", "surprise", "heart", "life", "today",
        "tonight", "tomorrow", "yesterday", "monday", "tuesday", "wednesday", "thursday",
        "friday", "saturday", "sunday", "people", "person", "thing", "way", "spot", "steal",
        "selection", "option", "owner", "host", "crowd", "noise", "vibe", "mood", "place"}},
      {Pos::Adj,
       {"good", "great", "amazing", "excellent", "awesome", "fantastic", "wonderful",
        "delicious", "tasty", "yummy", "fresh", "bad", "terrible", "awful", "horrible", "rude",
        "impolite", "disrespectful", "friendly", "polite", "slow", "sluggish", "fast", "quick",
        "speedy", "cheap", "affordable", "reasonable", "inexpensive", "budget-friendly",
        "pricey", "expensive", "costly", "overpriced", "chill", "cozy", "loud", "quiet",
        "clean", "dirty", "nice", "new", "old", "hot", "cold", "warm", "happy", "glad",
        "joyful", "sad", "unhappy", "angry", "mad", "furious", "scared", "afraid",
        "frightened", "surprised", "lovely", "beautiful", "small", "large", "big", "huge",
        "tiny", "busy", "crowded", "comfortable", "attentive", "helpful", "cool", "sunny",
        "rainy", "cloudy", "free", "full", "empty", "long", "short", "fun", "boring", "spicy",
        "sweet", "salty", "bland", "fine", "okay", "best", "worst", "better", "worse",
        "pretty", "unbeatable", "generous", "decent", "average"}},
      {Pos::Verb,
       {"play", "pay", "spend", "eat", "find", "book", "serve", "love", "like", "hate",
        "recommend", "go", "come", "make", "take", "get", "give", "tell", "set", "turn",
        "send", "read", "cook", "bake", "visit", "return", "enjoy", "feel", "want", "need",
        "see", "look", "try", "buy", "purchase", "sell", "charge", "change", "remind", "wake",
        "check", "show", "stop", "start", "open", "close", "listen", "watch", "say", "think",
        "know", "cancel", "schedule", "keep", "leave", "seat", "greet", "offer", "include"}},
      {Pos::Aux,
       {"be", "have", "do", "will", "would", "can", "could", "should", "shall", "may",
        "might", "must"}},
      {Pos::Pron,
       {"i", "me", "my", "mine", "you", "your", "he", "him", "his", "she", "her", "it", "its",
        "we", "us", "our", "they", "them", "their", "something", "everything", "anything",
        "nothing", "myself", "yourself", "everyone", "someone"}},
      {Pos::Adv,
       {"very", "really", "so", "too", "quite", "always", "never", "often", "again", "also",
        "just", "here", "there", "now", "then", "definitely", "absolutely", "extremely",
        "well", "soon", "still", "almost", "highly", "super", "totally", "even"}},
      {Pos::Num,
       {"one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten",
        "twenty", "hundred", "thousand"}},
  };
  return table;
}

const std::vector<std::pair<std::string, std::string>>& fixture_irregulars() {
  static const std::vector<std::pair<std::string, std::string>> table{
      {"am", "be"},       {"is", "be"},        {"are", "be"},      {"was", "be"},
      {"were", "be"},     {"been", "be"},      {"being", "be"},    {"'s", "be"},
      {"has", "have"},    {"had", "have"},     {"having", "have"}, {"does", "do"},
      {"did", "do"},      {"done", "do"},      {"doing", "do"},    {"ate", "eat"},
      {"eaten", "eat"},   {"went", "go"},      {"gone", "go"},     {"took", "take"},
      {"taken", "take"},  {"made", "make"},    {"got", "get"},     {"gotten", "get"},
      {"gave", "give"},   {"given", "give"},   {"told", "tell"},   {"sent", "send"},
      {"bought", "buy"},  {"sold", "sell"},    {"felt", "feel"},   {"saw", "see"},
      {"seen", "see"},    {"found", "find"},   {"came", "come"},   {"said", "say"},
      {"thought", "think"}, {"knew", "know"},  {"known", "know"},  {"paid", "pay"},
      {"left", "leave"},  {"kept", "keep"},    {"read", "read"},   {"people", "people"},
      {"better", "better"}, {"best", "best"},  {"worse", "worse"}, {"worst", "worst"},
      {"children", "child"}, {"men", "man"},   {"women", "woman"},
  };
  return table;
}

}  // namespace

std::string_view to_string(Pos pos) {
  for (const auto& [p, name] : kPosNames)
    if (p == pos) return name;
  return "OTHER";
}

std::optional<Pos> pos_from_string(std::string_view name) {
  for (const auto& [p, n] : kPosNames)
    if (n == name && p != Pos::Other) return p;
  return std::nullopt;
}

void validate(const AnnotatedSentence& sentence) {
  for (std::size_t i = 0; i < sentence.tokens.size(); ++i) {
    const auto& t = sentence.tokens[i];
    if (t.surface.empty())
      throw InvariantViolation(sentence.id, "token " + std::to_string(i) + " is empty");
    if (str::contains_alnum(t.surface) && t.lemma.empty())
      throw InvariantViolation(sentence.id,
                               "token " + std::to_string(i) + " '" + t.surface + "' has no lemma");
    if (t.entity && t.entity->empty())
      throw InvariantViolation(sentence.id, "token " + std::to_string(i) + " has an empty entity");
  }
  std::string joined;
  for (const auto& t : sentence.tokens) joined += t.surface;
  if (strip_whitespace(joined) != strip_whitespace(sentence.raw))
    throw InvariantViolation(sentence.id, "tokens do not reconstruct the raw text");
}

// ---------------------------------------------------------------------------
// SynonymLexicon

void SynonymLexicon::add(std::string_view lemma, const std::vector<std::string>& synonyms) {
  auto key = str::lower(str::trim(lemma));
  if (key.empty()) return;
  auto& own = entries_[key];
  own.insert(key);
  for (const auto& s : synonyms) {
    auto syn = str::lower(str::trim(s));
    if (syn.empty()) continue;
    own.insert(syn);
    auto& other = entries_[syn];
    other.insert(syn);
    other.insert(key);
  }
}

void SynonymLexicon::add_group(const std::vector<std::string>& group) {
  for (const auto& member : group) add(member, group);
}

std::set<std::string> SynonymLexicon::synonyms_of(std::string_view lemma) const {
  auto key = str::lower(lemma);
  auto it = entries_.find(key);
  if (it == entries_.end()) return {key};
  return it->second;
}

bool SynonymLexicon::contains(std::string_view lemma) const {
  return entries_.find(str::lower(lemma)) != entries_.end();
}

bool SynonymLexicon::related(std::string_view a, std::string_view b) const {
  auto la = str::lower(a);
  auto lb = str::lower(b);
  if (la == lb) return true;
  auto it = entries_.find(la);
  return it != entries_.end() && it->second.count(lb) > 0;
}

SynonymLexicon SynonymLexicon::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open lexicon file " + path.string());
  SynonymLexicon lex;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto view = str::trim(line);
    if (view.empty() || view.front() == '#') continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos) throw ParseError(line_no, "expected lemma<TAB>synonyms");
    auto lemma = str::trim(std::string_view(line).substr(0, tab));
    if (lemma.empty()) throw ParseError(line_no, "empty lemma");
    lex.add(lemma, str::split(std::string_view(line).substr(tab + 1), ','));
  }
  return lex;
}

SynonymLexicon SynonymLexicon::fixture() {
  SynonymLexicon lex;
  lex.add_group({"pricey", "expensive", "costly"});
  lex.add_group({"cheap", "affordable", "reasonable", "inexpensive", "budget-friendly"});
  lex.add_group({"amazing", "great", "good", "excellent", "awesome", "fantastic", "wonderful"});
  lex.add_group({"delicious", "tasty", "yummy"});
  lex.add_group({"rude", "impolite", "disrespectful"});
  lex.add_group({"customer", "client", "patron"});
  lex.add_group({"environment", "atmosphere", "ambiance", "ambience", "setting"});
  lex.add_group({"food", "meal", "cuisine", "dish"});
  lex.add_group({"staff", "employee", "server"});
  lex.add_group({"pay", "spend"});
  lex.add_group({"sale", "discount", "deal"});
  lex.add_group({"song", "track", "tune"});
  lex.add_group({"fast", "quick", "speedy"});
  lex.add_group({"slow", "sluggish"});
  lex.add_group({"happy", "glad", "joyful"});
  lex.add_group({"sad", "unhappy"});
  lex.add_group({"angry", "mad", "furious"});
  lex.add_group({"scared", "afraid", "frightened"});
  return lex;
}

std::set<std::string> synonyms_of(std::string_view lemma, const SynonymLexicon& lexicon) {
  return lexicon.synonyms_of(lemma);
}

// ---------------------------------------------------------------------------
// Tokenization and providers

std::vector<std::string> tokenize(std::string_view raw) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < raw.size()) {
    while (i < raw.size() && std::isspace(static_cast<unsigned char>(raw[i]))) ++i;
    std::size_t start = i;
    while (i < raw.size() && !std::isspace(static_cast<unsigned char>(raw[i]))) ++i;
    if (start == i) break;
    auto chunk = raw.substr(start, i - start);
    std::size_t cut = chunk.size();
    while (cut > 0 && is_terminal_punct(chunk[cut - 1])) --cut;
    if (cut > 0) out.emplace_back(chunk.substr(0, cut));
    for (std::size_t k = cut; k < chunk.size(); ++k) out.emplace_back(1, chunk[k]);
  }
  return out;
}

FixtureProvider::FixtureProvider() {
  for (const auto& [pos, words] : fixture_tags())
    for (const auto& w : words) pos_.emplace(w, pos);
  for (const auto& [from, to] : fixture_irregulars()) irregular_.emplace(from, to);

  auto add_entity = [this](const std::string& phrase, const std::string& tag) {
    auto words = str::split(phrase, ' ');
    entities_.emplace_back(std::move(words), tag);
  };
  for (const char* day : {"monday", "tuesday", "wednesday", "thursday", "friday", "saturday",
                          "sunday"}) {
    std::string d(day);
    add_entity(d, "DATE");
    add_entity("next " + d, "DATE");
    add_entity("this " + d, "DATE");
    add_entity("last " + d, "DATE");
  }
  for (const char* month : {"january", "february", "march", "april", "june", "july", "august",
                            "september", "october", "november", "december"})
    add_entity(month, "DATE");
  for (const char* d : {"today", "tomorrow", "tonight", "yesterday", "next week", "this weekend",
                        "next weekend", "last night"})
    add_entity(d, "DATE");
  for (const char* loc : {"new york city", "new york", "houston", "tx", "california", "texas",
                          "boston", "chicago", "seattle", "paris", "london", "san francisco"})
    add_entity(loc, "LOCATION");
  for (const char* org : {"google", "starbucks", "amazon", "netflix", "spotify", "yelp"})
    add_entity(org, "ORG");
  add_entity("taylor swift", "PERSON");
  std::stable_sort(entities_.begin(), entities_.end(),
                   [](const auto& a, const auto& b) { return a.first.size() > b.first.size(); });
}

std::string FixtureProvider::lemmatize(std::string_view word) const {
  auto w = str::lower(word);
  if (auto it = irregular_.find(w); it != irregular_.end()) return it->second;
  if (pos_.count(w)) return w;
  auto known = [this](const std::string& s) { return !s.empty() && pos_.count(s) > 0; };
  auto ends_with = [&w](std::string_view suffix) {
    return w.size() > suffix.size() && w.compare(w.size() - suffix.size(), suffix.size(), suffix) == 0;
  };
  auto stem_of = [&w](std::size_t n) { return w.substr(0, w.size() - n); };
  std::vector<std::string> candidates;
  if (ends_with("ies")) candidates.push_back(stem_of(3) + "y");
  if (ends_with("es")) candidates.push_back(stem_of(2));
  if (ends_with("s")) candidates.push_back(stem_of(1));
  for (std::string_view suffix : {"ed", "ing"}) {
    if (!ends_with(suffix)) continue;
    auto base = stem_of(suffix.size());
    candidates.push_back(base);
    candidates.push_back(base + "e");
    if (base.size() >= 2 && base[base.size() - 1] == base[base.size() - 2])
      candidates.push_back(base.substr(0, base.size() - 1));
    if (suffix == "ed" && !base.empty() && base.back() == 'i')
      candidates.push_back(base.substr(0, base.size() - 1) + "y");
  }
  for (const auto& c : candidates)
    if (known(c)) return c;
  return w;
}

Pos FixtureProvider::tag(std::string_view surface, std::string_view lemma,
                         bool sentence_initial) const {
  if (!str::contains_alnum(surface)) return Pos::Other;
  if (all_digits(surface)) return Pos::Num;
  if (auto it = pos_.find(str::lower(surface)); it != pos_.end()) return it->second;
  if (auto it = pos_.find(std::string(lemma)); it != pos_.end()) return it->second;
  if (!sentence_initial && std::isupper(static_cast<unsigned char>(surface.front())))
    return Pos::Propn;
  return Pos::Other;
}

AnnotatedSentence FixtureProvider::annotate(std::string_view raw) const {
  AnnotatedSentence out;
  out.raw = std::string(raw);
  auto surfaces = tokenize(raw);
  out.tokens.reserve(surfaces.size());
  for (std::size_t i = 0; i < surfaces.size(); ++i) {
    Token t;
    t.surface = surfaces[i];
    t.lemma = str::contains_alnum(t.surface) ? lemmatize(t.surface) : t.surface;
    t.pos = tag(t.surface, t.lemma, i == 0);
    out.tokens.push_back(std::move(t));
  }
  std::vector<std::string> lowered;
  lowered.reserve(out.tokens.size());
  for (const auto& t : out.tokens) lowered.push_back(str::lower(t.surface));
  std::size_t i = 0;
  while (i < lowered.size()) {
    std::size_t advance = 1;
    for (const auto& [words, tag] : entities_) {
      if (i + words.size() > lowered.size()) continue;
      if (std::equal(words.begin(), words.end(), lowered.begin() + static_cast<std::ptrdiff_t>(i))) {
        for (std::size_t k = 0; k < words.size(); ++k) out.tokens[i + k].entity = tag;
        advance = words.size();
        break;
      }
    }
    i += advance;
  }
  return out;
}

LookupProvider::LookupProvider(std::vector<AnnotatedSentence> sentences,
                               const AnnotationProvider& fallback)
    : fallback_(fallback) {
  for (auto& s : sentences) {
    auto key = s.raw;
    by_raw_.emplace(std::move(key), std::move(s));
  }
}

AnnotatedSentence LookupProvider::annotate(std::string_view raw) const {
  if (auto it = by_raw_.find(std::string(raw)); it != by_raw_.end()) return it->second;
  return fallback_.annotate(raw);
}

AnnotatedSentence annotate(std::string_view raw, const AnnotationProvider& provider) {
  auto sentence = provider.annotate(raw);
  try {
    validate(sentence);
  } catch (const InvariantViolation& e) {
    throw ProviderFailure(std::string("provider returned a malformed annotation: ") + e.what());
  }
  return sentence;
}

// ---------------------------------------------------------------------------
// Annotation files

std::vector<AnnotatedSentence> load_annotations_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open annotation file " + path.string());
  std::vector<AnnotatedSentence> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (str::is_blank(line)) continue;
    nlohmann::json record;
    try {
      record = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(line_no, e.what());
    }
    AnnotatedSentence s;
    try {
      s.id = record.at("id").get<std::string>();
      s.raw = record.at("raw").get<std::string>();
      for (const auto& tok : record.at("tokens")) {
        Token t;
        t.surface = tok.at("surface").get<std::string>();
        t.lemma = str::lower(tok.at("lemma").get<std::string>());
        auto pos_name = tok.at("pos").get<std::string>();
        if (auto pos = pos_from_string(pos_name)) {
          t.pos = *pos;
        } else {
          if (pos_name != "OTHER")
            log::warn("record '" + s.id + "': unknown POS tag '" + pos_name + "' mapped to OTHER");
          t.pos = Pos::Other;
        }
        if (auto it = tok.find("entity"); it != tok.end() && !it->is_null())
          t.entity = str::upper(it->get<std::string>());
        s.tokens.push_back(std::move(t));
      }
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(line_no, e.what());
    }
    validate(s);
    out.push_back(std::move(s));
  }
  return out;
}

std::string to_jsonl(const AnnotatedSentence& sentence) {
  nlohmann::ordered_json record;
  record["id"] = sentence.id;
  record["raw"] = sentence.raw;
  auto tokens = nlohmann::ordered_json::array();
  for (const auto& t : sentence.tokens) {
    nlohmann::ordered_json tok;
    tok["surface"] = t.surface;
    tok["lemma"] = t.lemma;
    tok["pos"] = std::string(to_string(t.pos));
    if (t.entity) tok["entity"] = *t.entity;
    tokens.push_back(std::move(tok));
  }
  record["tokens"] = std::move(tokens);
  return record.dump();
}

std::string render_tokens(const std::vector<Token>& tokens, std::size_t begin, std::size_t end) {
  std::string out;
  for (std::size_t i = begin; i < end && i < tokens.size(); ++i) {
    const auto& s = tokens[i].surface;
    bool punct = s.size() == 1 && is_terminal_punct(s[0]);
    if (!out.empty() && !punct) out += ' ';
    out += s;
  }
  return out;
}

}  // namespace patvar
