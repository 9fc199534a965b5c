#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "patvar/error.hpp"
#include "patvar/filter.hpp"
#include "patvar/log.hpp"
#include "patvar/strings.hpp"

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

CounterfactualCandidate candidate(const std::string& text,
                                  const std::string& pattern = "NOUN+[be]+ADJ",
                                  const std::string& original = "The food was amazing.") {
  CounterfactualCandidate c;
  c.task.original = annotate(original, provider());
  c.task.original.id = "o";
  c.task.original_label = "food";
  c.task.target_label = "price";
  if (!pattern.empty()) c.task.pattern = parse_pattern(pattern);
  c.mode = pattern.empty() ? GenerationMode::NoVt : GenerationMode::Vt;
  c.generated_text = text;
  c.id = "c:" + text;
  return c;
}

MetricFlags judged(const std::string& l_hat) {
  MetricFlags f;
  f.verdict = DiscriminatorVerdict{l_hat, "B", "A"};
  return f;
}

// Discriminator stand-in: answers with the first label named in the text.
llm::CompletionResponse first_named(const llm::CompletionRequest& req,
                                    const std::vector<std::string>& labels) {
  const auto& u = req.messages.back().content;
  auto text = str::lower(u.substr(0, u.find("\nlabels:")));
  std::size_t best = std::string::npos;
  std::string answer = labels.front();
  for (const auto& l : labels) {
    auto pos = text.find(l);
    if (pos < best) {
      best = pos;
      answer = l;
    }
  }
  return {answer, llm::FinishReason::Stop, false};
}

}  // namespace

TEST_CASE("heuristic filter examples") {
  CHECK(heuristic_filter(candidate("The price was amazing.")).status == StageStatus::Passed);
  CHECK(heuristic_filter(candidate("Sorry, I cannot generate counterfactual here.")).reason ==
        "refusal");
  CHECK(heuristic_filter(candidate("modified text: The price was amazing.")).reason ==
        "prompt echo");
  CHECK(heuristic_filter(candidate("Sure.\nassistant: The price was fine.")).reason ==
        "prompt echo");
  CHECK(heuristic_filter(candidate("The price was amazing and the")).reason == "incomplete");
  auto cut = candidate("The price was amazing.");
  cut.finish_reason = llm::FinishReason::Length;
  CHECK(heuristic_filter(cut).reason == "incomplete");
  CHECK(heuristic_filter(candidate("Cheap.")).reason == "trivial");
  CHECK(heuristic_filter(candidate("The food was amazing.")).reason == "trivial");
  CHECK(heuristic_filter(candidate("\"The price was right.\"")).status == StageStatus::Passed);
  CHECK(heuristic_filter(candidate("Price was amazing")).status == StageStatus::Passed);
}

TEST_CASE("symbolic filter") {
  CHECK(symbolic_filter(candidate("The price was amazing."), lexicon(), provider()).status ==
        StageStatus::Passed);
  auto lost = symbolic_filter(candidate("Prices rose sharply."), lexicon(), provider());
  CHECK(lost.status == StageStatus::Failed);
  CHECK(lost.reason == "pattern lost: NOUN+[be]+ADJ");
  CHECK(symbolic_filter(candidate("anything", ""), lexicon(), provider()).status ==
        StageStatus::NotApplicable);
  std::vector<std::string> warnings;
  log::ScopedSink sink([&](const std::string& m) { warnings.push_back(m); });
  CHECK(symbolic_filter(candidate("whatever text", "*", "x y"), lexicon(), provider()).status ==
        StageStatus::Passed);
  CHECK(warnings.size() == 1);
}

TEST_CASE("discriminator label parsing") {
  const std::vector<std::string> labels = {"food", "price", "Service"};
  CHECK(parse_discriminator_label("price", labels) == "price");
  CHECK(parse_discriminator_label("  'Price'. ", labels) == "price");
  CHECK(parse_discriminator_label("\"service\"", labels) == "Service");
  CHECK_THROWS_AS(parse_discriminator_label("weather", labels), ResponseFormatError);
  CHECK_THROWS_AS(parse_discriminator_label("price and food", labels), ResponseFormatError);
}

TEST_CASE("discriminator request and verdicts") {
  auto req = build_discriminator_request("The price was right.", {"food", "price"});
  CHECK(req.temperature == 0.0);
  CHECK(req.messages.back().content ==
        "text: The price was right.\nlabels: food, price\nanswer with one label only");

  for (const auto& [answer, status, reason] :
       std::vector<std::tuple<std::string, StageStatus, std::string>>{
           {"price", StageStatus::Passed, ""},
           {"food", StageStatus::Failed, "kept original"},
           {"service", StageStatus::Failed, "missed target"}}) {
    llm::MockBackend mock([a = answer](const llm::CompletionRequest&) {
      return llm::CompletionResponse{a, llm::FinishReason::Stop, false};
    });
    llm::Gateway gw(mock, {});
    auto [v, dv] = discriminator_filter(candidate("x y z."), {"food", "price", "service"}, gw);
    CHECK(v.status == status);
    CHECK(v.reason == reason);
    CHECK(dv == DiscriminatorVerdict{answer, "price", "food"});
  }
}

TEST_CASE("metrics: hard and soft flips use their own denominators") {
  // (l_hat, target, orig) = (A,B,A), (B,B,A), (C,B,A)
  auto r = compute_metrics({judged("A"), judged("B"), judged("C")});
  CHECK(r.n_label == 3);
  CHECK(r.hard_flips == 1);
  CHECK(r.soft_flips == 2);
  CHECK(*r.lfr == doctest::Approx(1.0 / 3.0));
  CHECK(*r.slfr == doctest::Approx(2.0 / 3.0));
  CHECK_FALSE(r.pkr.has_value());
}

TEST_CASE("metrics: pattern keeping rate") {
  std::vector<MetricFlags> flags(5);
  flags[0].pattern_kept = true;
  flags[1].pattern_kept = true;
  flags[2].pattern_kept = true;
  flags[3].pattern_kept = false;
  auto r = compute_metrics(flags);
  CHECK(r.n_total == 5);
  CHECK(r.n_pattern == 4);
  CHECK(*r.pkr == doctest::Approx(0.75));
  CHECK_FALSE(r.lfr.has_value());
  CHECK_FALSE(r.slfr.has_value());
}

TEST_CASE("metrics: LFR never exceeds SLFR on random verdicts") {
  std::mt19937 rng(11);
  const std::vector<std::string> labels = {"A", "B", "C", "D"};
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<MetricFlags> flags;
    const int n = 1 + static_cast<int>(rng() % 20);
    for (int i = 0; i < n; ++i) {
      MetricFlags f;
      auto orig = labels[rng() % 4];
      auto target = labels[rng() % 4];
      while (target == orig) target = labels[rng() % 4];
      f.verdict = DiscriminatorVerdict{labels[rng() % 4], target, orig};
      flags.push_back(f);
    }
    auto r = compute_metrics(flags);
    CHECK(*r.lfr <= *r.slfr);
  }
}

TEST_CASE("quality report JSON round trip keeps undefined rates null") {
  auto r = compute_metrics({judged("B")});
  auto j = to_json(r);
  CHECK(j.at("pkr").is_null());
  auto back = quality_report_from_json(nlohmann::json::parse(j.dump()));
  CHECK(back.lfr == r.lfr);
  CHECK_FALSE(back.pkr.has_value());
}

TEST_CASE("filter config names and arms") {
  CHECK(FilterConfig::none().name() == "none");
  CHECK(FilterConfig::all().name() == "all");
  CHECK(FilterConfig{true, true, false}.name() == "heuristic+symbolic");
  auto arms = ablation_arms();
  REQUIRE(arms.size() == 5);
  CHECK(arms.front() == FilterConfig::none());
  CHECK(arms.back() == FilterConfig::all());
  for (const auto& a : arms) CHECK(a.subset_of(FilterConfig::all()));
  CHECK_FALSE(FilterConfig::all().subset_of(arms[2]));
}

TEST_CASE("pipeline with every stage disabled is the identity") {
  std::vector<CounterfactualCandidate> in = {candidate("cannot generate counterfactual"),
                                             candidate("The price was amazing.")};
  FilterDeps deps{lexicon(), provider(), nullptr, {"food", "price"}};
  auto out = run_pipeline(in, FilterConfig::none(), deps);
  REQUIRE(out.survivors.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(out.survivors[i].id == in[i].id);
    for (const auto& v : out.survivors[i].verdicts) CHECK(v.status == StageStatus::Skipped);
  }
}

TEST_CASE("pipeline without a gateway refuses the discriminator") {
  FilterDeps deps{lexicon(), provider(), nullptr, {"food", "price"}};
  CHECK_THROWS_AS(run_pipeline({}, FilterConfig::all(), deps), PreconditionViolation);
}

TEST_CASE("pipeline runs stages in order and stops at the first failure") {
  const std::vector<std::string> labels = {"food", "price", "service"};
  llm::MockBackend mock([&](const llm::CompletionRequest& r) { return first_named(r, labels); });
  llm::Gateway gw(mock, {});
  FilterDeps deps{lexicon(), provider(), &gw, labels};
  std::vector<CounterfactualCandidate> in = {
      candidate("cannot generate counterfactual"),
      candidate("Prices rose sharply for food."),
      candidate("The food was good for the price."),
      candidate("The price was amazing."),
  };
  auto out = run_pipeline(in, FilterConfig::all(), deps);
  REQUIRE(out.survivors.size() == 1);
  CHECK(out.survivors[0].id == in[3].id);
  CHECK(out.audited[0].verdict(Stage::Symbolic).status == StageStatus::Pending);
  CHECK(out.audited[1].verdict(Stage::Symbolic).status == StageStatus::Failed);
  CHECK(out.audited[2].verdict(Stage::Discriminator).reason == "kept original");
  CHECK(mock.calls() == 2);
  CHECK(out.report.n_label == 2);
  CHECK(out.report.n_pattern == 3);
  CHECK(*out.report.pkr == doctest::Approx(2.0 / 3.0));
  CHECK(*out.report.lfr == doctest::Approx(0.5));
}

TEST_CASE("pipeline: gateway failures abort, other errors fail one candidate") {
  const std::vector<std::string> labels = {"food", "price"};
  llm::MockBackend answers_junk([](const llm::CompletionRequest&) {
    return llm::CompletionResponse{"weather", llm::FinishReason::Stop, false};
  });
  llm::Gateway junk_gw(answers_junk, {});
  FilterDeps deps{lexicon(), provider(), &junk_gw, labels};
  auto out = run_pipeline({candidate("The price was amazing.")}, FilterConfig::all(), deps);
  CHECK(out.survivors.empty());
  CHECK(str::icontains(out.audited[0].verdict(Stage::Discriminator).reason, "error: "));

  llm::MockBackend broken([](const llm::CompletionRequest&) -> llm::CompletionResponse {
    throw BackendError(401, "denied");
  });
  llm::Gateway broken_gw(broken, {});
  FilterDeps deps2{lexicon(), provider(), &broken_gw, labels};
  CHECK_THROWS_AS(run_pipeline({candidate("The price was amazing.")}, FilterConfig::all(), deps2),
                  GatewayError);
}

TEST_CASE("monotonicity: more stages never keep more candidates") {
  const std::vector<std::string> labels = {"food", "price", "service"};
  llm::MockBackend mock([&](const llm::CompletionRequest& r) { return first_named(r, labels); });
  llm::Gateway gw(mock, {});
  FilterDeps deps{lexicon(), provider(), &gw, labels};
  const std::vector<std::string> pieces = {"the", "price", "food", "was", "amazing", "service",
                                           "cheap", "is", "great", "cannot generate counterfactual",
                                           "modified text:", "staff"};
  std::mt19937 rng(3);
  auto arms = ablation_arms();
  for (int batch = 0; batch < 40; ++batch) {
    std::vector<CounterfactualCandidate> in;
    for (int i = 0; i < 8; ++i) {
      std::string text;
      const int len = static_cast<int>(rng() % 7);
      for (int k = 0; k < len; ++k) text += (k ? " " : "") + pieces[rng() % pieces.size()];
      if (rng() % 3) text += ".";
      auto c = candidate(text, rng() % 4 ? "NOUN+[be]+ADJ" : "");
      c.id = "b" + std::to_string(batch) + "_" + std::to_string(i);
      in.push_back(c);
    }
    std::vector<std::set<std::string>> kept;
    for (const auto& arm : arms) {
      std::set<std::string> ids;
      for (const auto& c : run_pipeline(in, arm, deps).survivors) ids.insert(c.id);
      kept.push_back(ids);
    }
    for (std::size_t a = 0; a < arms.size(); ++a)
      for (std::size_t b = 0; b < arms.size(); ++b)
        if (arms[a].subset_of(arms[b]))
          CHECK(std::includes(kept[a].begin(), kept[a].end(), kept[b].begin(), kept[b].end()));
  }
}

TEST_CASE("candidate files round trip and report bad lines") {
  auto dir = std::filesystem::temp_directory_path() / "patvar_test_filter";
  std::filesystem::create_directories(dir);
  std::vector<CounterfactualCandidate> in = {candidate("The price was amazing."),
                                             candidate("Plain rewrite.", "")};
  write_jsonl(dir / "c.jsonl", in);
  auto back = read_candidates(dir / "c.jsonl");
  REQUIRE(back.size() == 2);
  CHECK(to_json(back[0]).dump() == to_json(in[0]).dump());
  CHECK(to_json(back[1]).dump() == to_json(in[1]).dump());

  {
    std::ofstream out(dir / "bad.jsonl");
    out << to_json(in[0]).dump() << "\n{broken\n";
  }
  try {
    read_candidates(dir / "bad.jsonl");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
}
