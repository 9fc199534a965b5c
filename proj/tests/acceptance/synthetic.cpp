#include "synthetic.hpp"

#include <fstream>
#include <map>
#include <random>
#include <regex>
#include <set>
#include <sstream>

#include "patvar/commands.hpp"
#include "patvar/strings.hpp"

namespace acceptance {
namespace {

namespace fs = std::filesystem;
using namespace patvar;

const std::vector<std::string> kLabels = {"alarm", "music", "travel", "weather"};
const std::vector<std::string> kFillers = {"please", "the", "some", "really", "today",
                                           "now", "maybe", "just", "my", "about"};
constexpr std::size_t kWordsPerLabel = 24;
constexpr std::size_t kRowsPerLabel = 75;
constexpr std::size_t kInjected = 4;

// Pronounceable made-up words, distinct across labels and outside the
// annotator's closed-class lists.
std::map<std::string, std::vector<std::string>> make_vocabulary() {
  static const std::string onset = "bfgklmnptvz";
  static const std::string vowel = "aeiou";
  static const std::string coda = "bgkmnptvz";
  std::mt19937 rng(2024);
  std::set<std::string> used;
  std::map<std::string, std::vector<std::string>> vocab;
  for (const auto& label : kLabels) {
    while (vocab[label].size() < kWordsPerLabel) {
      std::string w;
      for (int s = 0; s < 2; ++s) {
        w += onset[rng() % onset.size()];
        w += vowel[rng() % vowel.size()];
      }
      w += coda[rng() % coda.size()];
      if (used.insert(w).second) vocab[label].push_back(w);
    }
  }
  return vocab;
}

const std::map<std::string, std::vector<std::string>>& vocabulary() {
  static const auto v = make_vocabulary();
  return v;
}

std::string make_dataset_csv() {
  std::mt19937 rng(77);
  std::string csv = "id,text,label\n";
  std::size_t n = 0;
  for (std::size_t i = 0; i < kRowsPerLabel; ++i) {
    for (const auto& label : kLabels) {
      const auto& words = vocabulary().at(label);
      auto filler = [&] { return kFillers[rng() % kFillers.size()]; };
      auto word = [&] { return words[rng() % words.size()]; };
      std::string text = filler() + " " + word() + " " + filler() + " " + word() + " " + word() +
                         " " + filler() + ".";
      text[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(text[0])));
      csv += "s" + std::to_string(++n) + "," + text + "," + label + "\n";
    }
  }
  return csv;
}

// Discriminator stand-in: the label whose vocabulary occurs most often.
std::string majority_label(const std::string& text) {
  std::map<std::string, int> hits;
  for (const auto& token : str::split(str::lower(text), ' ')) {
    std::string t;
    for (char ch : token)
      if (std::isalpha(static_cast<unsigned char>(ch))) t += ch;
    for (const auto& [label, words] : vocabulary())
      if (std::find(words.begin(), words.end(), t) != words.end()) ++hits[label];
  }
  std::string best = kLabels.front();
  for (const auto& label : kLabels)
    if (hits[label] > hits[best]) best = label;
  return best;
}

// Mock LLM: phrases echo the matched phrase (template behavior),
// counterfactuals keep the first phrase and add target-label vocabulary,
// the discriminator votes by vocabulary.
llm::CompletionResponse respond(const llm::CompletionRequest& req) {
  const std::string& user = req.messages.back().content;
  const std::string system =
      req.messages.front().role == llm::Role::System ? req.messages.front().content : "";
  static const std::regex cf_re(
      R"(original text:(.*), original label:(.*), modified label:(.*), generated phrases:\['([^']*)')");
  std::smatch m;
  if (system.find("counterfactual example") != std::string::npos &&
      std::regex_search(user, m, cf_re)) {
    const std::string target = m[3].str();
    const auto& words = vocabulary().at(target);
    std::mt19937_64 rng(str::fnv1a(m[1].str() + "|" + target));
    std::string text = m[4].str() + " with";
    for (std::size_t i = 0; i < kInjected; ++i) text += " " + words[rng() % words.size()];
    return {text + ".", llm::FinishReason::Stop, false};
  }
  if (system.find("exactly one label") != std::string::npos) {
    auto text = user.substr(0, user.find("\nlabels:"));
    return {majority_label(text), llm::FinishReason::Stop, false};
  }
  return template_response(req);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

const std::vector<std::size_t>& synthetic_shots() {
  static const std::vector<std::size_t> shots = {10, 15, 30, 50, 70, 90, 120, 150};
  return shots;
}

SyntheticRun run_synthetic(const fs::path& work) {
  fs::remove_all(work);
  fs::create_directories(work);
  std::ofstream(work / "synthetic.csv", std::ios::binary) << make_dataset_csv();

  nlohmann::ordered_json cfg_json = {
      {"dataset",
       {{"path", "synthetic.csv"}, {"name", "synthetic"}, {"id_field", "id"},
        {"holdout_fraction", 1.0 / 3.0}, {"split_seed", 11}}},
      {"synthesis", {{"max_patterns", 40}, {"max_atoms", 1}}},
      {"schedule", synthetic_shots()},
      {"seeds", {1, 2, 3, 4, 5, 6, 7, 8}},
      {"conditions", {"random", "counterfactual"}},
      {"backend", {{"kind", "mock"}}},
      {"output_dir", "out"},
  };
  std::ofstream(work / "config.json") << cfg_json.dump(2);

  auto cfg = load_config(work / "config.json");
  llm::MockBackend mock(respond);
  Experiment exp(cfg, &mock);
  exp.simulate();

  SyntheticRun run;
  run.results_csv = slurp(exp.output_dir() / "results.csv");
  run.summary_csv = slurp(exp.output_dir() / "summary.csv");
  run.results = read_results_csv(exp.output_dir() / "results.csv");
  run.backend_calls = mock.calls();
  return run;
}

}  // namespace acceptance
