#include "patvar/report.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "patvar/stats.hpp"

namespace patvar {
namespace {

const std::vector<std::pair<std::string, std::string>>& method_names() {
  static const std::vector<std::pair<std::string, std::string>> names = {
      {"random", "Random"},
      {"cluster", "Cluster"},
      {"uncertainty", "Uncertainty"},
      {"alps", "ALPS"},
      {"cf_no_vt", "Counterfactuals without VT"},
      {"counterfactual", "Counterfactuals"},
      {"none", "No Filters"},
      {"heuristic", "Heuristic Filter"},
      {"heuristic+symbolic", "Heuristic + Symbolic Filters"},
      {"heuristic+discriminator", "Heuristic + LLM Discriminator"},
      {"all", "Heuristic + Symbolic + LLM Discriminator"},
  };
  return names;
}

std::size_t method_rank(const std::string& condition) {
  const auto& names = method_names();
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i].first == condition) return i;
  return names.size();
}

std::string rate_cell(const std::optional<double>& v) {
  return v ? format_fixed(*v, 2) : std::string("n/a");
}

}  // namespace

std::string render_quality_table(const std::vector<std::pair<std::string, QualityReport>>& columns) {
  std::string out = "| ";
  std::string rule = "|---";
  for (const auto& [name, report] : columns) {
    out += " | " + name;
    rule += "|---";
  }
  out += " |\n" + rule + "|\n";
  const std::pair<const char*, std::optional<double> QualityReport::*> rows[] = {
      {"Pattern Keeping Rate", &QualityReport::pkr},
      {"Soft Label Flip Rate", &QualityReport::slfr},
      {"Label Flip Rate", &QualityReport::lfr},
  };
  for (const auto& [label, field] : rows) {
    out += "| ";
    out += label;
    for (const auto& col : columns) out += " | " + rate_cell(col.second.*field);
    out += " |\n";
  }
  return out;
}

std::string display_name(const std::string& condition) {
  for (const auto& [key, name] : method_names())
    if (key == condition) return name;
  return condition;
}

std::string format_score(double value) {
  auto s = format_fixed(value, 2);
  if (s.rfind("0.", 0) == 0) return s.substr(1);
  if (s.rfind("-0.", 0) == 0) return "-" + s.substr(2);
  return s;
}

std::string render_f1_grid(const std::vector<RunResult>& results) {
  std::set<std::size_t> shot_set;
  for (const auto& r : results) shot_set.insert(r.shots.begin(), r.shots.end());
  const std::vector<std::size_t> shots(shot_set.begin(), shot_set.end());

  std::vector<const RunResult*> rows;
  for (const auto& r : results) rows.push_back(&r);
  std::stable_sort(rows.begin(), rows.end(), [](const RunResult* a, const RunResult* b) {
    return method_rank(a->condition) < method_rank(b->condition);
  });

  auto lookup = [](const RunResult& r, std::size_t shot, const std::vector<std::optional<double>>& v)
      -> std::optional<double> {
    auto it = std::find(r.shots.begin(), r.shots.end(), shot);
    if (it == r.shots.end()) return std::nullopt;
    auto i = static_cast<std::size_t>(it - r.shots.begin());
    return i < v.size() ? v[i] : std::nullopt;
  };

  std::map<std::size_t, std::string> best;
  for (auto shot : shots) {
    std::optional<double> top;
    for (const auto* r : rows)
      if (auto m = lookup(*r, shot, r->mean); m && (!top || *m > *top)) top = m;
    if (top) best[shot] = format_score(*top);
  }

  std::string out = "| Method |";
  std::string rule = "|---|";
  for (auto s : shots) {
    out += " " + std::to_string(s) + " |";
    rule += "---|";
  }
  out += "\n" + rule + "\n";
  for (const auto* r : rows) {
    out += "| " + display_name(r->condition) + " |";
    for (auto shot : shots) {
      auto m = lookup(*r, shot, r->mean);
      if (!m) {
        out += " n/a |";
        continue;
      }
      auto mean_s = format_score(*m);
      if (best.count(shot) && best[shot] == mean_s) mean_s = "**" + mean_s + "**";
      auto sd = lookup(*r, shot, r->sd);
      out += " " + mean_s + " (" + (sd ? format_score(*sd) : std::string("n/a")) + ")" +
             significance_stars(lookup(*r, shot, r->p_value)) + " |";
    }
    out += "\n";
  }
  return out;
}

}  // namespace patvar
