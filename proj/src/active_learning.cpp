#include "patvar/active_learning.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>

#include "patvar/csv.hpp"
#include "patvar/error.hpp"
#include "patvar/log.hpp"
#include "patvar/stats.hpp"

namespace patvar {
namespace {

double evaluate(const Classifier& clf, const Dataset& ds) {
  std::vector<std::pair<std::string, std::string>> preds;
  preds.reserve(ds.holdout.size());
  for (const auto& ex : ds.holdout) preds.emplace_back(ex.label, clf.predict(ex.sentence.raw).label);
  return macro_f1(preds, ds.label_set);
}

std::vector<LabeledExample> pick(const Dataset& ds, const std::vector<std::size_t>& idx,
                                 std::size_t n) {
  std::vector<LabeledExample> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(ds.pool[idx[i]]);
  return out;
}

std::unique_ptr<Classifier> train_fresh(const SimulationDeps& deps,
                                        const std::vector<TrainingItem>& items) {
  auto clf = deps.classifier_factory();
  clf->train(items);
  return clf;
}

// Selection order for the non-adaptive conditions; prefixes give each shot.
std::vector<std::size_t> static_order(const std::string& condition, const Dataset& ds,
                                      std::size_t max_shot, std::uint64_t seed,
                                      const SimulationDeps& deps,
                                      const std::vector<Vector>& embeddings) {
  if (condition == "cluster") {
    const auto k = std::min(deps.cluster_k.value_or(ds.label_set.size()), ds.pool.size());
    return select_cluster(embeddings, max_shot, k, seed);
  }
  return select_random(ds.pool.size(), max_shot, seed);
}

void run_cell_series(const std::string& condition, const Dataset& ds,
                     const std::vector<std::size_t>& shots, std::uint64_t seed,
                     std::size_t seed_col, const SimulationDeps& deps,
                     const std::vector<Vector>& embeddings, RunResult& out) {
  auto warn_cell = [&](std::size_t shot, const std::exception& e) {
    log::warn("condition " + condition + " seed " + std::to_string(seed) + " shot " +
              std::to_string(shot) + " failed: " + e.what());
  };

  if (condition == "uncertainty") {
    std::vector<std::size_t> labeled;
    std::unique_ptr<Classifier> prev;
    for (std::size_t si = 0; si < shots.size(); ++si) {
      try {
        if (si == 0) {
          labeled = select_random(ds.pool.size(), shots[0], seed);
        } else {
          if (!prev) throw UntrainedClassifier();
          std::set<std::size_t> taken(labeled.begin(), labeled.end());
          std::vector<std::size_t> rest;
          std::vector<std::string> texts;
          for (std::size_t i = 0; i < ds.pool.size(); ++i) {
            if (taken.count(i)) continue;
            rest.push_back(i);
            texts.push_back(ds.pool[i].sentence.raw);
          }
          for (auto j : select_uncertainty(texts, shots[si] - shots[si - 1], *prev))
            labeled.push_back(rest[j]);
        }
      } catch (const std::exception& e) {
        warn_cell(shots[si], e);
        return;
      }
      try {
        auto items = augment_with_counterfactuals(pick(ds, labeled, labeled.size()), {});
        prev = train_fresh(deps, items);
        out.grid[si][seed_col] = evaluate(*prev, ds);
      } catch (const std::exception& e) {
        prev.reset();
        warn_cell(shots[si], e);
      }
    }
    return;
  }

  std::vector<std::size_t> order;
  try {
    order = static_order(condition, ds, shots.back(), seed, deps, embeddings);
  } catch (const std::exception& e) {
    warn_cell(shots.front(), e);
    return;
  }
  static const SurvivorIndex kEmpty;
  const SurvivorIndex& survivors = condition == "counterfactual" ? deps.counterfactual
                                   : condition == "cf_no_vt"     ? deps.no_vt
                                                                 : kEmpty;
  for (std::size_t si = 0; si < shots.size(); ++si) {
    try {
      auto items = augment_with_counterfactuals(pick(ds, order, shots[si]), survivors);
      auto clf = train_fresh(deps, items);
      out.grid[si][seed_col] = evaluate(*clf, ds);
    } catch (const std::exception& e) {
      warn_cell(shots[si], e);
    }
  }
}

}  // namespace

std::string format_fixed(double value, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, value);
  return buf;
}

void validate(const Dataset& ds) {
  std::set<std::string> labels(ds.label_set.begin(), ds.label_set.end());
  std::set<std::string> pool_ids;
  for (const auto& ex : ds.pool) {
    if (!labels.count(ex.label)) throw UnknownLabel("label '" + ex.label + "' of " + ex.sentence.id);
    pool_ids.insert(ex.sentence.id);
  }
  for (const auto& ex : ds.holdout) {
    if (!labels.count(ex.label)) throw UnknownLabel("label '" + ex.label + "' of " + ex.sentence.id);
    if (pool_ids.count(ex.sentence.id))
      throw DataError("example " + ex.sentence.id + " is in both pool and holdout");
  }
}

void validate_schedule(const std::vector<std::size_t>& shots, std::size_t pool_size) {
  if (shots.empty()) throw ConfigError("schedule", "empty shot schedule");
  if (shots.front() < 1) throw ConfigError("schedule", "first shot must be at least 1");
  for (std::size_t i = 1; i < shots.size(); ++i)
    if (shots[i] <= shots[i - 1]) throw ConfigError("schedule", "shots must strictly increase");
  if (shots.back() > pool_size)
    throw ConfigError("schedule", "largest shot " + std::to_string(shots.back()) +
                                      " exceeds pool size " + std::to_string(pool_size));
}

std::vector<TrainingItem> augment_with_counterfactuals(const std::vector<LabeledExample>& selected,
                                                       const SurvivorIndex& survivors) {
  std::vector<TrainingItem> items;
  for (const auto& ex : selected) items.push_back({ex.sentence.raw, ex.label});
  for (const auto& ex : selected) {
    auto it = survivors.find(ex.sentence.id);
    if (it == survivors.end()) continue;
    for (const auto& a : it->second) items.push_back({a.text, a.target_label});
  }
  return items;
}

void summarize(RunResult& r) {
  r.mean.assign(r.shots.size(), std::nullopt);
  r.sd.assign(r.shots.size(), std::nullopt);
  for (std::size_t si = 0; si < r.shots.size(); ++si) {
    std::vector<double> xs;
    for (const auto& v : r.grid[si])
      if (v) xs.push_back(*v);
    if (xs.empty()) continue;
    r.mean[si] = mean(xs);
    r.sd[si] = sample_sd(xs);
  }
}

void attach_p_values(std::vector<RunResult>& results, const std::string& reference) {
  const RunResult* ref = nullptr;
  for (const auto& r : results)
    if (r.condition == reference) ref = &r;
  for (auto& r : results) {
    r.p_value.assign(r.shots.size(), std::nullopt);
    if (!ref || &r == ref) continue;
    for (std::size_t si = 0; si < r.shots.size(); ++si) {
      auto rs = std::find(ref->shots.begin(), ref->shots.end(), r.shots[si]);
      if (rs == ref->shots.end()) continue;
      const auto& ref_row = ref->grid[static_cast<std::size_t>(rs - ref->shots.begin())];
      std::vector<double> a, b;
      for (std::size_t k = 0; k < r.seeds.size(); ++k) {
        auto rk = std::find(ref->seeds.begin(), ref->seeds.end(), r.seeds[k]);
        if (rk == ref->seeds.end()) continue;
        const auto& x = ref_row[static_cast<std::size_t>(rk - ref->seeds.begin())];
        const auto& y = r.grid[si][k];
        if (!x || !y) continue;
        a.push_back(*x);
        b.push_back(*y);
      }
      if (a.size() < 2) continue;
      r.p_value[si] = paired_t_test(a, b).p;
    }
  }
}

std::vector<RunResult> run_simulation(const Dataset& dataset,
                                      const std::vector<std::string>& conditions,
                                      const std::vector<std::size_t>& shots,
                                      const std::vector<std::uint64_t>& seeds,
                                      const SimulationDeps& deps) {
  validate(dataset);
  validate_schedule(shots, dataset.pool.size());
  if (seeds.empty()) throw ConfigError("seeds", "at least one seed is required");
  if (dataset.holdout.empty()) throw EmptyDataset("holdout set is empty");
  if (!deps.classifier_factory) throw PreconditionViolation("no classifier factory");
  for (const auto& c : conditions)
    if (std::find(kConditions.begin(), kConditions.end(), c) == kConditions.end())
      throw ConfigError("conditions", "unknown condition '" + c + "'");

  std::vector<Vector> embeddings;
  if (std::find(conditions.begin(), conditions.end(), "cluster") != conditions.end()) {
    HashedEmbedder fallback;
    const Embedder& e = deps.embedder ? *deps.embedder : fallback;
    for (const auto& ex : dataset.pool) embeddings.push_back(e.embed(ex.sentence.raw));
  }

  std::vector<RunResult> results;
  for (const auto& condition : conditions) {
    RunResult r;
    r.condition = condition;
    r.dataset = dataset.name;
    r.shots = shots;
    r.seeds = seeds;
    r.grid.assign(shots.size(), std::vector<std::optional<double>>(seeds.size()));
    for (std::size_t k = 0; k < seeds.size(); ++k)
      run_cell_series(condition, dataset, shots, seeds[k], k, deps, embeddings, r);
    summarize(r);
    results.push_back(std::move(r));
  }
  attach_p_values(results, deps.reference);
  return results;
}

void write_results_csv(const std::filesystem::path& path, const std::vector<RunResult>& results) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << "condition,dataset,shot,seed,macro_f1\n";
  for (const auto& r : results)
    for (std::size_t si = 0; si < r.shots.size(); ++si)
      for (std::size_t k = 0; k < r.seeds.size(); ++k) {
        out << csv::escape(r.condition) << ',' << csv::escape(r.dataset) << ',' << r.shots[si]
            << ',' << r.seeds[k] << ',';
        if (r.grid[si][k]) out << format_fixed(*r.grid[si][k], 6);
        out << '\n';
      }
}

void write_summary_csv(const std::filesystem::path& path, const std::vector<RunResult>& results,
                       const std::string& reference) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << "condition,dataset,shot,mean,sd,p_vs_" << reference << ",stars\n";
  auto opt = [](const std::vector<std::optional<double>>& v, std::size_t i) {
    return i < v.size() && v[i] ? format_fixed(*v[i], 6) : std::string();
  };
  for (const auto& r : results)
    for (std::size_t si = 0; si < r.shots.size(); ++si) {
      const auto p = si < r.p_value.size() ? r.p_value[si] : std::nullopt;
      out << csv::escape(r.condition) << ',' << csv::escape(r.dataset) << ',' << r.shots[si] << ','
          << opt(r.mean, si) << ',' << opt(r.sd, si) << ',' << opt(r.p_value, si) << ','
          << significance_stars(p) << '\n';
    }
}

std::vector<RunResult> read_results_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  auto rows = csv::read(in);
  if (rows.empty()) throw EmptyDataset(path.string() + " has no header");
  const auto& header = rows.front().fields;
  auto col = [&](const std::string& name) {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw ParseError(1, "missing column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  const auto c_cond = col("condition"), c_ds = col("dataset"), c_shot = col("shot"),
             c_seed = col("seed"), c_f1 = col("macro_f1");

  struct Cell {
    std::size_t shot;
    std::uint64_t seed;
    std::optional<double> value;
  };
  std::vector<std::pair<std::string, std::string>> keys;
  std::map<std::pair<std::string, std::string>, std::vector<Cell>> cells;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& f = rows[i].fields;
    if (f.size() != header.size())
      throw ParseError(rows[i].line, "expected " + std::to_string(header.size()) + " fields");
    std::pair key{f[c_cond], f[c_ds]};
    if (!cells.count(key)) keys.push_back(key);
    Cell cell;
    try {
      cell.shot = std::stoul(f[c_shot]);
      cell.seed = std::stoull(f[c_seed]);
      if (!f[c_f1].empty()) cell.value = std::stod(f[c_f1]);
    } catch (const std::logic_error&) {
      throw ParseError(rows[i].line, "non-numeric shot, seed or macro_f1");
    }
    cells[key].push_back(cell);
  }

  std::vector<RunResult> out;
  for (const auto& key : keys) {
    RunResult r;
    r.condition = key.first;
    r.dataset = key.second;
    std::set<std::size_t> shots;
    std::set<std::uint64_t> seeds;
    for (const auto& c : cells[key]) {
      shots.insert(c.shot);
      seeds.insert(c.seed);
    }
    r.shots.assign(shots.begin(), shots.end());
    r.seeds.assign(seeds.begin(), seeds.end());
    r.grid.assign(r.shots.size(), std::vector<std::optional<double>>(r.seeds.size()));
    for (const auto& c : cells[key]) {
      auto si = static_cast<std::size_t>(std::find(r.shots.begin(), r.shots.end(), c.shot) -
                                         r.shots.begin());
      auto k = static_cast<std::size_t>(std::find(r.seeds.begin(), r.seeds.end(), c.seed) -
                                        r.seeds.begin());
      r.grid[si][k] = c.value;
    }
    summarize(r);
    r.p_value.assign(r.shots.size(), std::nullopt);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace patvar
