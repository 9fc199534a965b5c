#include "patvar/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <random>

#include "patvar/counterfactual.hpp"
#include "patvar/csv.hpp"
#include "patvar/error.hpp"
#include "patvar/log.hpp"
#include "patvar/strings.hpp"

namespace patvar {
namespace {

std::vector<std::string> split_labels(const std::string& cell, const DatasetSpec& spec) {
  std::vector<std::string> out;
  if (!spec.multi_label) {
    auto l = std::string(str::trim(cell));
    if (!l.empty()) out.push_back(std::move(l));
    return out;
  }
  std::string_view rest = cell;
  while (true) {
    auto pos = spec.label_separator.empty() ? std::string_view::npos : rest.find(spec.label_separator);
    auto piece = std::string(str::trim(rest.substr(0, pos)));
    if (!piece.empty() && std::find(out.begin(), out.end(), piece) == out.end())
      out.push_back(std::move(piece));
    if (pos == std::string_view::npos) break;
    rest.remove_prefix(pos + spec.label_separator.size());
  }
  return out;
}

std::vector<RawRow> read_csv_rows(const DatasetSpec& spec) {
  std::ifstream in(spec.path, std::ios::binary);
  if (!in) throw DataError("cannot open dataset " + spec.path.string());
  auto rows = csv::read(in);
  if (rows.empty()) throw EmptyDataset(spec.path.string() + " is empty");
  const auto& header = rows.front().fields;
  auto col = [&](const std::string& name) -> std::ptrdiff_t {
    auto it = std::find(header.begin(), header.end(), name);
    return it == header.end() ? -1 : it - header.begin();
  };
  const auto c_text = col(spec.text_field);
  const auto c_label = col(spec.label_field);
  const auto c_id = spec.id_field.empty() ? -1 : col(spec.id_field);
  if (c_text < 0) throw ParseError(1, "missing column '" + spec.text_field + "'");
  if (c_label < 0) throw ParseError(1, "missing column '" + spec.label_field + "'");
  if (!spec.id_field.empty() && c_id < 0) throw ParseError(1, "missing column '" + spec.id_field + "'");

  std::vector<RawRow> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& r = rows[i];
    auto field = [&](std::ptrdiff_t c) -> const std::string* {
      return static_cast<std::size_t>(c) < r.fields.size() ? &r.fields[static_cast<std::size_t>(c)]
                                                            : nullptr;
    };
    RawRow row;
    row.line = r.line;
    const auto* text = field(c_text);
    const auto* label = field(c_label);
    if (!text || str::is_blank(*text)) throw ParseError(r.line, "missing " + spec.text_field);
    if (!label) throw ParseError(r.line, "missing " + spec.label_field);
    row.text = *text;
    row.labels = split_labels(*label, spec);
    if (row.labels.empty()) throw ParseError(r.line, "missing " + spec.label_field);
    if (c_id >= 0) {
      const auto* id = field(c_id);
      if (!id || id->empty()) throw ParseError(r.line, "missing " + spec.id_field);
      row.id = *id;
    } else {
      row.id = "r" + std::to_string(out.size() + 1);
    }
    out.push_back(std::move(row));
  }
  return out;
}

std::vector<RawRow> read_jsonl_rows(const DatasetSpec& spec) {
  std::ifstream in(spec.path, std::ios::binary);
  if (!in) throw DataError("cannot open dataset " + spec.path.string());
  std::vector<RawRow> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (str::is_blank(line)) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(lineno, e.what());
    }
    RawRow row;
    row.line = lineno;
    if (!j.is_object() || !j.contains(spec.text_field) || !j[spec.text_field].is_string())
      throw ParseError(lineno, "missing " + spec.text_field);
    row.text = j[spec.text_field].get<std::string>();
    if (!j.contains(spec.label_field)) throw ParseError(lineno, "missing " + spec.label_field);
    const auto& lab = j[spec.label_field];
    if (lab.is_string()) {
      row.labels = split_labels(lab.get<std::string>(), spec);
    } else if (lab.is_array() && spec.multi_label) {
      for (const auto& l : lab) {
        if (!l.is_string()) throw ParseError(lineno, "non-string label");
        auto s = std::string(str::trim(l.get<std::string>()));
        if (!s.empty() && std::find(row.labels.begin(), row.labels.end(), s) == row.labels.end())
          row.labels.push_back(s);
      }
    } else {
      throw ParseError(lineno, "label must be a string");
    }
    if (row.labels.empty()) throw ParseError(lineno, "missing " + spec.label_field);
    if (!spec.id_field.empty()) {
      if (!j.contains(spec.id_field)) throw ParseError(lineno, "missing " + spec.id_field);
      const auto& id = j[spec.id_field];
      row.id = id.is_string() ? id.get<std::string>() : id.dump();
    } else {
      row.id = "r" + std::to_string(out.size() + 1);
    }
    out.push_back(std::move(row));
  }
  return out;
}

LabeledExample make_example(const std::string& id, const std::string& text,
                            const std::string& label, const AnnotationProvider& provider) {
  LabeledExample ex;
  ex.sentence = annotate(text, provider);
  ex.sentence.id = id;
  ex.label = label;
  return ex;
}

void append_row(const RawRow& row, const AnnotationProvider& provider, llm::Gateway* gateway,
                std::vector<LabeledExample>& out) {
  if (row.labels.size() == 1 || !gateway) {
    if (row.labels.size() > 1)
      log::warn("row " + row.id + " has several labels but no gateway; using '" +
                row.labels.front() + "'");
    out.push_back(make_example(row.id, row.text, row.labels.front(), provider));
    return;
  }
  std::vector<SeparatedPart> parts;
  try {
    parts = separate_multilabel(row.text, {}, row.labels, *gateway);
  } catch (const GatewayError&) {
    throw;
  } catch (const Error& e) {
    log::warn("row " + row.id + " could not be separated (" + e.what() + "); using '" +
              row.labels.front() + "'");
    out.push_back(make_example(row.id, row.text, row.labels.front(), provider));
    return;
  }
  std::size_t k = 0;
  for (const auto& p : parts) {
    if (str::is_blank(p.text)) continue;
    out.push_back(make_example(row.id + "#" + std::to_string(++k), std::string(str::trim(p.text)),
                               p.label, provider));
  }
}

}  // namespace

std::vector<RawRow> read_rows(const DatasetSpec& spec) {
  if (spec.format == "csv") return read_csv_rows(spec);
  if (spec.format == "jsonl") return read_jsonl_rows(spec);
  throw ConfigError("dataset.format", "unsupported format '" + spec.format + "'");
}

std::vector<std::size_t> stratified_quota(const std::vector<std::size_t>& counts, double fraction) {
  const std::size_t total = std::accumulate(counts.begin(), counts.end(), std::size_t{0});
  const auto target = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(total)));
  std::vector<std::size_t> quota(counts.size());
  std::vector<double> rem(counts.size());
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const double share = fraction * static_cast<double>(counts[i]);
    quota[i] = static_cast<std::size_t>(std::floor(share));
    rem[i] = share - static_cast<double>(quota[i]);
    assigned += quota[i];
  }
  std::vector<std::size_t> order(counts.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return rem[a] > rem[b]; });
  for (std::size_t j = 0; assigned < target && j < order.size(); ++j) {
    if (quota[order[j]] < counts[order[j]]) {
      ++quota[order[j]];
      ++assigned;
    }
  }
  return quota;
}

Dataset ingest(const DatasetSpec& spec, const AnnotationProvider& provider,
               llm::Gateway* gateway) {
  if (!(spec.holdout_fraction > 0.0 && spec.holdout_fraction < 1.0))
    throw ConfigError("dataset.holdout_fraction", "must lie strictly between 0 and 1");
  auto rows = read_rows(spec);
  if (rows.empty()) throw EmptyDataset(spec.path.string() + " has no rows");

  Dataset ds;
  ds.name = spec.name.empty() ? spec.path.stem().string() : spec.name;
  ds.label_set = spec.labels;
  for (const auto& row : rows)
    for (const auto& l : row.labels) {
      bool known = std::find(ds.label_set.begin(), ds.label_set.end(), l) != ds.label_set.end();
      if (!known && !spec.labels.empty())
        throw UnknownLabel("line " + std::to_string(row.line) + ": label '" + l + "'");
      if (!known) ds.label_set.push_back(l);
    }

  std::map<std::string, std::vector<std::size_t>> by_label;
  for (std::size_t i = 0; i < rows.size(); ++i) by_label[rows[i].labels.front()].push_back(i);
  std::vector<std::size_t> counts;
  std::vector<std::string> keys;
  for (const auto& l : ds.label_set) {
    if (!by_label.count(l)) continue;
    keys.push_back(l);
    counts.push_back(by_label[l].size());
  }
  const auto quota = stratified_quota(counts, spec.holdout_fraction);

  std::vector<bool> held(rows.size(), false);
  for (std::size_t k = 0; k < keys.size(); ++k) {
    auto members = by_label[keys[k]];
    std::mt19937_64 rng(spec.split_seed ^ str::fnv1a(keys[k]));
    std::shuffle(members.begin(), members.end(), rng);
    for (std::size_t j = 0; j < quota[k]; ++j) held[members[j]] = true;
  }

  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto& target = held[i] ? ds.holdout : ds.pool;
    append_row(rows[i], provider, spec.multi_label ? gateway : nullptr, target);
  }
  if (ds.pool.empty()) throw EmptyDataset("no pool examples after the holdout split");
  validate(ds);
  return ds;
}

}  // namespace patvar
