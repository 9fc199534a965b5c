#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "patvar/active_learning.hpp"
#include "patvar/llm.hpp"

namespace patvar {

struct DatasetSpec {
  std::filesystem::path path;
  std::string format = "csv";  // csv | jsonl
  std::string name;
  std::string text_field = "text";
  std::string label_field = "label";
  std::string id_field;                // optional; rows are numbered r1, r2, ... otherwise
  bool multi_label = false;
  std::string label_separator = ";";  // csv multi-label cells
  double holdout_fraction = 0.3;
  std::uint64_t split_seed = 0;
  std::vector<std::string> labels;  // optional fixed label order and whitelist
};

struct RawRow {
  std::size_t line = 0;
  std::string id;
  std::string text;
  std::vector<std::string> labels;
};

/// Parses the file into rows. Throws ParseError with the offending line.
std::vector<RawRow> read_rows(const DatasetSpec& spec);

/// Per-key holdout counts for a stratified split: the total is
/// round(fraction * N) and every key gets floor or ceil of its share
/// (largest remainders first, ties in key order).
std::vector<std::size_t> stratified_quota(const std::vector<std::size_t>& counts, double fraction);

/// Reads, validates, and splits a dataset. Rows are split (stratified by
/// their first label, seeded) before anything else; with multi_label set,
/// rows carrying several labels are then separated into single-label parts
/// through the gateway. Throws EmptyDataset, UnknownLabel, ParseError.
Dataset ingest(const DatasetSpec& spec, const AnnotationProvider& provider,
               llm::Gateway* gateway = nullptr);

}  // namespace patvar
