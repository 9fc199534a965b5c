#pragma once

#include <string>
#include <utility>
#include <vector>

#include "patvar/active_learning.hpp"
#include "patvar/filter.hpp"

namespace patvar {

/// Quality table: one column per named report, rows PKR, SLFR, LFR with two
/// decimals. Undefined rates print as "n/a".
std::string render_quality_table(const std::vector<std::pair<std::string, QualityReport>>& columns);

/// Row label used in the F1 grid ("Counterfactuals without VT", ...).
/// Unknown condition names are returned unchanged.
std::string display_name(const std::string& condition);

/// Two decimals without the leading zero: 0.38 -> ".38", 1 -> "1.00".
std::string format_score(double value);

/// F1 grid for one dataset: methods as rows in a fixed order, shots as
/// columns, cells "mean (sd)stars", best mean per column in bold.
std::string render_f1_grid(const std::vector<RunResult>& results);

}  // namespace patvar
