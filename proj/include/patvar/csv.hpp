#pragma once

#include <istream>
#include <string>
#include <string_view>
#include <vector>

namespace patvar::csv {

struct Row {
  std::size_t line = 0;  // 1-based line where the record starts
  std::vector<std::string> fields;
};

/// RFC 4180 records: quoted fields may hold commas, doubled quotes and
/// newlines. A trailing CR is dropped. Throws ParseError on an unterminated
/// quote.
std::vector<Row> read(std::istream& in);

/// Quotes the field when it holds a comma, quote or newline.
std::string escape(std::string_view field);

}  // namespace patvar::csv
