#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <variant>
#include <vector>

#include "driftwatch/canonical.hpp"
#include "driftwatch/error.hpp"

namespace driftwatch {

struct Missing {
  bool operator==(const Missing&) const = default;
};

// Text stays text at ingest even when it looks numeric; typing happens in
// the typer. Numbers are always finite.
using Cell = std::variant<Missing, std::string, double>;

inline bool is_missing(const Cell& c) { return std::holds_alternative<Missing>(c); }

struct Column {
  std::string name;
  std::vector<Cell> values;

  bool operator==(const Column&) const = default;
};

/// Columnar table. Every column holds exactly row_count() cells and column
/// names are unique and non-empty.
class Table {
 public:
  Table() = default;

  Table(std::vector<Column> columns, std::size_t row_count)
      : columns_(std::move(columns)), row_count_(row_count) {
    std::unordered_set<std::string_view> seen;
    for (const auto& col : columns_) {
      if (col.name.empty()) throw ParseError("column name must be non-empty");
      if (!seen.insert(col.name).second) throw ParseError("duplicate column name '" + col.name + "'");
      if (col.values.size() != row_count_) {
        throw ParseError("column '" + col.name + "' has " + std::to_string(col.values.size()) +
                         " values, expected " + std::to_string(row_count_));
      }
    }
  }

  const std::vector<Column>& columns() const { return columns_; }
  std::size_t row_count() const { return row_count_; }

  const Column* find(std::string_view name) const {
    auto it = std::find_if(columns_.begin(), columns_.end(),
                           [&](const Column& c) { return c.name == name; });
    return it == columns_.end() ? nullptr : &*it;
  }

  bool operator==(const Table&) const = default;

 private:
  std::vector<Column> columns_;
  std::size_t row_count_ = 0;
};

enum class DataFormat { Csv, Jsonl };

inline std::optional<DataFormat> parse_data_format(std::string_view s) {
  if (s == "csv") return DataFormat::Csv;
  if (s == "jsonl") return DataFormat::Jsonl;
  return std::nullopt;
}

inline bool is_valid_utf8(std::string_view s) {
  std::size_t i = 0;
  const std::size_t n = s.size();
  while (i < n) {
    const auto c = static_cast<unsigned char>(s[i]);
    std::size_t len = 0;
    std::uint32_t cp = 0;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c & 0xE0) == 0xC0) {
      len = 2;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      len = 3;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      len = 4;
      cp = c & 0x07;
    } else {
      return false;
    }
    if (i + len > n) return false;
    for (std::size_t k = 1; k < len; ++k) {
      const auto cc = static_cast<unsigned char>(s[i + k]);
      if ((cc & 0xC0) != 0x80) return false;
      cp = (cp << 6) | (cc & 0x3F);
    }
    // Overlong forms, surrogates and out-of-range code points.
    if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) || (len == 4 && cp < 0x10000) ||
        cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
      return false;
    }
    i += len;
  }
  return true;
}

namespace detail {

inline bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

inline Cell text_cell(std::string text) {
  if (text.empty() || iequals(text, "null") || iequals(text, "na") || iequals(text, "nan")) {
    return Missing{};
  }
  return Cell{std::move(text)};
}

inline Cell number_cell(double v) {
  if (!std::isfinite(v)) return Missing{};
  return Cell{v};
}

inline std::string_view strip_bom(std::string_view bytes) {
  if (bytes.size() >= 3 && bytes.substr(0, 3) == "\xEF\xBB\xBF") bytes.remove_prefix(3);
  return bytes;
}

// RFC 4180 record splitter. A trailing line break after the last record
// does not produce an empty record.
inline std::vector<std::vector<std::string>> split_csv(std::string_view text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool field_was_quoted = false;
  bool record_has_content = false;
  std::size_t i = 0;
  const std::size_t n = text.size();

  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
    field_was_quoted = false;
  };
  auto end_record = [&] {
    end_field();
    records.push_back(std::move(record));
    record.clear();
    record_has_content = false;
  };

  while (i < n) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < n && text[i + 1] == '"') {
          field.push_back('"');
          i += 2;
          continue;
        }
        in_quotes = false;
        ++i;
        continue;
      }
      field.push_back(c);
      ++i;
      continue;
    }
    switch (c) {
      case '"':
        if (field_was_quoted) {
          throw ParseError("CSV record " + std::to_string(records.size()) +
                           ": unexpected quote after closing quote");
        }
        if (!field.empty()) {
          // A quote inside an unquoted field is literal text.
          field.push_back(c);
          ++i;
          break;
        }
        in_quotes = true;
        field_was_quoted = true;
        record_has_content = true;
        ++i;
        break;
      case ',':
        end_field();
        record_has_content = true;
        ++i;
        break;
      case '\r':
        if (i + 1 < n && text[i + 1] == '\n') ++i;
        [[fallthrough]];
      case '\n':
        end_record();
        ++i;
        break;
      default:
        if (field_was_quoted) {
          throw ParseError("CSV record " + std::to_string(records.size()) +
                           ": characters after closing quote");
        }
        field.push_back(c);
        record_has_content = true;
        ++i;
        break;
    }
  }
  if (in_quotes) throw ParseError("CSV: unterminated quoted field");
  if (record_has_content || !field.empty() || !record.empty()) end_record();
  return records;
}

inline Table read_csv(std::string_view text) {
  auto records = split_csv(text);
  if (records.empty()) throw ParseError("CSV input has no header row");
  const auto& header = records.front();
  std::vector<Column> columns;
  columns.reserve(header.size());
  std::unordered_set<std::string> seen;
  for (const auto& name : header) {
    if (name.empty()) throw ParseError("CSV header contains an empty column name");
    if (!seen.insert(name).second) throw ParseError("duplicate header name '" + name + "'");
    columns.push_back(Column{name, {}});
  }
  const std::size_t rows = records.size() - 1;
  for (auto& col : columns) col.values.reserve(rows);
  for (std::size_t r = 1; r < records.size(); ++r) {
    auto& rec = records[r];
    if (rec.size() != header.size()) {
      throw ParseError("ragged CSV row " + std::to_string(r) + ": expected " +
                       std::to_string(header.size()) + " fields, got " + std::to_string(rec.size()));
    }
    for (std::size_t c = 0; c < rec.size(); ++c) {
      columns[c].values.push_back(text_cell(std::move(rec[c])));
    }
  }
  return Table(std::move(columns), rows);
}

template <typename J>
Cell json_cell(const J& v) {
  switch (v.type()) {
    case J::value_t::null:
      return Missing{};
    case J::value_t::string:
      return text_cell(v.template get<std::string>());
    case J::value_t::number_integer:
    case J::value_t::number_unsigned:
    case J::value_t::number_float:
      return number_cell(v.template get<double>());
    case J::value_t::boolean:
      return Cell{std::string(v.template get<bool>() ? "true" : "false")};
    default:
      // Nested values are kept as their canonical JSON text.
      return Cell{canonical_dump(Json::parse(v.dump()))};
  }
}

inline Table read_jsonl(std::string_view text) {
  std::vector<Column> columns;
  std::unordered_map<std::string, std::size_t> index;
  std::size_t rows = 0;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (std::all_of(line.begin(), line.end(),
                    [](char c) { return std::isspace(static_cast<unsigned char>(c)); })) {
      continue;
    }
    // ordered_json keeps the key order of the line: columns are first-seen.
    nlohmann::ordered_json obj;
    try {
      obj = nlohmann::ordered_json::parse(line);
    } catch (const nlohmann::ordered_json::parse_error& e) {
      throw ParseError("JSONL line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!obj.is_object()) throw ParseError("JSONL line " + std::to_string(line_no) + ": not a JSON object");
    for (const auto& [key, value] : obj.items()) {
      auto it = index.find(key);
      if (it == index.end()) {
        if (key.empty()) throw ParseError("JSONL line " + std::to_string(line_no) + ": empty key");
        it = index.emplace(key, columns.size()).first;
        columns.push_back(Column{key, std::vector<Cell>(rows, Missing{})});
      }
      auto& values = columns[it->second].values;
      values.resize(rows, Missing{});
      values.push_back(json_cell(value));
    }
    ++rows;
    for (auto& col : columns) col.values.resize(rows, Missing{});
  }
  return Table(std::move(columns), rows);
}

}  // namespace detail

/// Parses CSV (RFC 4180, header row required) or JSON-lines bytes into a
/// columnar Table. Empty strings, null and NA/NaN (any case) become
/// Missing. Throws ParseError for ragged rows, duplicate headers and
/// invalid UTF-8.
inline Table read_table(std::string_view bytes, DataFormat format) {
  if (!is_valid_utf8(bytes)) throw ParseError("input is not valid UTF-8");
  bytes = detail::strip_bom(bytes);
  return format == DataFormat::Csv ? detail::read_csv(bytes) : detail::read_jsonl(bytes);
}

}  // namespace driftwatch
