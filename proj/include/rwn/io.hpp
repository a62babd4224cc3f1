// Copyright 2026 The rwn Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#pragma once

// CSV and schema-file I/O.
//
// CSV: header row, comma delimiter, RFC-4180 quoting. The unquoted token
// given as `missing` (default "NA") is a missing cell; a quoted field is
// always a value, so a category literally named NA survives a round trip.
// Numbers are written in shortest round-trip form (std::to_chars), which
// makes write_csv followed by load_csv bit-exact.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "nlohmann/json.hpp"
#include "rwn/dataset.hpp"
#include "rwn/error.hpp"

namespace rwn {

inline constexpr std::string_view kDefaultMissingToken = "NA";

struct CsvField {
  std::string text;
  bool quoted = false;
};

using CsvRecord = std::vector<CsvField>;

// Splits RFC-4180 text into records. Quoted fields may span lines.
inline std::vector<CsvRecord> parse_csv_records(std::string_view text) {
  std::vector<CsvRecord> records;
  CsvRecord record;
  CsvField field;
  bool in_quotes = false;
  bool field_started = false;
  std::size_t line = 1;

  auto end_field = [&] {
    record.push_back(std::move(field));
    field = CsvField{};
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    // A bare empty line is skipped rather than read as a 1-field record.
    if (!(record.size() == 1 && record[0].text.empty() && !record[0].quoted)) {
      records.push_back(std::move(record));
    }
    record.clear();
  };

  for (std::size_t pos = 0; pos < text.size(); ++pos) {
    const char c = text[pos];
    if (in_quotes) {
      if (c == '"') {
        if (pos + 1 < text.size() && text[pos + 1] == '"') {
          field.text.push_back('"');
          ++pos;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field.text.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (field_started) {
          throw DataError("line " + std::to_string(line) +
                          ": stray quote inside unquoted field");
        }
        in_quotes = true;
        field.quoted = true;
        field_started = true;
        break;
      case ',':
        end_field();
        break;
      case '\r':
        if (pos + 1 < text.size() && text[pos + 1] == '\n') break;
        [[fallthrough]];
      case '\n':
        end_record();
        ++line;
        break;
      default:
        if (field.quoted) {
          throw DataError("line " + std::to_string(line) +
                          ": text after closing quote");
        }
        field.text.push_back(c);
        field_started = true;
    }
  }
  if (in_quotes) throw DataError("unterminated quoted field");
  if (field_started || !record.empty()) end_record();
  return records;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw IoError("error reading '" + path + "'");
  return buffer.str();
}

inline void write_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.flush();
  if (!out) throw IoError("error writing '" + path + "'");
}

// Parses a finite double occupying the whole token (surrounding ASCII
// spaces allowed).
inline std::optional<double> parse_number(std::string_view token) {
  while (!token.empty() && token.front() == ' ') token.remove_prefix(1);
  while (!token.empty() && token.back() == ' ') token.remove_suffix(1);
  if (token.empty()) return std::nullopt;
  if (token.front() == '+') token.remove_prefix(1);
  double value = 0.0;
  auto [ptr, ec] =
      std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size() ||
      !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

inline std::string format_number(double value) {
  char buffer[64];
  auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  (void)ec;
  return std::string(buffer, ptr);
}

inline bool needs_quotes(std::string_view text, std::string_view missing) {
  if (text == missing || text.empty()) return true;
  return text.find_first_of(",\"\r\n") != std::string_view::npos ||
         text.front() == ' ' || text.back() == ' ';
}

inline void append_field(std::string& out, std::string_view text,
                         bool force_quotes) {
  if (!force_quotes) {
    out.append(text);
    return;
  }
  out.push_back('"');
  for (char c : text) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
}

inline std::string to_csv(const Dataset& d,
                          std::string_view missing = kDefaultMissingToken) {
  std::string out;
  for (std::size_t j = 0; j < d.cols(); ++j) {
    if (j) out.push_back(',');
    const auto& name = d.column(j).name;
    append_field(out, name, needs_quotes(name, missing));
  }
  out.push_back('\n');
  for (std::size_t i = 0; i < d.rows(); ++i) {
    for (std::size_t j = 0; j < d.cols(); ++j) {
      if (j) out.push_back(',');
      const Cell& cell = d.at(i, j);
      if (cell.is_missing()) {
        out.append(missing);
      } else if (cell.is_number()) {
        out.append(format_number(cell.number_value()));
      } else {
        const auto& label = d.column(j).categories[cell.label_code()];
        append_field(out, label, needs_quotes(label, missing));
      }
    }
    out.push_back('\n');
  }
  return out;
}

inline void write_csv(const Dataset& d, const std::string& path,
                      std::string_view missing = kDefaultMissingToken) {
  write_file(path, to_csv(d, missing));
}

namespace detail {

inline bool is_missing_field(const CsvField& f, std::string_view missing) {
  return !f.quoted && f.text == missing;
}

inline Schema infer_schema(const std::vector<CsvRecord>& records,
                           std::string_view missing) {
  const CsvRecord& header = records.front();
  Schema schema(header.size());
  for (std::size_t j = 0; j < header.size(); ++j) {
    schema[j].name = header[j].text;
    bool numeric = true;
    std::set<std::string> labels;
    for (std::size_t r = 1; r < records.size(); ++r) {
      const CsvField& f = records[r][j];
      if (is_missing_field(f, missing)) continue;
      labels.insert(f.text);
      if (numeric && !parse_number(f.text)) numeric = false;
    }
    if (numeric) {
      schema[j].kind = ColumnKind::kNumeric;
    } else {
      schema[j].kind = ColumnKind::kCategorical;
      schema[j].categories.assign(labels.begin(), labels.end());
    }
  }
  return schema;
}

}  // namespace detail

// Parses CSV text. With `schema` empty the column kinds are inferred: a
// column is numeric iff every non-missing token is a finite number;
// otherwise categorical with its distinct labels in sorted order. A
// categorical column given with an empty category list takes its labels
// from the data the same way.
inline Dataset parse_csv(std::string_view text,
                         const std::optional<Schema>& schema = std::nullopt,
                         std::string_view missing = kDefaultMissingToken) {
  const auto records = parse_csv_records(text);
  if (records.empty()) throw DataError("empty CSV input");
  const CsvRecord& header = records.front();
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != header.size()) {
      throw DataError("record " + std::to_string(r) + " has " +
                      std::to_string(records[r].size()) + " fields, header has " +
                      std::to_string(header.size()));
    }
  }

  Schema resolved;
  // file column -> schema column
  std::vector<std::size_t> mapping(header.size());
  if (!schema) {
    resolved = detail::infer_schema(records, missing);
    for (std::size_t j = 0; j < header.size(); ++j) mapping[j] = j;
  } else {
    resolved = *schema;
    if (resolved.size() != header.size()) {
      throw DataError("header has " + std::to_string(header.size()) +
                      " columns, schema declares " +
                      std::to_string(resolved.size()));
    }
    std::vector<bool> seen(resolved.size(), false);
    for (std::size_t j = 0; j < header.size(); ++j) {
      auto it = std::find_if(resolved.begin(), resolved.end(),
                             [&](const ColumnSchema& c) {
                               return c.name == header[j].text;
                             });
      if (it == resolved.end()) {
        throw DataError("header column '" + header[j].text +
                        "' is not in the schema");
      }
      const auto target = static_cast<std::size_t>(it - resolved.begin());
      if (seen[target]) {
        throw DataError("header repeats column '" + header[j].text + "'");
      }
      seen[target] = true;
      mapping[j] = target;
    }
    for (std::size_t j = 0; j < header.size(); ++j) {
      ColumnSchema& col = resolved[mapping[j]];
      if (col.kind == ColumnKind::kCategorical && col.categories.empty()) {
        std::set<std::string> labels;
        for (std::size_t r = 1; r < records.size(); ++r) {
          if (!detail::is_missing_field(records[r][j], missing)) {
            labels.insert(records[r][j].text);
          }
        }
        col.categories.assign(labels.begin(), labels.end());
      }
    }
  }

  const std::size_t p = resolved.size();
  std::vector<std::map<std::string, std::int32_t, std::less<>>> codes(p);
  for (std::size_t c = 0; c < p; ++c) {
    for (std::size_t k = 0; k < resolved[c].categories.size(); ++k) {
      codes[c].emplace(resolved[c].categories[k], static_cast<std::int32_t>(k));
    }
  }

  std::vector<Cell> cells((records.size() - 1) * p);
  for (std::size_t r = 1; r < records.size(); ++r) {
    for (std::size_t j = 0; j < header.size(); ++j) {
      const CsvField& f = records[r][j];
      const std::size_t c = mapping[j];
      Cell& cell = cells[(r - 1) * p + c];
      if (detail::is_missing_field(f, missing)) continue;
      if (resolved[c].kind == ColumnKind::kNumeric) {
        auto value = parse_number(f.text);
        if (!value) {
          throw DataError("record " + std::to_string(r) + ", column '" +
                          resolved[c].name + "': cannot parse '" + f.text +
                          "' as a number");
        }
        cell = Cell::number(*value);
      } else {
        auto it = codes[c].find(f.text);
        if (it == codes[c].end()) {
          throw DataError("record " + std::to_string(r) + ", column '" +
                          resolved[c].name + "': label '" + f.text +
                          "' is not a declared category");
        }
        cell = Cell::label(it->second);
      }
    }
  }
  return Dataset::create(std::move(resolved), std::move(cells));
}

inline Dataset load_csv(const std::string& path,
                        const std::optional<Schema>& schema = std::nullopt,
                        std::string_view missing = kDefaultMissingToken) {
  return parse_csv(read_file(path), schema, missing);
}

// Schema JSON: [{"name": ..., "kind": "numeric"|"categorical",
//                "categories": [...]}]
inline nlohmann::json schema_to_json(const Schema& schema) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& c : schema) {
    nlohmann::json col = {{"name", c.name}, {"kind", to_string(c.kind)}};
    if (c.kind == ColumnKind::kCategorical) col["categories"] = c.categories;
    out.push_back(std::move(col));
  }
  return out;
}

inline Schema schema_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw DataError("schema must be a JSON array");
  Schema schema;
  for (const auto& col : j) {
    if (!col.is_object() || !col.contains("name") || !col["name"].is_string()) {
      throw DataError("schema entry needs a string 'name'");
    }
    ColumnSchema c;
    c.name = col["name"].get<std::string>();
    const std::string kind = col.value("kind", std::string("numeric"));
    if (kind == "numeric") {
      c.kind = ColumnKind::kNumeric;
    } else if (kind == "categorical") {
      c.kind = ColumnKind::kCategorical;
      if (col.contains("categories")) {
        c.categories = col["categories"].get<std::vector<std::string>>();
      }
    } else {
      throw DataError("column '" + c.name + "': unknown kind '" + kind + "'");
    }
    schema.push_back(std::move(c));
  }
  return schema;
}

inline Schema load_schema(const std::string& path) {
  const std::string text = read_file(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError("schema '" + path + "': " + e.what());
  }
  return schema_from_json(j);
}

// FNV-1a, 64-bit. Used to fingerprint input files in run manifests.
inline std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int k = 15; k >= 0; --k) {
    out[k] = kDigits[v & 0xF];
    v >>= 4;
  }
  return out;
}

}  // namespace rwn
