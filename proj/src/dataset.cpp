#include "hdb/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "hdb/errors.hpp"

namespace hdb {

std::optional<size_t> RecordTable::column_index(std::string_view name) const {
  for (size_t i = 0; i < columns.size(); i++) {
    if (columns[i] == name) return i;
  }
  return std::nullopt;
}

size_t RecordTable::add_row(RecordId rid) {
  rids.push_back(rid);
  cells.emplace_back(columns.size());
  return rids.size() - 1;
}

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open input file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw DataError("error while reading: " + path);
  return std::move(buf).str();
}

// One delimited row starting at pos. Returns false when the input is
// exhausted. Handles quoted fields ("" escapes, embedded delimiters and
// newlines) and both LF and CRLF endings.
bool next_csv_row(const std::string& text, size_t& pos, char delim,
                  std::vector<std::string>& fields, size_t& row_start_line, size_t& line) {
  fields.clear();
  if (pos >= text.size()) return false;
  row_start_line = line;
  std::string cur;
  bool in_quotes = false;
  bool row_open = true;
  while (row_open) {
    if (pos >= text.size()) {
      if (in_quotes) throw DataError("unterminated quote in row starting at line " +
                                     std::to_string(row_start_line));
      break;
    }
    char c = text[pos];
    if (in_quotes) {
      if (c == '"') {
        if (pos + 1 < text.size() && text[pos + 1] == '"') {
          cur.push_back('"');
          pos += 2;
        } else {
          in_quotes = false;
          pos++;
        }
      } else {
        if (c == '\n') line++;
        cur.push_back(c);
        pos++;
      }
      continue;
    }
    switch (c) {
      case '"':
        in_quotes = true;
        pos++;
        break;
      case '\r':
        pos++;
        break;
      case '\n':
        line++;
        pos++;
        row_open = false;
        break;
      default:
        if (c == delim) {
          fields.push_back(std::move(cur));
          cur.clear();
        } else {
          cur.push_back(c);
        }
        pos++;
    }
  }
  fields.push_back(std::move(cur));
  return true;
}

RecordId parse_rid(const std::string& field, size_t row) {
  if (field.empty()) throw DataError("empty record id at row " + std::to_string(row));
  RecordId rid = 0;
  for (char c : field) {
    if (c < '0' || c > '9')
      throw DataError("record id is not a decimal integer at row " + std::to_string(row) +
                      ": \"" + field + "\"");
    RecordId next = rid * 10 + RecordId(c - '0');
    if (next / 10 != rid) throw DataError("record id overflows at row " + std::to_string(row));
    rid = next;
  }
  return rid;
}

}  // namespace

RecordTable read_csv(const std::string& path, const CsvOptions& opt) {
  std::string text = read_file(path);
  size_t pos = 0;
  size_t line = 1;
  size_t row_line = 1;
  std::vector<std::string> fields;

  if (!next_csv_row(text, pos, opt.delimiter, fields, row_line, line)) {
    throw DataError("empty input file: " + path);
  }
  std::optional<size_t> id_col;
  RecordTable table;
  for (size_t i = 0; i < fields.size(); i++) {
    if (!opt.id_column.empty() && fields[i] == opt.id_column) {
      if (id_col) throw DataError("duplicate id column \"" + opt.id_column + "\" in header");
      id_col = i;
    } else {
      table.columns.push_back(fields[i]);
    }
  }
  if (!opt.id_column.empty() && !id_col) {
    throw DataError("id column \"" + opt.id_column + "\" not found in header of " + path);
  }

  std::unordered_set<RecordId> seen_ids;
  size_t row_ordinal = 0;
  const size_t ncols = fields.size();
  while (next_csv_row(text, pos, opt.delimiter, fields, row_line, line)) {
    if (fields.size() == 1 && fields[0].empty()) continue;  // trailing blank line
    if (fields.size() != ncols) {
      throw DataError("row " + std::to_string(row_ordinal) + " (line " +
                      std::to_string(row_line) + ") has " + std::to_string(fields.size()) +
                      " fields, expected " + std::to_string(ncols));
    }
    RecordId rid = id_col ? parse_rid(fields[*id_col], row_ordinal) : RecordId(row_ordinal);
    if (id_col && !seen_ids.insert(rid).second) {
      throw DataError("duplicate record id " + std::to_string(rid) + " at row " +
                      std::to_string(row_ordinal));
    }
    size_t row = table.add_row(rid);
    size_t out_col = 0;
    for (size_t i = 0; i < ncols; i++) {
      if (id_col && i == *id_col) continue;
      if (!fields[i].empty()) table.cells[row][out_col].push_back(std::move(fields[i]));
      out_col++;
    }
    row_ordinal++;
  }
  return table;
}

namespace {

std::string json_scalar_to_string(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

}  // namespace

RecordTable read_jsonl(const std::string& path, const JsonlOptions& opt) {
  std::string text = read_file(path);

  std::vector<nlohmann::json> rows;
  std::map<std::string, size_t> col_of;  // ordered -> columns sorted by name
  size_t line_no = 0;
  size_t start = 0;
  while (start <= text.size()) {
    size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    std::string_view lv(text.data() + start, end - start);
    if (!lv.empty() && lv.back() == '\r') lv.remove_suffix(1);
    size_t next = end + 1;
    line_no++;
    if (!lv.empty()) {
      nlohmann::json obj = nlohmann::json::parse(lv, nullptr, false);
      if (obj.is_discarded() || !obj.is_object()) {
        throw DataError("line " + std::to_string(line_no) + " of " + path +
                        " is not a JSON object");
      }
      for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (it.key() != opt.id_column) col_of.emplace(it.key(), 0);
      }
      rows.push_back(std::move(obj));
    }
    if (end == text.size()) break;
    start = next;
  }

  RecordTable table;
  for (auto& [name, idx] : col_of) {
    idx = table.columns.size();
    table.columns.push_back(name);
  }

  std::unordered_set<RecordId> seen_ids;
  for (size_t r = 0; r < rows.size(); r++) {
    const nlohmann::json& obj = rows[r];
    RecordId rid = RecordId(r);
    if (!opt.id_column.empty()) {
      auto it = obj.find(opt.id_column);
      if (it == obj.end()) {
        throw DataError("id key \"" + opt.id_column + "\" missing at record " +
                        std::to_string(r));
      }
      if (it->is_number_unsigned()) {
        rid = it->get<RecordId>();
      } else if (it->is_string()) {
        rid = parse_rid(it->get<std::string>(), r);
      } else {
        throw DataError("id key \"" + opt.id_column + "\" is not an unsigned integer at record " +
                        std::to_string(r));
      }
      if (!seen_ids.insert(rid).second) {
        throw DataError("duplicate record id " + std::to_string(rid) + " at record " +
                        std::to_string(r));
      }
    }
    size_t row = table.add_row(rid);
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      if (it.key() == opt.id_column) continue;
      auto& cell = table.cells[row][col_of[it.key()]];
      const nlohmann::json& v = it.value();
      if (v.is_null()) continue;
      if (v.is_array()) {
        for (const auto& e : v) {
          if (!e.is_null()) cell.push_back(json_scalar_to_string(e));
        }
      } else {
        cell.push_back(json_scalar_to_string(v));
      }
    }
  }
  return table;
}

void merge_tables(RecordTable& dst, RecordTable&& src) {
  if (dst.columns.empty() && dst.rids.empty()) {
    dst = std::move(src);
    return;
  }
  std::vector<size_t> col_map(src.columns.size());
  for (size_t c = 0; c < src.columns.size(); c++) {
    if (auto idx = dst.column_index(src.columns[c])) {
      col_map[c] = *idx;
    } else {
      col_map[c] = dst.columns.size();
      dst.columns.push_back(src.columns[c]);
    }
  }
  for (auto& row : dst.cells) row.resize(dst.columns.size());

  std::unordered_set<RecordId> seen(dst.rids.begin(), dst.rids.end());
  for (size_t r = 0; r < src.num_records(); r++) {
    if (!seen.insert(src.rids[r]).second) {
      throw DataError("duplicate record id " + std::to_string(src.rids[r]) +
                      " across input files");
    }
    size_t row = dst.add_row(src.rids[r]);
    for (size_t c = 0; c < src.columns.size(); c++) {
      dst.cells[row][col_map[c]] = std::move(src.cells[r][c]);
    }
  }
}

}  // namespace hdb
