#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hdb/hash.hpp"

namespace hdb {

/// Column-oriented record store. A cell holds zero or more values: delimited
/// text always yields zero (empty field) or one, JSON-lines may yield several
/// via arrays. Values are stored raw; normalization happens during block
/// building.
struct RecordTable {
  std::vector<std::string> columns;
  std::vector<RecordId> rids;
  // cells[row][col] -> values
  std::vector<std::vector<std::vector<std::string>>> cells;

  size_t num_records() const { return rids.size(); }
  std::optional<size_t> column_index(std::string_view name) const;

  /// Appends a row of empty cells and returns its index.
  size_t add_row(RecordId rid);
};

struct CsvOptions {
  char delimiter = ',';
  /// When set, this column supplies record ids (decimal, unique) and is
  /// removed from the table; otherwise ids are 0-based input ordinals.
  std::string id_column;
};

struct JsonlOptions {
  std::string id_column;
};

/// Reads a delimited text file with a header row. Quoted fields may contain
/// the delimiter, doubled quotes and newlines. Throws DataError with the row
/// number on malformed input.
RecordTable read_csv(const std::string& path, const CsvOptions& opt = {});

/// Reads a JSON-lines file. Columns are the union of keys across all lines,
/// sorted by name. Array values become multi-valued cells; null and missing
/// keys become empty cells; scalars are stringified. Throws DataError with
/// the line number on malformed input.
RecordTable read_jsonl(const std::string& path, const JsonlOptions& opt = {});

/// Appends src's rows to dst, unioning columns (cells of columns absent on
/// one side stay empty). Throws DataError on duplicate record ids.
void merge_tables(RecordTable& dst, RecordTable&& src);

}  // namespace hdb
