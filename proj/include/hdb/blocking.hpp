#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hdb/dataset.hpp"
#include "hdb/model.hpp"
#include "hdb/text.hpp"

namespace hdb {

enum class StrategyKind { Identity, Token, Lsh };

struct ColumnStrategy {
  std::string column;  // ignored for token strategies, which span all columns
  StrategyKind kind = StrategyKind::Identity;
  Tokenizer tokenizer;  // used by token and lsh
  uint32_t lsh_bands = 0;
  uint32_t lsh_band_width = 0;
};

struct BlockingConfig {
  std::vector<ColumnStrategy> strategies;
  uint64_t seed = 42;
};

/// Parses the JSON config document. Schema:
///   {"seed": 42, "strategies": [
///     {"column": "year", "kind": "identity"},
///     {"kind": "token", "tokenizer": "word"},
///     {"column": "title", "kind": "lsh", "bands": 6, "band_width": 7,
///      "tokenizer": "char-qgram", "gram": 3}]}
/// Throws ConfigError on unknown kinds/tokenizers or missing fields.
BlockingConfig parse_blocking_config(const std::string& json_text);
BlockingConfig load_blocking_config(const std::string& path);

/// Structural checks plus column resolution against an actual table schema.
/// Throws ConfigError listing the available columns on a miss.
void validate_blocking_config(const BlockingConfig& config,
                              const std::vector<std::string>& columns);

/// One key per distinct non-empty normalized value of the column.
std::vector<Hash128> identity_keys(std::string_view column,
                                   std::span<const std::string> raw_values);

/// Keys for every distinct token across all of a record's attributes, hashed
/// without any attribute id: the same token anywhere yields the same key.
std::vector<Hash128> token_keys(std::span<const std::vector<std::string>> record_cells,
                                const Tokenizer& tok);

/// Distinct tokens of one column's values, normalized; input to lsh_keys.
std::vector<std::string> column_tokens(std::span<const std::string> raw_values,
                                       const Tokenizer& tok);

/// b band keys from the minhash signature of the token set: band i hashes its
/// w signature positions into a digest, keyed under (column, band i) so bands
/// never collide across columns or with identity keys. Empty tokens -> {}.
std::vector<Hash128> lsh_keys(std::span<const std::string> tokens,
                              const ColumnStrategy& strategy, uint64_t seed);

/// Probability that two sets at Jaccard j share at least one of b band keys
/// of width w: 1 - (1 - j^w)^b.
double lsh_probability(uint32_t bands, uint32_t band_width, double jaccard);

/// Monte-Carlo counterpart of lsh_probability: samples random token-set
/// pairs constructed at exactly the requested Jaccard (j is quantized to a
/// small exact fraction, fine for 0.01-step grids) and measures how often at
/// least one band of their minhash signatures agrees. Deterministic in seed.
double lsh_band_share_rate(uint32_t bands, uint32_t band_width, double jaccard,
                           uint32_t samples, uint64_t seed);

/// Runs every strategy over every record and returns one KeyedRecord per
/// record: the union of all strategies' keys, sorted by hash and
/// duplicate-free, sizes unknown, no parent. Output is independent of
/// partition count.
std::vector<KeyedRecord> build_index(const RecordTable& table, const BlockingConfig& config,
                                     uint32_t partitions = 1);

}  // namespace hdb
