#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hdb/dataset.hpp"
#include "hdb/model.hpp"

namespace hdb {

/// Labeled positive pairs. complete means the set is full ground truth for
/// the dataset, which pair_quality requires.
struct LabelSet {
  std::vector<std::pair<RecordId, RecordId>> positives;  // canonical, sorted, distinct
  bool complete = false;
};

/// Reads a two-column "rid1,rid2" label file (header optional). Throws
/// DataError on malformed lines or self-pairs.
LabelSet read_labels(const std::string& path, bool complete);

/// Builds labels from an entity-id column: every pair of records sharing the
/// same non-empty id is a positive. The result is complete ground truth with
/// respect to that column. Throws DataError on multi-valued id cells.
LabelSet labels_from_entity_column(const RecordTable& table, const std::string& entity_column);

/// Baseline: materialize top-level blocks, throw away blocks larger than
/// max_block_size, emit the surviving blocks' distinct pairs (sorted).
std::vector<std::pair<RecordId, RecordId>> threshold_blocking(
    const std::vector<KeyedRecord>& index, uint64_t max_block_size, uint32_t partitions = 1);

/// Exact number of distinct unordered pairs sharing at least one key, with
/// no size cutoff. Counts without retaining the full pair set in one vector.
uint64_t naive_pair_count(const std::vector<KeyedRecord>& index, uint32_t partitions = 1);

/// |P  intersect L+| / |L+|. The pair list must be sorted and distinct.
/// Throws DataError when labels are empty.
double pair_completeness(std::span<const std::pair<RecordId, RecordId>> pairs,
                         const LabelSet& labels);

/// |P intersect L+| / |P|. Meaningful only against complete ground truth;
/// throws DataError when labels are incomplete or P is empty.
double pair_quality(std::span<const std::pair<RecordId, RecordId>> pairs,
                    const LabelSet& labels);

}  // namespace hdb
