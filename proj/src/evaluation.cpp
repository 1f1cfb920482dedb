#include "hdb/evaluation.hpp"

#include <algorithm>
#include <unordered_map>

#include "hdb/errors.hpp"
#include "hdb/pairs.hpp"
#include "hdb/parallel.hpp"

namespace hdb {

LabelSet read_labels(const std::string& path, bool complete) {
  LabelSet labels;
  labels.positives = read_pair_file(path);
  labels.complete = complete;
  return labels;
}

LabelSet labels_from_entity_column(const RecordTable& table, const std::string& entity_column) {
  auto col = table.column_index(entity_column);
  if (!col) throw DataError("entity column \"" + entity_column + "\" not in input");
  std::unordered_map<std::string, std::vector<RecordId>> groups;
  for (size_t row = 0; row < table.num_records(); row++) {
    const auto& cell = table.cells[row][*col];
    if (cell.empty()) continue;
    if (cell.size() > 1) {
      throw DataError("entity column \"" + entity_column + "\" is multi-valued at record " +
                      std::to_string(table.rids[row]));
    }
    if (!cell[0].empty()) groups[cell[0]].push_back(table.rids[row]);
  }
  LabelSet labels;
  labels.complete = true;
  for (auto& [id, rids] : groups) {
    if (rids.size() < 2) continue;
    std::sort(rids.begin(), rids.end());
    for (size_t i = 0; i < rids.size(); i++) {
      for (size_t j = i + 1; j < rids.size(); j++) {
        labels.positives.emplace_back(rids[i], rids[j]);
      }
    }
  }
  std::sort(labels.positives.begin(), labels.positives.end());
  labels.positives.erase(std::unique(labels.positives.begin(), labels.positives.end()),
                         labels.positives.end());
  return labels;
}

namespace {

using BlockMap = std::unordered_map<Hash128, std::vector<RecordId>, Hash128Hasher>;

BlockMap materialize(const std::vector<KeyedRecord>& index, uint32_t partitions) {
  if (partitions < 1) partitions = 1;
  auto ranges = partition_ranges(index.size(), partitions);
  std::vector<BlockMap> partial(ranges.size());
  for_each_partition(index.size(), partitions, [&](uint32_t part, size_t begin, size_t end) {
    BlockMap& map = partial[part];
    for (size_t i = begin; i < end; i++) {
      for (const AnnotatedKey& k : index[i].keys) map[k.key].push_back(index[i].rid);
    }
  });
  BlockMap merged = std::move(partial[0]);
  for (size_t p = 1; p < partial.size(); p++) {
    for (auto& [key, members] : partial[p]) {
      auto& dst = merged[key];
      dst.insert(dst.end(), members.begin(), members.end());
    }
    partial[p].clear();
  }
  return merged;
}

}  // namespace

std::vector<std::pair<RecordId, RecordId>> threshold_blocking(
    const std::vector<KeyedRecord>& index, uint64_t max_block_size, uint32_t partitions) {
  BlockMap blocks = materialize(index, partitions);
  std::vector<std::pair<RecordId, RecordId>> pairs;
  for (auto& [key, members] : blocks) {
    if (members.size() < 2 || members.size() > max_block_size) continue;
    std::sort(members.begin(), members.end());
    for (size_t i = 0; i < members.size(); i++) {
      for (size_t j = i + 1; j < members.size(); j++) {
        pairs.emplace_back(members[i], members[j]);
      }
    }
  }
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  return pairs;
}

namespace {

// Distinct-pair counter that survives heavyweight inputs: pairs are routed
// to buckets by hash, buckets are compacted (sort + unique) whenever they
// grow past a bound, so peak memory stays near the number of DISTINCT pairs
// rather than the raw enumeration count.
class DistinctPairCounter {
 public:
  uint64_t count_all(const BlockMap& blocks) {
    for (const auto& [key, members_raw] : blocks) {
      if (members_raw.size() < 2) continue;
      std::vector<RecordId> members = members_raw;
      std::sort(members.begin(), members.end());
      for (size_t i = 0; i < members.size(); i++) {
        for (size_t j = i + 1; j < members.size(); j++) {
          add(members[i], members[j]);
        }
      }
    }
    uint64_t total = 0;
    for (auto& b : buckets_) {
      compact(b);
      total += b.sorted.size();
    }
    return total;
  }

 private:
  struct Bucket {
    std::vector<std::pair<RecordId, RecordId>> sorted;  // compacted, distinct
    std::vector<std::pair<RecordId, RecordId>> fresh;
  };

  void add(RecordId a, RecordId b) {
    Bucket& bucket = buckets_[mix64(a ^ mix64(b)) & (kBuckets - 1)];
    bucket.fresh.emplace_back(a, b);
    if (bucket.fresh.size() >= kCompactAt) compact(bucket);
  }

  static void compact(Bucket& bucket) {
    if (bucket.fresh.empty()) return;
    std::sort(bucket.fresh.begin(), bucket.fresh.end());
    bucket.fresh.erase(std::unique(bucket.fresh.begin(), bucket.fresh.end()),
                       bucket.fresh.end());
    std::vector<std::pair<RecordId, RecordId>> merged;
    merged.reserve(bucket.sorted.size() + bucket.fresh.size());
    std::set_union(bucket.sorted.begin(), bucket.sorted.end(), bucket.fresh.begin(),
                   bucket.fresh.end(), std::back_inserter(merged));
    bucket.sorted = std::move(merged);
    bucket.fresh.clear();
    bucket.fresh.shrink_to_fit();
  }

  static constexpr size_t kBuckets = 64;
  static constexpr size_t kCompactAt = 1u << 20;
  Bucket buckets_[kBuckets];
};

}  // namespace

uint64_t naive_pair_count(const std::vector<KeyedRecord>& index, uint32_t partitions) {
  BlockMap blocks = materialize(index, partitions);
  DistinctPairCounter counter;
  return counter.count_all(blocks);
}

namespace {

uint64_t intersection_size(std::span<const std::pair<RecordId, RecordId>> pairs,
                           const LabelSet& labels) {
  uint64_t hits = 0;
  for (const auto& label : labels.positives) {
    if (std::binary_search(pairs.begin(), pairs.end(), label)) hits++;
  }
  return hits;
}

}  // namespace

double pair_completeness(std::span<const std::pair<RecordId, RecordId>> pairs,
                         const LabelSet& labels) {
  if (labels.positives.empty()) {
    throw DataError("pair completeness is undefined for an empty label set");
  }
  return double(intersection_size(pairs, labels)) / double(labels.positives.size());
}

double pair_quality(std::span<const std::pair<RecordId, RecordId>> pairs,
                    const LabelSet& labels) {
  if (!labels.complete) {
    throw DataError(
        "pair quality needs complete ground truth: against a partial label set the "
        "denominator |P| counts pairs whose true status is unknown, so the ratio is "
        "meaningless; rerun with labels marked complete if they are");
  }
  if (pairs.empty()) {
    throw DataError("pair quality is undefined for an empty pair set");
  }
  return double(intersection_size(pairs, labels)) / double(pairs.size());
}

}  // namespace hdb
