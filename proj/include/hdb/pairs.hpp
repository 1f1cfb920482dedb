#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hdb/model.hpp"

namespace hdb {

/// One emitted candidate pair, attributed to the largest block containing
/// both records.
struct CandidatePair {
  RecordId rid1 = 0;  // rid1 < rid2
  RecordId rid2 = 0;
  Hash128 block;
};

/// A block's contribution to the pair output: its sorted members plus which
/// of its C(n,2) pairs it retained. An empty bitmap means every pair was
/// retained; otherwise bit pair_bit_index(i,j,n) is set iff the (i,j) member
/// pair was retained (bits packed LSB-first per byte).
struct BlockPairSet {
  Hash128 block;
  std::vector<RecordId> members;
  uint64_t retained = 0;
  std::vector<uint8_t> bitmap;
};

/// Position of member pair (i, j) in the flattened upper triangle:
/// (0,1),(0,2),...,(0,n-1),(1,2),... Bijective onto [0, C(n,2)).
/// Requires 0 <= i < j < n.
uint64_t pair_bit_index(uint64_t i, uint64_t j, uint64_t n);

/// Picks the winning block for one pair: greatest member count, ties broken
/// by smallest key hash. Invariant to candidate ordering.
struct BlockRef {
  Hash128 key;
  uint64_t size = 0;
};
Hash128 tie_break_largest(std::span<const BlockRef> candidates);

struct PairStats {
  uint64_t blocks_materialized = 0;  // distinct blocks of size >= 2
  uint64_t raw_pairs = 0;            // sum of C(n,2) over blocks
  uint64_t distinct_pairs = 0;
  uint64_t blocks_emitted = 0;       // blocks retaining at least one pair
  uint64_t blocks_with_bitmap = 0;
};

struct PairResult {
  std::vector<CandidatePair> pairs;      // sorted by (rid1, rid2)
  std::vector<BlockPairSet> blocks;      // sorted by block key
  PairStats stats;
};

/// Materializes the right-sized blocks, generates each block's pairs,
/// deduplicates globally (each pair keeps its occurrence from the largest
/// block) and regroups the survivors per block. Blocks that retained no
/// pairs are omitted. Output is independent of partition count.
PairResult remove_dupe_pairs(const std::vector<KeyedRecord>& right_sized,
                             uint32_t partitions = 1);

/// Pair file: "# hdb-pairs v1" header, then one "rid1,rid2,block_key_hex"
/// line per pair, sorted by (rid1, rid2).
void write_pair_file(const std::string& path, const std::vector<CandidatePair>& pairs);

/// Reads the first two columns of a pair file (header and block column
/// optional), canonicalizes, sorts and dedupes. Throws DataError on junk.
std::vector<std::pair<RecordId, RecordId>> read_pair_file(const std::string& path);

/// Block-pair-set file: "# hdb-block-pairs v1" header, then one line per
/// block: "key_hex,size,retained,members space-separated,bitmap_base64"
/// (last field empty when all pairs were retained).
void write_block_pair_file(const std::string& path, const std::vector<BlockPairSet>& blocks);

}  // namespace hdb
