#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "hdb/model.hpp"

namespace hdb {

/// Execution concerns, separate from the algorithm parameters.
struct EngineOptions {
  uint32_t partitions = 1;
  /// Replaces the Bloom filter over truly over-sized keys with an exact set,
  /// removing the (tiny, seed-deterministic) chance that a false positive
  /// discards a right-sized key as a duplicate. Meant for oracle testing.
  bool exact_membership = false;
  /// When set, receives one line of progress counters per iteration.
  std::ostream* log = nullptr;
};

enum class SizeClass { RightSized, PossiblyOversized, Discarded };

/// The classification rule applied to a sketch estimate: at most
/// max_block_size is right-sized; above that, keys whose estimate stays
/// within max_similarity of the smaller parent's size are worth intersecting
/// further, and near-parent-sized keys are discarded. Keys without a parent
/// (top level) are never similarity-discarded.
SizeClass classify_estimate(uint64_t estimate, uint64_t psize, const EngineParams& params);

struct RoughStats {
  uint64_t assignments_in = 0;  // (record, key) pairs examined
  uint64_t right_assignments = 0;
  uint64_t oversized_assignments = 0;
  uint64_t discarded_assignments = 0;  // similarity filter
};

struct ExactStats {
  uint64_t assignments_in = 0;
  uint64_t distinct_keys = 0;
  uint64_t truly_oversized_keys = 0;
  uint64_t duplicate_keys_dropped = 0;  // identical-membership blocks removed
  uint64_t surviving_oversized_keys = 0;
  uint64_t corrected_right_assignments = 0;
  uint64_t oversized_assignments_out = 0;
  uint64_t duplicate_assignments_dropped = 0;
};

struct IntersectStats {
  uint64_t records_in = 0;
  uint64_t records_dropped_max_keys = 0;
  uint64_t child_assignments_out = 0;
};

struct IterationStats {
  uint32_t iteration = 0;  // 0 = top-level keys, n = after n intersection rounds
  IntersectStats intersect;  // all zero for iteration 0
  RoughStats rough;
  ExactStats exact;
};

struct EngineStats {
  std::vector<IterationStats> iterations;
  bool iteration_cap_hit = false;
  uint64_t cap_dropped_keys = 0;  // distinct over-sized keys abandoned at the cap
  uint64_t singleton_keys_dropped = 0;
  uint64_t final_blocks = 0;       // distinct emitted blocks, all sizes in [2, max]
  uint64_t final_assignments = 0;  // (record, key) pairs across emitted blocks
  uint64_t records_with_keys = 0;
};

/// Splits candidates into right-sized and possibly-over-sized key sets using
/// a count-min sketch built over this call's assignments. Estimates never
/// undercount, so nothing truly over-sized lands in right. Row order is
/// preserved; rows left with no keys are dropped. Output is independent of
/// partition count.
struct RoughResult {
  std::vector<KeyedRecord> right;
  std::vector<KeyedRecord> possibly_oversized;
  RoughStats stats;
};
RoughResult rough_oversize_detection(const std::vector<KeyedRecord>& candidates,
                                     const EngineParams& params, uint32_t partitions = 1);

/// One grouped pass computes each key's exact count and membership hash.
/// Keys the sketch merely overcounted come back as corrected_right (detected
/// by absence from the over-sized membership filter); of the truly
/// over-sized keys, one survivor per distinct member set is kept (smallest
/// key hash wins) with exact sizes attached, and the other duplicates are
/// discarded.
struct ExactResult {
  std::vector<KeyedRecord> corrected_right;
  std::vector<KeyedRecord> oversized;
  ExactStats stats;
};
ExactResult exactly_count_and_dedupe(const std::vector<KeyedRecord>& possibly_oversized,
                                     const EngineParams& params, const EngineOptions& opts = {});

/// Pairwise-combines each record's over-sized keys into C(n,2) child keys,
/// each carrying psize = the smaller parent's exact size. Records holding
/// more than max_keys keys are dropped entirely; records with a single key
/// contribute nothing.
struct IntersectResult {
  std::vector<KeyedRecord> children;
  IntersectStats stats;
};
IntersectResult intersect_keys(const std::vector<KeyedRecord>& oversized,
                               const EngineParams& params, uint32_t partitions = 1);

/// The full iteration: classify, correct and dedupe, intersect what is still
/// over-sized, and repeat until no over-sized keys remain or the iteration
/// cap is hit (logged; remaining over-sized keys are dropped). Returns every
/// record's right-sized keys with exact block sizes, blocks of size 1
/// removed, records sorted by rid, keys sorted by hash.
struct EngineResult {
  std::vector<KeyedRecord> right_sized;
  EngineStats stats;
};
EngineResult hashed_dynamic_blocking(std::vector<KeyedRecord> index, const EngineParams& params,
                                     const EngineOptions& opts = {});

}  // namespace hdb
