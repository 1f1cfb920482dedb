#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "hdb/errors.hpp"
#include "hdb/hash.hpp"

namespace hdb {

/// Sentinel for psize when a key has no parent block, i.e. it came straight
/// from an attribute rather than from an intersection. The similarity filter
/// does not apply to such keys.
inline constexpr uint64_t kNoParent = std::numeric_limits<uint64_t>::max();

/// A blocking key as carried through the engine. size is the exact member
/// count once known (0 before counting); psize is the size of the smaller of
/// the two parent blocks for intersected keys.
struct AnnotatedKey {
  Hash128 key;
  uint64_t size = 0;
  uint64_t psize = kNoParent;
};

/// One record's current key assignments. keys are sorted by key hash and
/// duplicate-free.
struct KeyedRecord {
  RecordId rid = 0;
  std::vector<AnnotatedKey> keys;
};

struct EngineParams {
  uint64_t max_block_size = 500;
  uint32_t max_keys = 80;
  double max_similarity = 0.9;
  uint32_t max_iterations = 20;
  double bloom_target_fpr = 1e-8;
  uint32_t cms_width = 1u << 20;
  uint32_t cms_depth = 5;
  uint64_t seed = 42;

  void validate() const {
    if (max_block_size < 1) throw ConfigError("max_block_size must be >= 1");
    if (max_keys < 1) throw ConfigError("max_keys must be >= 1");
    if (!(max_similarity > 0.0 && max_similarity <= 1.0))
      throw ConfigError("max_similarity must be in (0, 1]");
    if (max_iterations < 1) throw ConfigError("max_iterations must be >= 1");
    if (!(bloom_target_fpr > 0.0 && bloom_target_fpr < 1.0))
      throw ConfigError("bloom_target_fpr must be in (0, 1)");
    if (cms_width < 1) throw ConfigError("cms_width must be >= 1");
    if (cms_depth < 1) throw ConfigError("cms_depth must be >= 1");
  }
};

}  // namespace hdb
