#pragma once

#include <cstdint>
#include <vector>

#include "hdb/hash.hpp"

namespace hdb {

/// Count-Min sketch over 128-bit keys. Estimates are one-sided: an estimate
/// is always >= the true count, so a key whose estimate is small is
/// guaranteed to be small. Counters saturate at the uint32 ceiling instead of
/// wrapping, which preserves the one-sided property for absurd stream sizes.
class CountMinSketch {
 public:
  CountMinSketch(uint32_t width, uint32_t depth, uint64_t seed);

  void increment(const Hash128& key);
  uint64_t estimate(const Hash128& key) const;

  /// Elementwise saturating sum. Both sketches must share width, depth and
  /// seed; throws ConfigError otherwise.
  void merge(const CountMinSketch& other);

  uint32_t width() const { return width_; }
  uint32_t depth() const { return depth_; }
  uint64_t seed() const { return seed_; }

  /// Raw counter table, row-major, for bit-exactness checks in tests.
  const std::vector<uint32_t>& table() const { return table_; }

 private:
  size_t cell(uint32_t row, const Hash128& key) const {
    return size_t(row) * width_ + hash128_with_seed(key, row_seeds_[row]) % width_;
  }

  uint32_t width_;
  uint32_t depth_;
  uint64_t seed_;
  std::vector<uint64_t> row_seeds_;
  std::vector<uint32_t> table_;
};

}  // namespace hdb
