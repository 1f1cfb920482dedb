#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hdb/hash.hpp"

namespace hdb {

struct BloomSizing {
  uint64_t bits;
  uint32_t num_hashes;
};

/// Standard Bloom sizing: bits = ceil(-n ln p / (ln 2)^2), hashes =
/// round(bits/n * ln 2), both clamped to at least 1.
BloomSizing bloom_sizing(uint64_t capacity, double target_fpr);

/// Bloom filter over 128-bit keys. Never reports an inserted key as absent;
/// reports a small fraction of absent keys as present, governed by the
/// target false-positive rate at the stated capacity.
class BloomFilter {
 public:
  BloomFilter(uint64_t capacity, double target_fpr, uint64_t seed);

  void insert(const Hash128& key);
  bool contains(const Hash128& key) const;

  uint64_t bits() const { return bits_; }
  uint32_t num_hashes() const { return num_hashes_; }
  uint64_t capacity() const { return capacity_; }

 private:
  uint64_t position(const Hash128& key, uint32_t i) const {
    uint64_t h1 = hash128_with_seed(key, seed_);
    uint64_t h2 = hash128_with_seed(key, ~seed_) | 1;
    return (h1 + i * h2) % bits_;
  }

  uint64_t capacity_;
  uint64_t bits_;
  uint32_t num_hashes_;
  uint64_t seed_;
  std::vector<uint64_t> words_;
};

/// Builds a filter sized for the given key set and inserts all of it.
BloomFilter bloom_build(std::span<const Hash128> keys, double target_fpr, uint64_t seed);

}  // namespace hdb
