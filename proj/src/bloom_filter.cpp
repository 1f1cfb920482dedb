#include "hdb/bloom_filter.hpp"

#include <cmath>

#include "hdb/errors.hpp"

namespace hdb {

BloomSizing bloom_sizing(uint64_t capacity, double target_fpr) {
  if (!(target_fpr > 0.0 && target_fpr < 1.0)) {
    throw ConfigError("bloom target_fpr must be in (0, 1)");
  }
  if (capacity < 1) capacity = 1;
  const double ln2 = std::log(2.0);
  double bits = std::ceil(-double(capacity) * std::log(target_fpr) / (ln2 * ln2));
  double hashes = std::round(bits / double(capacity) * ln2);
  BloomSizing s;
  s.bits = bits < 1.0 ? 1 : uint64_t(bits);
  s.num_hashes = hashes < 1.0 ? 1 : uint32_t(hashes);
  return s;
}

BloomFilter::BloomFilter(uint64_t capacity, double target_fpr, uint64_t seed)
    : capacity_(capacity < 1 ? 1 : capacity), seed_(seed) {
  BloomSizing s = bloom_sizing(capacity_, target_fpr);
  bits_ = s.bits;
  num_hashes_ = s.num_hashes;
  words_.assign((bits_ + 63) / 64, 0);
}

void BloomFilter::insert(const Hash128& key) {
  for (uint32_t i = 0; i < num_hashes_; i++) {
    uint64_t pos = position(key, i);
    words_[pos >> 6] |= uint64_t(1) << (pos & 63);
  }
}

bool BloomFilter::contains(const Hash128& key) const {
  for (uint32_t i = 0; i < num_hashes_; i++) {
    uint64_t pos = position(key, i);
    if (!(words_[pos >> 6] & (uint64_t(1) << (pos & 63)))) return false;
  }
  return true;
}

BloomFilter bloom_build(std::span<const Hash128> keys, double target_fpr, uint64_t seed) {
  BloomFilter f(keys.size(), target_fpr, seed);
  for (const Hash128& k : keys) f.insert(k);
  return f;
}

}  // namespace hdb
