#include "hdb/count_min_sketch.hpp"

#include <limits>

#include "hdb/errors.hpp"

namespace hdb {

CountMinSketch::CountMinSketch(uint32_t width, uint32_t depth, uint64_t seed)
    : width_(width), depth_(depth), seed_(seed) {
  if (width_ < 1) throw ConfigError("count-min sketch width must be >= 1");
  if (depth_ < 1) throw ConfigError("count-min sketch depth must be >= 1");
  row_seeds_.reserve(depth_);
  for (uint32_t i = 0; i < depth_; i++) {
    row_seeds_.push_back(mix64(seed_ ^ (0x9e3779b97f4a7c15ULL * (i + 1))));
  }
  table_.assign(size_t(width_) * depth_, 0);
}

void CountMinSketch::increment(const Hash128& key) {
  for (uint32_t row = 0; row < depth_; row++) {
    uint32_t& c = table_[cell(row, key)];
    if (c != std::numeric_limits<uint32_t>::max()) c++;
  }
}

uint64_t CountMinSketch::estimate(const Hash128& key) const {
  uint64_t best = std::numeric_limits<uint64_t>::max();
  for (uint32_t row = 0; row < depth_; row++) {
    uint64_t c = table_[cell(row, key)];
    if (c < best) best = c;
  }
  return best;
}

void CountMinSketch::merge(const CountMinSketch& other) {
  if (other.width_ != width_ || other.depth_ != depth_ || other.seed_ != seed_) {
    throw ConfigError("cannot merge count-min sketches with different shape or seed");
  }
  for (size_t i = 0; i < table_.size(); i++) {
    uint64_t sum = uint64_t(table_[i]) + other.table_[i];
    table_[i] = sum > std::numeric_limits<uint32_t>::max()
                    ? std::numeric_limits<uint32_t>::max()
                    : uint32_t(sum);
  }
}

}  // namespace hdb
