#include "hdb/minhash.hpp"

#include <cassert>
#include <limits>

namespace hdb {

std::vector<uint64_t> minhash_position_seeds(uint32_t m, uint64_t seed) {
  std::vector<uint64_t> seeds;
  seeds.reserve(m);
  for (uint32_t i = 0; i < m; i++) {
    seeds.push_back(mix64(seed ^ (0xd1b54a32d192ed03ULL * (i + 1))));
  }
  return seeds;
}

std::vector<uint64_t> minhash_signature(std::span<const std::string> tokens, uint32_t m,
                                        uint64_t seed) {
  assert(m >= 1);
  assert(!tokens.empty());
  std::vector<uint64_t> pos_seeds = minhash_position_seeds(m, seed);
  std::vector<uint64_t> sig(m, std::numeric_limits<uint64_t>::max());
  for (const std::string& tok : tokens) {
    // One strong 128-bit hash per token; per-position values are cheap mixes
    // of it, which keeps signatures affordable at large m.
    Hash128 base = murmur3_x64_128(tok, kMinhashBaseSeed);
    for (uint32_t i = 0; i < m; i++) {
      uint64_t h = mix64(base.lo ^ pos_seeds[i]) ^ base.hi;
      if (h < sig[i]) sig[i] = h;
    }
  }
  return sig;
}

double signature_agreement(std::span<const uint64_t> a, std::span<const uint64_t> b) {
  assert(a.size() == b.size());
  if (a.empty()) return 0.0;
  size_t agree = 0;
  for (size_t i = 0; i < a.size(); i++) {
    if (a[i] == b[i]) agree++;
  }
  return double(agree) / double(a.size());
}

}  // namespace hdb
