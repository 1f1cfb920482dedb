#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>

namespace hdb {

using RecordId = uint64_t;

/// 128-bit digest used as block key identity throughout the pipeline.
struct Hash128 {
  uint64_t lo = 0;
  uint64_t hi = 0;

  friend bool operator==(const Hash128&, const Hash128&) = default;

  // Unsigned 128-bit ordering, high word first.
  friend std::strong_ordering operator<=>(const Hash128& a, const Hash128& b) {
    if (auto c = a.hi <=> b.hi; c != 0) return c;
    return a.lo <=> b.lo;
  }

  Hash128& operator^=(const Hash128& o) {
    lo ^= o.lo;
    hi ^= o.hi;
    return *this;
  }
  friend Hash128 operator^(Hash128 a, const Hash128& b) { return a ^= b; }

  bool is_zero() const { return lo == 0 && hi == 0; }
};

/// 32 lowercase hex chars, high word first.
std::string to_hex(const Hash128& h);

/// Parses the to_hex format. Returns false on anything else.
bool parse_hex(std::string_view s, Hash128& out);

/// MurmurHash3 x64 128.
Hash128 murmur3_x64_128(const void* data, size_t len, uint32_t seed);

inline Hash128 murmur3_x64_128(std::string_view s, uint32_t seed) {
  return murmur3_x64_128(s.data(), s.size(), seed);
}

/// splitmix64 finalizer. Bijective on 64 bits.
constexpr uint64_t mix64(uint64_t z) {
  z ^= z >> 30;
  z *= 0xbf58476d1ce4e5b9ULL;
  z ^= z >> 27;
  z *= 0x94d049bb133111ebULL;
  z ^= z >> 31;
  return z;
}

/// Seeded 64-bit hash of a digest; drives sketch rows and filter probes.
inline uint64_t hash128_with_seed(const Hash128& h, uint64_t seed) {
  return mix64(h.lo ^ mix64(h.hi ^ seed));
}

// Fixed domain-separation seeds. Each key family hashes under its own seed
// so keys from different strategies can never alias each other.
inline constexpr uint32_t kKeySeed = 0x9747b28c;
inline constexpr uint32_t kTokenSeed = 0x3c6ef372;
inline constexpr uint32_t kCombineSeed = 0x85ebca6b;
inline constexpr uint32_t kRidSeed = 0xc2b2ae35;
inline constexpr uint32_t kMinhashBaseSeed = 0x27d4eb2f;
inline constexpr uint32_t kBandDigestSeed = 0x165667b1;

/// Separator between attribute id and value inside hash_key input. Keeps
/// ("ab","c") and ("a","bc") distinct.
inline constexpr char kFieldSep = '\x1f';

/// Key for an (attribute, normalized value) pair.
Hash128 hash_key(std::string_view attribute_id, std::string_view value);

/// Key for a bare token, independent of the attribute it came from.
Hash128 token_key(std::string_view token);

/// Key for the intersection of two blocks. Requires a < b so that the
/// combination is order-independent.
Hash128 combine_keys(const Hash128& a, const Hash128& b);

/// Per-record digest folded into block membership hashes.
Hash128 rid_digest(RecordId rid);

struct Hash128Hasher {
  size_t operator()(const Hash128& h) const {
    return static_cast<size_t>(h.lo ^ (h.hi * 0x9e3779b97f4a7c15ULL));
  }
};

}  // namespace hdb
