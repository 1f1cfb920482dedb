#include "hdb/hash.hpp"

#include <cassert>
#include <cstring>

namespace hdb {

namespace {

inline uint64_t rotl64(uint64_t x, int8_t r) {
  return (x << r) | (x >> (64 - r));
}

inline uint64_t fmix64(uint64_t k) {
  k ^= k >> 33;
  k *= 0xff51afd7ed558ccdULL;
  k ^= k >> 33;
  k *= 0xc4ceb9fe1a85ec53ULL;
  k ^= k >> 33;
  return k;
}

inline uint64_t load64(const uint8_t* p) {
  uint64_t v;
  std::memcpy(&v, p, sizeof(v));
  return v;  // little-endian platform assumed, as everywhere in this codebase
}

}  // namespace

Hash128 murmur3_x64_128(const void* data, size_t len, uint32_t seed) {
  const uint8_t* bytes = static_cast<const uint8_t*>(data);
  const size_t nblocks = len / 16;

  uint64_t h1 = seed;
  uint64_t h2 = seed;

  const uint64_t c1 = 0x87c37b91114253d5ULL;
  const uint64_t c2 = 0x4cf5ad432745937fULL;

  for (size_t i = 0; i < nblocks; i++) {
    uint64_t k1 = load64(bytes + i * 16);
    uint64_t k2 = load64(bytes + i * 16 + 8);

    k1 *= c1;
    k1 = rotl64(k1, 31);
    k1 *= c2;
    h1 ^= k1;
    h1 = rotl64(h1, 27);
    h1 += h2;
    h1 = h1 * 5 + 0x52dce729;

    k2 *= c2;
    k2 = rotl64(k2, 33);
    k2 *= c1;
    h2 ^= k2;
    h2 = rotl64(h2, 31);
    h2 += h1;
    h2 = h2 * 5 + 0x38495ab5;
  }

  const uint8_t* tail = bytes + nblocks * 16;
  uint64_t k1 = 0;
  uint64_t k2 = 0;

  switch (len & 15) {
    case 15: k2 ^= uint64_t(tail[14]) << 48; [[fallthrough]];
    case 14: k2 ^= uint64_t(tail[13]) << 40; [[fallthrough]];
    case 13: k2 ^= uint64_t(tail[12]) << 32; [[fallthrough]];
    case 12: k2 ^= uint64_t(tail[11]) << 24; [[fallthrough]];
    case 11: k2 ^= uint64_t(tail[10]) << 16; [[fallthrough]];
    case 10: k2 ^= uint64_t(tail[9]) << 8; [[fallthrough]];
    case 9:
      k2 ^= uint64_t(tail[8]);
      k2 *= c2;
      k2 = rotl64(k2, 33);
      k2 *= c1;
      h2 ^= k2;
      [[fallthrough]];
    case 8: k1 ^= uint64_t(tail[7]) << 56; [[fallthrough]];
    case 7: k1 ^= uint64_t(tail[6]) << 48; [[fallthrough]];
    case 6: k1 ^= uint64_t(tail[5]) << 40; [[fallthrough]];
    case 5: k1 ^= uint64_t(tail[4]) << 32; [[fallthrough]];
    case 4: k1 ^= uint64_t(tail[3]) << 24; [[fallthrough]];
    case 3: k1 ^= uint64_t(tail[2]) << 16; [[fallthrough]];
    case 2: k1 ^= uint64_t(tail[1]) << 8; [[fallthrough]];
    case 1:
      k1 ^= uint64_t(tail[0]);
      k1 *= c1;
      k1 = rotl64(k1, 31);
      k1 *= c2;
      h1 ^= k1;
  }

  h1 ^= uint64_t(len);
  h2 ^= uint64_t(len);
  h1 += h2;
  h2 += h1;
  h1 = fmix64(h1);
  h2 = fmix64(h2);
  h1 += h2;
  h2 += h1;

  return Hash128{h1, h2};
}

std::string to_hex(const Hash128& h) {
  static const char digits[] = "0123456789abcdef";
  std::string out(32, '0');
  uint64_t words[2] = {h.hi, h.lo};
  size_t pos = 0;
  for (uint64_t w : words) {
    for (int shift = 60; shift >= 0; shift -= 4) {
      out[pos++] = digits[(w >> shift) & 0xf];
    }
  }
  return out;
}

bool parse_hex(std::string_view s, Hash128& out) {
  if (s.size() != 32) return false;
  uint64_t words[2] = {0, 0};
  for (size_t i = 0; i < 32; i++) {
    char c = s[i];
    uint64_t v;
    if (c >= '0' && c <= '9') v = uint64_t(c - '0');
    else if (c >= 'a' && c <= 'f') v = uint64_t(c - 'a' + 10);
    else if (c >= 'A' && c <= 'F') v = uint64_t(c - 'A' + 10);
    else return false;
    words[i / 16] = (words[i / 16] << 4) | v;
  }
  out.hi = words[0];
  out.lo = words[1];
  return true;
}

Hash128 hash_key(std::string_view attribute_id, std::string_view value) {
  std::string buf;
  buf.reserve(attribute_id.size() + 1 + value.size());
  buf.append(attribute_id);
  buf.push_back(kFieldSep);
  buf.append(value);
  return murmur3_x64_128(buf, kKeySeed);
}

Hash128 token_key(std::string_view token) {
  return murmur3_x64_128(token, kTokenSeed);
}

Hash128 combine_keys(const Hash128& a, const Hash128& b) {
  assert(a < b);
  uint64_t buf[4] = {a.lo, a.hi, b.lo, b.hi};
  return murmur3_x64_128(buf, sizeof(buf), kCombineSeed);
}

Hash128 rid_digest(RecordId rid) {
  uint64_t v = rid;
  return murmur3_x64_128(&v, sizeof(v), kRidSeed);
}

}  // namespace hdb
