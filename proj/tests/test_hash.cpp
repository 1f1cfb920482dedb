#include <cstring>
#include <string>
#include <unordered_set>
#include <vector>

#include <doctest.h>

#include "hdb/hash.hpp"

using namespace hdb;

namespace {

Hash128 mm(const std::string& s, uint32_t seed) {
  return murmur3_x64_128(s.data(), s.size(), seed);
}

}  // namespace

TEST_CASE("murmur3 x64 128 reference vectors") {
  CHECK(mm("", 0) == Hash128{0, 0});
  CHECK(mm("", 1) == Hash128{0x4610abe56eff5cb5ull, 0x51622daa78f83583ull});
  CHECK(mm("a", 0) == Hash128{0x85555565f6597889ull, 0xe6b53a48510e895aull});
  CHECK(mm("foo", 0) == Hash128{0xe271865701f54561ull, 0x7eaf87e42bba7d87ull});
  CHECK(mm("hello world", 42) == Hash128{0xc05292b747fc78c0ull, 0x85bdab5e19e59315ull});
  CHECK(mm("The quick brown fox jumps over the lazy dog", 0) ==
        Hash128{0xe34bbc7bbc071b6cull, 0x7a433ca9c49a9347ull});
  std::vector<uint8_t> bytes(32);
  for (size_t i = 0; i < bytes.size(); i++) bytes[i] = uint8_t(i);
  CHECK(murmur3_x64_128(bytes.data(), bytes.size(), 7) ==
        Hash128{0x39a625dafaff2a0full, 0x471ed6ce98720555ull});
}

TEST_CASE("murmur3 x64 128 standard verification value") {
  // Hash keys of every length 0..255 (key[i] = i) under seed 256 - len,
  // concatenate the digests, hash that buffer with seed 0: the low 32 bits
  // must equal the canonical verification constant for this variant.
  std::vector<uint8_t> key(256);
  for (size_t i = 0; i < key.size(); i++) key[i] = uint8_t(i);
  std::vector<uint8_t> digests(256 * 16);
  for (uint32_t len = 0; len < 256; len++) {
    Hash128 h = murmur3_x64_128(key.data(), len, 256 - len);
    std::memcpy(&digests[len * 16], &h.lo, 8);
    std::memcpy(&digests[len * 16 + 8], &h.hi, 8);
  }
  Hash128 final_hash = murmur3_x64_128(digests.data(), digests.size(), 0);
  CHECK(uint32_t(final_hash.lo & 0xffffffffull) == 0x6384BA69u);
}

TEST_CASE("Hash128 ordering, xor, hex") {
  Hash128 a{2, 1};
  Hash128 b{1, 2};
  CHECK(a < b);  // high word dominates
  CHECK(Hash128{5, 7} < Hash128{6, 7});
  CHECK((a ^ b) == Hash128{3, 3});
  CHECK((a ^ a).is_zero());

  Hash128 h{0x0123456789abcdefull, 0xfedcba9876543210ull};
  std::string hex = to_hex(h);
  CHECK(hex == "fedcba98765432100123456789abcdef");
  Hash128 back;
  CHECK(parse_hex(hex, back));
  CHECK(back == h);
  CHECK_FALSE(parse_hex("zz", back));
  CHECK_FALSE(parse_hex("fedcba98765432100123456789abcde", back));  // 31 chars
  CHECK(to_hex(Hash128{}) == std::string(32, '0'));
}

TEST_CASE("mix64 matches the splitmix64 finalizer") {
  // First output of the reference splitmix64 stream from state 0 equals the
  // finalizer applied to the first increment.
  CHECK(mix64(0x9e3779b97f4a7c15ull) == 0xe220a8397b1dcdafull);
  CHECK(mix64(0) == 0);  // fixed point by construction
  std::unordered_set<uint64_t> seen;
  for (uint64_t i = 1; i <= 1000; i++) seen.insert(mix64(i));
  CHECK(seen.size() == 1000);
}

TEST_CASE("domain-separated key constructors") {
  // hash_key = murmur over attribute, 0x1f separator, value, under the key
  // seed; frozen against the reference implementation.
  CHECK(hash_key("name", "foo") == Hash128{0xcf508db890367842ull, 0xcdf9250ca2afe709ull});
  CHECK(hash_key("name", "foo") == mm(std::string("name") + '\x1f' + "foo", kKeySeed));
  CHECK(token_key("foo") == mm("foo", kTokenSeed));

  // Same text, different domains: all distinct.
  CHECK(hash_key("a", "x") != hash_key("b", "x"));
  CHECK(hash_key("a", "x") != token_key("a\x1fx"));
  CHECK(token_key("x") != mm("x", kKeySeed));

  // Separator prevents boundary ambiguity.
  CHECK(hash_key("ab", "c") != hash_key("a", "bc"));
}

TEST_CASE("combine_keys is canonical and collision-free in practice") {
  Hash128 a = hash_key("c", "1");
  Hash128 b = hash_key("c", "2");
  Hash128 lo = std::min(a, b), hi = std::max(a, b);
  Hash128 child = combine_keys(lo, hi);
  CHECK(child != lo);
  CHECK(child != hi);
  CHECK(combine_keys(lo, hi) == combine_keys(lo, hi));

  std::unordered_set<Hash128, Hash128Hasher> children;
  std::vector<Hash128> keys;
  for (int i = 0; i < 80; i++) keys.push_back(hash_key("c", std::to_string(i)));
  std::sort(keys.begin(), keys.end());
  for (size_t i = 0; i < keys.size(); i++) {
    for (size_t j = i + 1; j < keys.size(); j++) {
      children.insert(combine_keys(keys[i], keys[j]));
    }
  }
  CHECK(children.size() == 80u * 79u / 2u);
}

TEST_CASE("rid digests are distinct and deterministic") {
  CHECK(rid_digest(0) == rid_digest(0));
  std::unordered_set<Hash128, Hash128Hasher> seen;
  for (RecordId r = 0; r < 10000; r++) seen.insert(rid_digest(r));
  CHECK(seen.size() == 10000);
}

TEST_CASE("no collisions across one million distinct keys") {
  std::unordered_set<Hash128, Hash128Hasher> seen;
  seen.reserve(2100000);
  for (uint32_t i = 0; i < 500000; i++) {
    seen.insert(hash_key("k", std::to_string(i)));
    seen.insert(token_key(std::to_string(i)));
  }
  CHECK(seen.size() == 1000000);
}

TEST_CASE("hash128_with_seed separates seeds") {
  Hash128 k = hash_key("a", "b");
  CHECK(hash128_with_seed(k, 1) != hash128_with_seed(k, 2));
  CHECK(hash128_with_seed(k, 7) == hash128_with_seed(k, 7));
}
