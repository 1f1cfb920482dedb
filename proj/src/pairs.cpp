#include "hdb/pairs.hpp"

#include <algorithm>
#include <cassert>
#include <cerrno>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <unordered_map>

#include "hdb/errors.hpp"
#include "hdb/parallel.hpp"

namespace hdb {

uint64_t pair_bit_index(uint64_t i, uint64_t j, uint64_t n) {
  assert(i < j && j < n);
  return i * (n - 1) - (i * (i + 1)) / 2 + j - 1;
}

Hash128 tie_break_largest(std::span<const BlockRef> candidates) {
  assert(!candidates.empty());
  const BlockRef* best = &candidates[0];
  for (const BlockRef& c : candidates.subspan(1)) {
    if (c.size > best->size || (c.size == best->size && c.key < best->key)) best = &c;
  }
  return best->key;
}

namespace {

struct BlockEntry {
  Hash128 key;
  std::vector<RecordId> members;
};

// The dedupe upsert: a pair belongs to its biggest block, smallest key on
// ties. Same rule as tie_break_largest, applied incrementally.
inline bool beats(const BlockRef& challenger, const BlockRef& holder) {
  return challenger.size > holder.size ||
         (challenger.size == holder.size && challenger.key < holder.key);
}

struct PairKeyWide {
  RecordId a, b;
  bool operator==(const PairKeyWide&) const = default;
};

struct PairKeyWideHasher {
  size_t operator()(const PairKeyWide& p) const { return mix64(p.a ^ mix64(p.b)); }
};

// Runs generation + global dedupe with the given pair-key packing, then
// fills res.pairs (sorted) and the per-block regrouping.
template <typename PairKey, typename Hasher, typename Pack, typename Unpack>
void dedupe_pairs(const std::vector<BlockEntry>& blocks, uint32_t partitions, Pack pack,
                  Unpack unpack, PairResult& res) {
  using PairMap = std::unordered_map<PairKey, BlockRef, Hasher>;

  auto ranges = partition_ranges(blocks.size(), partitions);
  std::vector<PairMap> partial(ranges.size());
  for_each_partition(blocks.size(), partitions, [&](uint32_t part, size_t begin, size_t end) {
    PairMap& map = partial[part];
    for (size_t bi = begin; bi < end; bi++) {
      const BlockEntry& block = blocks[bi];
      BlockRef ref{block.key, block.members.size()};
      for (size_t i = 0; i < block.members.size(); i++) {
        for (size_t j = i + 1; j < block.members.size(); j++) {
          PairKey pk = pack(block.members[i], block.members[j]);
          auto [it, fresh] = map.try_emplace(pk, ref);
          if (!fresh && beats(ref, it->second)) it->second = ref;
        }
      }
    }
  });
  PairMap merged = std::move(partial[0]);
  for (size_t p = 1; p < partial.size(); p++) {
    for (const auto& [pk, ref] : partial[p]) {
      auto [it, fresh] = merged.try_emplace(pk, ref);
      if (!fresh && beats(ref, it->second)) it->second = ref;
    }
    partial[p].clear();
  }
  partial.clear();

  res.pairs.reserve(merged.size());
  for (const auto& [pk, ref] : merged) {
    auto [a, b] = unpack(pk);
    res.pairs.push_back(CandidatePair{a, b, ref.key});
  }
  std::sort(res.pairs.begin(), res.pairs.end(), [](const CandidatePair& x, const CandidatePair& y) {
    return x.rid1 != y.rid1 ? x.rid1 < y.rid1 : x.rid2 < y.rid2;
  });
}

}  // namespace

PairResult remove_dupe_pairs(const std::vector<KeyedRecord>& right_sized, uint32_t partitions) {
  PairResult res;
  if (partitions < 1) partitions = 1;

  // Materialize key -> members. Membership arrival order depends on the
  // partitioning, so members are sorted before anything reads them.
  auto ranges = partition_ranges(right_sized.size(), partitions);
  using BlockMap = std::unordered_map<Hash128, std::vector<RecordId>, Hash128Hasher>;
  std::vector<BlockMap> partial(ranges.size());
  for_each_partition(right_sized.size(), partitions, [&](uint32_t part, size_t begin, size_t end) {
    BlockMap& map = partial[part];
    for (size_t i = begin; i < end; i++) {
      for (const AnnotatedKey& k : right_sized[i].keys) {
        map[k.key].push_back(right_sized[i].rid);
      }
    }
  });
  BlockMap block_map = std::move(partial[0]);
  for (size_t p = 1; p < partial.size(); p++) {
    for (auto& [key, members] : partial[p]) {
      auto& dst = block_map[key];
      dst.insert(dst.end(), members.begin(), members.end());
    }
    partial[p].clear();
  }
  partial.clear();

  std::vector<BlockEntry> blocks;
  blocks.reserve(block_map.size());
  for (auto& [key, members] : block_map) {
    if (members.size() < 2) continue;
    std::sort(members.begin(), members.end());
    assert(std::adjacent_find(members.begin(), members.end()) == members.end());
    blocks.push_back(BlockEntry{key, std::move(members)});
    res.stats.raw_pairs += blocks.back().members.size() * (blocks.back().members.size() - 1) / 2;
  }
  block_map.clear();
  std::sort(blocks.begin(), blocks.end(),
            [](const BlockEntry& x, const BlockEntry& y) { return x.key < y.key; });
  res.stats.blocks_materialized = blocks.size();

  bool narrow = true;
  for (const BlockEntry& b : blocks) {
    if (!b.members.empty() && b.members.back() > 0xffffffffULL) {
      narrow = false;
      break;
    }
  }
  if (narrow) {
    dedupe_pairs<uint64_t, std::hash<uint64_t>>(
        blocks, partitions,
        [](RecordId a, RecordId b) { return (a << 32) | b; },
        [](uint64_t pk) { return std::pair<RecordId, RecordId>{pk >> 32, pk & 0xffffffffULL}; },
        res);
  } else {
    dedupe_pairs<PairKeyWide, PairKeyWideHasher>(
        blocks, partitions,
        [](RecordId a, RecordId b) { return PairKeyWide{a, b}; },
        [](const PairKeyWide& pk) { return std::pair<RecordId, RecordId>{pk.a, pk.b}; },
        res);
  }
  res.stats.distinct_pairs = res.pairs.size();

  // Regroup retained pairs under their attributed block.
  std::unordered_map<Hash128, size_t, Hash128Hasher> block_index;
  block_index.reserve(blocks.size());
  for (size_t i = 0; i < blocks.size(); i++) block_index.emplace(blocks[i].key, i);
  std::vector<std::vector<std::pair<RecordId, RecordId>>> retained(blocks.size());
  for (const CandidatePair& p : res.pairs) {
    retained[block_index.at(p.block)].emplace_back(p.rid1, p.rid2);
  }

  for (size_t i = 0; i < blocks.size(); i++) {
    if (retained[i].empty()) continue;  // fully claimed by larger blocks
    BlockPairSet set;
    set.block = blocks[i].key;
    set.members = std::move(blocks[i].members);
    set.retained = retained[i].size();
    const uint64_t n = set.members.size();
    const uint64_t total = n * (n - 1) / 2;
    if (set.retained < total) {
      set.bitmap.assign((total + 7) / 8, 0);
      for (const auto& [a, b] : retained[i]) {
        uint64_t ia = std::lower_bound(set.members.begin(), set.members.end(), a) -
                      set.members.begin();
        uint64_t ib = std::lower_bound(set.members.begin(), set.members.end(), b) -
                      set.members.begin();
        uint64_t bit = pair_bit_index(ia, ib, n);
        set.bitmap[bit >> 3] |= uint8_t(1) << (bit & 7);
      }
      res.stats.blocks_with_bitmap++;
    }
    res.blocks.push_back(std::move(set));
  }
  res.stats.blocks_emitted = res.blocks.size();
  return res;
}

namespace {

const char kBase64Alphabet[] =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

std::string base64_encode(const std::vector<uint8_t>& data) {
  std::string out;
  out.reserve((data.size() + 2) / 3 * 4);
  size_t i = 0;
  while (i + 3 <= data.size()) {
    uint32_t v = (uint32_t(data[i]) << 16) | (uint32_t(data[i + 1]) << 8) | data[i + 2];
    out.push_back(kBase64Alphabet[(v >> 18) & 63]);
    out.push_back(kBase64Alphabet[(v >> 12) & 63]);
    out.push_back(kBase64Alphabet[(v >> 6) & 63]);
    out.push_back(kBase64Alphabet[v & 63]);
    i += 3;
  }
  size_t rest = data.size() - i;
  if (rest == 1) {
    uint32_t v = uint32_t(data[i]) << 16;
    out.push_back(kBase64Alphabet[(v >> 18) & 63]);
    out.push_back(kBase64Alphabet[(v >> 12) & 63]);
    out.append("==");
  } else if (rest == 2) {
    uint32_t v = (uint32_t(data[i]) << 16) | (uint32_t(data[i + 1]) << 8);
    out.push_back(kBase64Alphabet[(v >> 18) & 63]);
    out.push_back(kBase64Alphabet[(v >> 12) & 63]);
    out.push_back(kBase64Alphabet[(v >> 6) & 63]);
    out.push_back('=');
  }
  return out;
}

}  // namespace

void write_pair_file(const std::string& path, const std::vector<CandidatePair>& pairs) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write pair file: " + path);
  out << "# hdb-pairs v1\n";
  for (const CandidatePair& p : pairs) {
    out << p.rid1 << ',' << p.rid2 << ',' << to_hex(p.block) << '\n';
  }
  out.flush();
  if (!out) throw DataError("error while writing pair file: " + path);
}

std::vector<std::pair<RecordId, RecordId>> read_pair_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open pair file: " + path);
  std::vector<std::pair<RecordId, RecordId>> pairs;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    line_no++;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (line_no == 1 && (line[0] < '0' || line[0] > '9')) continue;  // header row
    const char* s = line.c_str();
    char* end = nullptr;
    errno = 0;
    unsigned long long a = std::strtoull(s, &end, 10);
    if (end == s || *end != ',' || errno != 0) {
      throw DataError("malformed pair at line " + std::to_string(line_no) + " of " + path);
    }
    const char* s2 = end + 1;
    errno = 0;
    unsigned long long b = std::strtoull(s2, &end, 10);
    if (end == s2 || (*end != '\0' && *end != ',') || errno != 0) {
      throw DataError("malformed pair at line " + std::to_string(line_no) + " of " + path);
    }
    if (a == b) {
      throw DataError("self-pair at line " + std::to_string(line_no) + " of " + path);
    }
    if (a > b) std::swap(a, b);
    pairs.emplace_back(a, b);
  }
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  return pairs;
}

void write_block_pair_file(const std::string& path, const std::vector<BlockPairSet>& blocks) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write block-pair file: " + path);
  out << "# hdb-block-pairs v1\n";
  for (const BlockPairSet& b : blocks) {
    out << to_hex(b.block) << ',' << b.members.size() << ',' << b.retained << ',';
    for (size_t i = 0; i < b.members.size(); i++) {
      if (i) out << ' ';
      out << b.members[i];
    }
    out << ',' << base64_encode(b.bitmap) << '\n';
  }
  out.flush();
  if (!out) throw DataError("error while writing block-pair file: " + path);
}

}  // namespace hdb
