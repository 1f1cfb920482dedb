#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <doctest.h>
#include <unistd.h>

#include "hdb/errors.hpp"
#include "hdb/hash.hpp"
#include "hdb/pairs.hpp"
#include "support/synth.hpp"

using namespace hdb;

namespace {

// Rows for one block: every rid gets the same annotated key.
void add_block(std::map<RecordId, std::vector<AnnotatedKey>>& acc, const std::string& name,
               const std::vector<RecordId>& members) {
  Hash128 key = hash_key("b", name);
  for (RecordId rid : members) {
    acc[rid].push_back(AnnotatedKey{key, members.size(), kNoParent});
  }
}

std::vector<KeyedRecord> to_rows(std::map<RecordId, std::vector<AnnotatedKey>> acc) {
  std::vector<KeyedRecord> rows;
  for (auto& [rid, keys] : acc) {
    std::sort(keys.begin(), keys.end(),
              [](const AnnotatedKey& a, const AnnotatedKey& b) { return a.key < b.key; });
    rows.push_back(KeyedRecord{rid, std::move(keys)});
  }
  return rows;
}

std::string temp_path(const std::string& stem) {
  return std::string("hdb_test_") + stem + "_" + std::to_string(::getpid());
}

struct FileGuard {
  std::string path;
  ~FileGuard() { std::remove(path.c_str()); }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

}  // namespace

TEST_CASE("pair bit index walks the flattened upper triangle") {
  CHECK(pair_bit_index(0, 1, 2) == 0);
  CHECK(pair_bit_index(1, 3, 5) == 5);
  CHECK(pair_bit_index(2, 3, 4) == 5);  // last pair of n = 4
  CHECK(pair_bit_index(0, 1, 100) == 0);
  CHECK(pair_bit_index(98, 99, 100) == 4949);  // C(100,2) - 1
}

TEST_CASE("pair bit index is bijective for every block size") {
  for (uint64_t n = 2; n <= 100; n++) {
    std::vector<bool> seen(n * (n - 1) / 2, false);
    uint64_t expected = 0;
    for (uint64_t i = 0; i < n; i++) {
      for (uint64_t j = i + 1; j < n; j++) {
        uint64_t idx = pair_bit_index(i, j, n);
        REQUIRE(idx < seen.size());
        REQUIRE_FALSE(seen[idx]);
        seen[idx] = true;
        // Row-major walk visits indexes in increasing order.
        CHECK(idx == expected);
        expected++;
      }
    }
    CHECK(expected == seen.size());
  }
}

TEST_CASE("largest block wins a pair; ties go to the smaller key") {
  Hash128 a = hash_key("b", "a"), b = hash_key("b", "b");
  std::vector<BlockRef> refs{{a, 3}, {b, 5}};
  CHECK(tie_break_largest(refs) == b);
  std::reverse(refs.begin(), refs.end());
  CHECK(tie_break_largest(refs) == b);

  std::vector<BlockRef> tie{{std::max(a, b), 4}, {std::min(a, b), 4}};
  CHECK(tie_break_largest(tie) == std::min(a, b));
  std::reverse(tie.begin(), tie.end());
  CHECK(tie_break_largest(tie) == std::min(a, b));
}

TEST_CASE("nested blocks: the pair stays with the larger block") {
  // B1 = {1,2,3} and B2 = {2,3}: (2,3) is attributed to B1 and B2 keeps
  // nothing, so B2 is omitted from the output entirely.
  std::map<RecordId, std::vector<AnnotatedKey>> acc;
  add_block(acc, "B1", {1, 2, 3});
  add_block(acc, "B2", {2, 3});
  PairResult res = remove_dupe_pairs(to_rows(acc));

  Hash128 b1 = hash_key("b", "B1");
  REQUIRE(res.pairs.size() == 3);
  for (const CandidatePair& p : res.pairs) CHECK(p.block == b1);
  CHECK(res.stats.blocks_materialized == 2);
  CHECK(res.stats.raw_pairs == 4);
  CHECK(res.stats.distinct_pairs == 3);
  CHECK(res.stats.blocks_emitted == 1);
  REQUIRE(res.blocks.size() == 1);
  CHECK(res.blocks[0].block == b1);
  CHECK(res.blocks[0].members == std::vector<RecordId>{1, 2, 3});
  CHECK(res.blocks[0].retained == 3);
  CHECK(res.blocks[0].bitmap.empty());  // full block needs no bitmap
}

TEST_CASE("equal-size overlap: smaller key claims the shared pair") {
  std::map<RecordId, std::vector<AnnotatedKey>> acc;
  add_block(acc, "X", {1, 2, 3, 4});
  add_block(acc, "Y", {3, 4, 5, 6});  // shares pair (3,4), same size
  PairResult res = remove_dupe_pairs(to_rows(acc));

  Hash128 x = hash_key("b", "X"), y = hash_key("b", "Y");
  Hash128 winner = std::min(x, y), loser = std::max(x, y);
  CHECK(res.pairs.size() == 11);  // 6 + 6 - 1 shared
  for (const CandidatePair& p : res.pairs) {
    if (p.rid1 == 3 && p.rid2 == 4) CHECK(p.block == winner);
  }
  // The losing block keeps its other five pairs and records the gap.
  for (const BlockPairSet& b : res.blocks) {
    if (b.block != loser) continue;
    CHECK(b.retained == 5);
    REQUIRE_FALSE(b.bitmap.empty());
    uint64_t i = std::lower_bound(b.members.begin(), b.members.end(), RecordId(3)) -
                 b.members.begin();
    uint64_t j = std::lower_bound(b.members.begin(), b.members.end(), RecordId(4)) -
                 b.members.begin();
    uint64_t missing = pair_bit_index(i, j, b.members.size());
    uint64_t total = 6;
    for (uint64_t bit = 0; bit < total; bit++) {
      bool set = (b.bitmap[bit / 8] >> (bit % 8)) & 1;
      CHECK(set == (bit != missing));
    }
  }
  CHECK(res.stats.blocks_with_bitmap == 1);
}

TEST_CASE("pairs are sorted, unique and canonically ordered") {
  testing::SynthProfile prof;
  prof.records = 300;
  prof.random_keys = 260;
  prof.mean_random_size = 4.0;
  auto rows = testing::synth_index(prof, 12, 3);
  // Trim to right-sized shape: drop over-sized keys, attach exact sizes.
  std::map<Hash128, std::vector<RecordId>> by_key;
  for (const KeyedRecord& rec : rows) {
    for (const AnnotatedKey& k : rec.keys) by_key[k.key].push_back(rec.rid);
  }
  std::map<RecordId, std::vector<AnnotatedKey>> acc;
  for (const auto& [key, members] : by_key) {
    if (members.size() < 2 || members.size() > 12) continue;
    for (RecordId rid : members) {
      acc[rid].push_back(AnnotatedKey{key, members.size(), kNoParent});
    }
  }
  auto right = to_rows(acc);
  PairResult res = remove_dupe_pairs(right);

  REQUIRE_FALSE(res.pairs.empty());
  for (size_t i = 0; i < res.pairs.size(); i++) {
    CHECK(res.pairs[i].rid1 < res.pairs[i].rid2);
    if (i > 0) {
      auto prev = std::make_pair(res.pairs[i - 1].rid1, res.pairs[i - 1].rid2);
      auto cur = std::make_pair(res.pairs[i].rid1, res.pairs[i].rid2);
      CHECK(prev < cur);
    }
  }
  // Every pair's attributed block really contains both records.
  std::map<Hash128, std::set<RecordId>> block_members;
  for (const auto& [key, members] : by_key) {
    block_members[key] = std::set<RecordId>(members.begin(), members.end());
  }
  for (const CandidatePair& p : res.pairs) {
    const auto& m = block_members.at(p.block);
    CHECK(m.count(p.rid1) == 1);
    CHECK(m.count(p.rid2) == 1);
  }
  // Retained counts reconcile with the flat pair list.
  uint64_t retained = 0;
  for (const BlockPairSet& b : res.blocks) retained += b.retained;
  CHECK(retained == res.pairs.size());
  CHECK(res.stats.distinct_pairs == res.pairs.size());

  // Same output for any partition count and any input row order.
  PairResult par = remove_dupe_pairs(right, 4);
  REQUIRE(par.pairs.size() == res.pairs.size());
  for (size_t i = 0; i < res.pairs.size(); i++) {
    CHECK(par.pairs[i].rid1 == res.pairs[i].rid1);
    CHECK(par.pairs[i].rid2 == res.pairs[i].rid2);
    CHECK(par.pairs[i].block == res.pairs[i].block);
  }
  auto shuffled = right;
  std::shuffle(shuffled.begin(), shuffled.end(), std::mt19937_64(99));
  PairResult shuf = remove_dupe_pairs(shuffled);
  REQUIRE(shuf.pairs.size() == res.pairs.size());
  for (size_t i = 0; i < res.pairs.size(); i++) {
    CHECK(shuf.pairs[i].rid1 == res.pairs[i].rid1);
    CHECK(shuf.pairs[i].rid2 == res.pairs[i].rid2);
    CHECK(shuf.pairs[i].block == res.pairs[i].block);
  }
}

TEST_CASE("pair file writes, reads back and rejects junk") {
  FileGuard file{temp_path("pairs")};
  std::vector<CandidatePair> pairs{
      {1, 2, hash_key("b", "B1")},
      {1, 3, hash_key("b", "B1")},
      {2, 3, hash_key("b", "B2")},
  };
  write_pair_file(file.path, pairs);

  std::string text = slurp(file.path);
  CHECK(text.rfind("# hdb-pairs v1\n", 0) == 0);
  CHECK(text.find("1,2," + to_hex(hash_key("b", "B1"))) != std::string::npos);

  auto back = read_pair_file(file.path);
  REQUIRE(back.size() == 3);
  CHECK(back[0] == std::make_pair(RecordId(1), RecordId(2)));
  CHECK(back[2] == std::make_pair(RecordId(2), RecordId(3)));

  // Bare two-column files (no header, unsorted, reversed rids) read fine.
  {
    std::ofstream out(file.path);
    out << "5,2\n2,5\n1,4\n";
  }
  back = read_pair_file(file.path);
  REQUIRE(back.size() == 2);  // (2,5) canonicalized and deduped
  CHECK(back[0] == std::make_pair(RecordId(1), RecordId(4)));
  CHECK(back[1] == std::make_pair(RecordId(2), RecordId(5)));

  {
    std::ofstream out(file.path);
    out << "1,notanumber\n";
  }
  CHECK_THROWS_AS(read_pair_file(file.path), DataError);
  {
    std::ofstream out(file.path);
    out << "7,7\n";  // self-pair
  }
  CHECK_THROWS_AS(read_pair_file(file.path), DataError);
  CHECK_THROWS_AS(read_pair_file("does_not_exist.csv"), DataError);
}

TEST_CASE("block pair file spells out members and gaps") {
  std::map<RecordId, std::vector<AnnotatedKey>> acc;
  add_block(acc, "B1", {1, 2, 3});
  add_block(acc, "B2", {2, 3});
  PairResult res = remove_dupe_pairs(to_rows(acc));

  FileGuard file{temp_path("blockpairs")};
  write_block_pair_file(file.path, res.blocks);
  std::string text = slurp(file.path);
  std::string expected = "# hdb-block-pairs v1\n" + to_hex(hash_key("b", "B1")) +
                         ",3,3,1 2 3,\n";
  CHECK(text == expected);
}
