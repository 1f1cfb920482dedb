#include "hdb/engine.hpp"

#include <algorithm>
#include <cassert>
#include <memory>
#include <ostream>
#include <unordered_map>
#include <unordered_set>

#include "hdb/bloom_filter.hpp"
#include "hdb/count_min_sketch.hpp"
#include "hdb/membership.hpp"
#include "hdb/parallel.hpp"

namespace hdb {

SizeClass classify_estimate(uint64_t estimate, uint64_t psize, const EngineParams& params) {
  if (estimate <= params.max_block_size) return SizeClass::RightSized;
  if (psize == kNoParent) return SizeClass::PossiblyOversized;
  return double(estimate) / double(psize) <= params.max_similarity
             ? SizeClass::PossiblyOversized
             : SizeClass::Discarded;
}

namespace {

// Drops rows whose key vector went empty, preserving row order.
void compact_rows(std::vector<KeyedRecord>& rows) {
  size_t out = 0;
  for (size_t i = 0; i < rows.size(); i++) {
    if (!rows[i].keys.empty()) {
      if (out != i) rows[out] = std::move(rows[i]);
      out++;
    }
  }
  rows.resize(out);
}

}  // namespace

RoughResult rough_oversize_detection(const std::vector<KeyedRecord>& candidates,
                                     const EngineParams& params, uint32_t partitions) {
  RoughResult res;
  const size_t n = candidates.size();

  // Per-partition sketches merged by elementwise saturating sum: the merged
  // table is the same for every partition count.
  std::vector<std::unique_ptr<CountMinSketch>> sketches;
  auto ranges = partition_ranges(n, partitions);
  sketches.resize(ranges.size());
  for_each_partition(n, partitions, [&](uint32_t part, size_t begin, size_t end) {
    auto cms = std::make_unique<CountMinSketch>(params.cms_width, params.cms_depth, params.seed);
    for (size_t i = begin; i < end; i++) {
      for (const AnnotatedKey& k : candidates[i].keys) cms->increment(k.key);
    }
    sketches[part] = std::move(cms);
  });
  CountMinSketch cms = std::move(*sketches[0]);
  for (size_t p = 1; p < sketches.size(); p++) cms.merge(*sketches[p]);
  sketches.clear();

  res.right.resize(n);
  res.possibly_oversized.resize(n);
  std::vector<RoughStats> part_stats(ranges.size());
  for_each_partition(n, partitions, [&](uint32_t part, size_t begin, size_t end) {
    RoughStats& st = part_stats[part];
    for (size_t i = begin; i < end; i++) {
      const KeyedRecord& rec = candidates[i];
      KeyedRecord& right = res.right[i];
      KeyedRecord& over = res.possibly_oversized[i];
      right.rid = over.rid = rec.rid;
      st.assignments_in += rec.keys.size();
      for (const AnnotatedKey& k : rec.keys) {
        switch (classify_estimate(cms.estimate(k.key), k.psize, params)) {
          case SizeClass::RightSized:
            right.keys.push_back(k);
            st.right_assignments++;
            break;
          case SizeClass::PossiblyOversized:
            over.keys.push_back(k);
            st.oversized_assignments++;
            break;
          case SizeClass::Discarded:
            st.discarded_assignments++;
            break;
        }
      }
    }
  });
  for (const RoughStats& st : part_stats) {
    res.stats.assignments_in += st.assignments_in;
    res.stats.right_assignments += st.right_assignments;
    res.stats.oversized_assignments += st.oversized_assignments;
    res.stats.discarded_assignments += st.discarded_assignments;
  }
  compact_rows(res.right);
  compact_rows(res.possibly_oversized);
  return res;
}

namespace {

struct KeyAgg {
  uint64_t count = 0;
  Hash128 members;  // XOR membership hash
};

using AggMap = std::unordered_map<Hash128, KeyAgg, Hash128Hasher>;

}  // namespace

ExactResult exactly_count_and_dedupe(const std::vector<KeyedRecord>& possibly_oversized,
                                     const EngineParams& params, const EngineOptions& opts) {
  ExactResult res;
  const size_t n = possibly_oversized.size();
  const uint32_t partitions = opts.partitions < 1 ? 1 : opts.partitions;

  // Grouped count + XOR pass. Count sum and XOR are both commutative and
  // associative, so the merged map does not depend on the partitioning.
  auto ranges = partition_ranges(n, partitions);
  std::vector<AggMap> partial(ranges.size());
  for_each_partition(n, partitions, [&](uint32_t part, size_t begin, size_t end) {
    AggMap& agg = partial[part];
    for (size_t i = begin; i < end; i++) {
      const KeyedRecord& rec = possibly_oversized[i];
      for (const AnnotatedKey& k : rec.keys) {
        KeyAgg& a = agg[k.key];
        a.count++;
        xor_accumulate(a.members, rec.rid);
      }
    }
  });
  AggMap agg = std::move(partial[0]);
  for (size_t p = 1; p < partial.size(); p++) {
    for (auto& [key, val] : partial[p]) {
      KeyAgg& a = agg[key];
      a.count += val.count;
      a.members ^= val.members;
    }
    partial[p].clear();
  }
  partial.clear();

  res.stats.assignments_in = 0;
  for (size_t i = 0; i < n; i++) res.stats.assignments_in += possibly_oversized[i].keys.size();
  res.stats.distinct_keys = agg.size();

  // Duplicate blocks cover the same record set and therefore share a
  // membership hash; the smallest key of each group survives.
  std::vector<Hash128> truly_oversized;
  std::unordered_map<Hash128, Hash128, Hash128Hasher> survivor;
  for (const auto& [key, a] : agg) {
    if (a.count > params.max_block_size) {
      truly_oversized.push_back(key);
      auto [it, fresh] = survivor.try_emplace(a.members, key);
      if (!fresh && key < it->second) it->second = key;
    }
  }
  res.stats.truly_oversized_keys = truly_oversized.size();
  res.stats.duplicate_keys_dropped = truly_oversized.size() - survivor.size();
  res.stats.surviving_oversized_keys = survivor.size();

  // Broadcast structures for the routing pass: exact counts of the
  // surviving keys, and a membership filter over ALL truly over-sized keys.
  std::unordered_map<Hash128, uint64_t, Hash128Hasher> counts;
  counts.reserve(survivor.size());
  for (const auto& [members, key] : survivor) counts.emplace(key, agg.at(key).count);

  std::unordered_set<Hash128, Hash128Hasher> exact_set;
  BloomFilter bloom(truly_oversized.size(), params.bloom_target_fpr, params.seed);
  if (opts.exact_membership) {
    exact_set.insert(truly_oversized.begin(), truly_oversized.end());
  } else {
    for (const Hash128& k : truly_oversized) bloom.insert(k);
  }
  auto in_oversized = [&](const Hash128& k) {
    return opts.exact_membership ? exact_set.count(k) > 0 : bloom.contains(k);
  };

  res.corrected_right.resize(n);
  res.oversized.resize(n);
  std::vector<ExactStats> part_stats(ranges.size());
  for_each_partition(n, partitions, [&](uint32_t part, size_t begin, size_t end) {
    ExactStats& st = part_stats[part];
    for (size_t i = begin; i < end; i++) {
      const KeyedRecord& rec = possibly_oversized[i];
      KeyedRecord& right = res.corrected_right[i];
      KeyedRecord& over = res.oversized[i];
      right.rid = over.rid = rec.rid;
      for (const AnnotatedKey& k : rec.keys) {
        if (!in_oversized(k.key)) {
          AnnotatedKey corrected = k;
          corrected.size = agg.at(k.key).count;
          right.keys.push_back(corrected);
          st.corrected_right_assignments++;
        } else if (auto it = counts.find(k.key); it != counts.end()) {
          AnnotatedKey sized = k;
          sized.size = it->second;
          over.keys.push_back(sized);
          st.oversized_assignments_out++;
        } else {
          // In the filter but not among survivors: a duplicate block (or, in
          // Bloom mode, a rare false positive).
          st.duplicate_assignments_dropped++;
        }
      }
    }
  });
  for (const ExactStats& st : part_stats) {
    res.stats.corrected_right_assignments += st.corrected_right_assignments;
    res.stats.oversized_assignments_out += st.oversized_assignments_out;
    res.stats.duplicate_assignments_dropped += st.duplicate_assignments_dropped;
  }
  compact_rows(res.corrected_right);
  compact_rows(res.oversized);
  return res;
}

IntersectResult intersect_keys(const std::vector<KeyedRecord>& oversized,
                               const EngineParams& params, uint32_t partitions) {
  IntersectResult res;
  const size_t n = oversized.size();
  res.stats.records_in = n;
  res.children.resize(n);

  auto ranges = partition_ranges(n, partitions);
  std::vector<IntersectStats> part_stats(ranges.size());
  for_each_partition(n, partitions, [&](uint32_t part, size_t begin, size_t end) {
    IntersectStats& st = part_stats[part];
    for (size_t i = begin; i < end; i++) {
      const std::vector<AnnotatedKey>& keys = oversized[i].keys;
      if (keys.size() > params.max_keys) {
        st.records_dropped_max_keys++;
        continue;
      }
      if (keys.size() < 2) continue;
      KeyedRecord& out = res.children[i];
      out.rid = oversized[i].rid;
      out.keys.reserve(keys.size() * (keys.size() - 1) / 2);
      for (size_t a = 0; a < keys.size(); a++) {
        for (size_t b = a + 1; b < keys.size(); b++) {
          AnnotatedKey child;
          child.key = combine_keys(keys[a].key, keys[b].key);
          child.size = 0;
          child.psize = std::min(keys[a].size, keys[b].size);
          out.keys.push_back(child);
        }
      }
      std::sort(out.keys.begin(), out.keys.end(),
                [](const AnnotatedKey& x, const AnnotatedKey& y) { return x.key < y.key; });
      out.keys.erase(std::unique(out.keys.begin(), out.keys.end(),
                                 [](const AnnotatedKey& x, const AnnotatedKey& y) {
                                   return x.key == y.key;
                                 }),
                     out.keys.end());
      st.child_assignments_out += out.keys.size();
    }
  });
  for (const IntersectStats& st : part_stats) {
    res.stats.records_dropped_max_keys += st.records_dropped_max_keys;
    res.stats.child_assignments_out += st.child_assignments_out;
  }
  compact_rows(res.children);
  return res;
}

namespace {

void log_iteration(std::ostream* log, const IterationStats& it) {
  if (!log) return;
  (*log) << "iteration " << it.iteration << ": candidates=" << it.rough.assignments_in
         << " right=" << it.rough.right_assignments
         << " similarity_discarded=" << it.rough.discarded_assignments
         << " corrected_right=" << it.exact.corrected_right_assignments
         << " oversized_keys=" << it.exact.surviving_oversized_keys
         << " duplicate_keys_dropped=" << it.exact.duplicate_keys_dropped;
  if (it.iteration > 0) {
    (*log) << " records_dropped_max_keys=" << it.intersect.records_dropped_max_keys;
  }
  (*log) << "\n";
}

}  // namespace

EngineResult hashed_dynamic_blocking(std::vector<KeyedRecord> index, const EngineParams& params,
                                     const EngineOptions& opts) {
  params.validate();
  const uint32_t partitions = opts.partitions < 1 ? 1 : opts.partitions;
  EngineResult res;

  std::unordered_map<RecordId, std::vector<AnnotatedKey>> acc;
  acc.reserve(index.size());
  auto accumulate = [&acc](const std::vector<KeyedRecord>& rows) {
    for (const KeyedRecord& rec : rows) {
      auto& keys = acc[rec.rid];
      keys.insert(keys.end(), rec.keys.begin(), rec.keys.end());
    }
  };

  std::vector<KeyedRecord> current = std::move(index);
  IntersectStats pending_intersect;
  uint32_t round = 0;
  while (true) {
    RoughResult rough = rough_oversize_detection(current, params, partitions);
    current.clear();
    EngineOptions exact_opts = opts;
    exact_opts.partitions = partitions;
    ExactResult exact = exactly_count_and_dedupe(rough.possibly_oversized, params, exact_opts);
    accumulate(rough.right);
    accumulate(exact.corrected_right);

    IterationStats it;
    it.iteration = round;
    it.intersect = pending_intersect;
    it.rough = rough.stats;
    it.exact = exact.stats;
    log_iteration(opts.log, it);
    res.stats.iterations.push_back(it);

    if (exact.oversized.empty()) break;
    if (round >= params.max_iterations) {
      res.stats.iteration_cap_hit = true;
      res.stats.cap_dropped_keys = exact.stats.surviving_oversized_keys;
      if (opts.log) {
        (*opts.log) << "iteration cap (" << params.max_iterations << ") hit; dropping "
                    << res.stats.cap_dropped_keys << " over-sized keys\n";
      }
      break;
    }
    round++;
    IntersectResult inter = intersect_keys(exact.oversized, params, partitions);
    pending_intersect = inter.stats;
    current = std::move(inter.children);
    if (current.empty()) {
      // Nothing left to classify, but keep the round's drop counters visible.
      IterationStats tail;
      tail.iteration = round;
      tail.intersect = pending_intersect;
      log_iteration(opts.log, tail);
      res.stats.iterations.push_back(tail);
      break;
    }
  }

  // Final exact count over everything accumulated as right-sized. Each key
  // was classified in exactly one iteration and identically for all records
  // carrying it, so these counts are true block sizes.
  std::unordered_map<Hash128, uint64_t, Hash128Hasher> sizes;
  for (const auto& [rid, keys] : acc) {
    for (const AnnotatedKey& k : keys) sizes[k.key]++;
  }
  for (const auto& [key, count] : sizes) {
    if (count == 1) {
      res.stats.singleton_keys_dropped++;
    } else {
      res.stats.final_blocks++;
      res.stats.final_assignments += count;
    }
  }

  res.right_sized.reserve(acc.size());
  for (auto& [rid, keys] : acc) {
    KeyedRecord rec;
    rec.rid = rid;
    for (AnnotatedKey& k : keys) {
      uint64_t count = sizes.at(k.key);
      if (count < 2) continue;
      k.size = count;
      rec.keys.push_back(k);
    }
    if (rec.keys.empty()) continue;
    std::sort(rec.keys.begin(), rec.keys.end(),
              [](const AnnotatedKey& x, const AnnotatedKey& y) { return x.key < y.key; });
    assert(std::adjacent_find(rec.keys.begin(), rec.keys.end(),
                              [](const AnnotatedKey& x, const AnnotatedKey& y) {
                                return x.key == y.key;
                              }) == rec.keys.end());
    res.right_sized.push_back(std::move(rec));
  }
  std::sort(res.right_sized.begin(), res.right_sized.end(),
            [](const KeyedRecord& a, const KeyedRecord& b) { return a.rid < b.rid; });
  res.stats.records_with_keys = res.right_sized.size();
  return res;
}

}  // namespace hdb
