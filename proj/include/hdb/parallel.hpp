#pragma once

#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <thread>
#include <utility>
#include <vector>

namespace hdb {

/// Splits [0, n) into k contiguous ranges. The split depends only on n and k,
/// never on runtime conditions, so any merge of per-range results that uses a
/// commutative, associative reduce gives the same answer for every k.
inline std::vector<std::pair<size_t, size_t>> partition_ranges(size_t n, uint32_t k) {
  if (k == 0) k = 1;
  std::vector<std::pair<size_t, size_t>> out;
  out.reserve(k);
  size_t base = n / k;
  size_t extra = n % k;
  size_t begin = 0;
  for (uint32_t i = 0; i < k; i++) {
    size_t len = base + (i < extra ? 1 : 0);
    out.emplace_back(begin, begin + len);
    begin += len;
  }
  return out;
}

/// Runs fn(part, begin, end) for each partition range, one thread per
/// partition. With a single partition (or an empty domain) runs inline.
inline void for_each_partition(size_t n, uint32_t partitions,
                               const std::function<void(uint32_t, size_t, size_t)>& fn) {
  auto ranges = partition_ranges(n, partitions);
  if (ranges.size() <= 1 || n == 0) {
    for (uint32_t i = 0; i < ranges.size(); i++) fn(i, ranges[i].first, ranges[i].second);
    return;
  }
  std::vector<std::thread> threads;
  threads.reserve(ranges.size());
  for (uint32_t i = 0; i < ranges.size(); i++) {
    threads.emplace_back([&, i] { fn(i, ranges[i].first, ranges[i].second); });
  }
  for (auto& t : threads) t.join();
}

/// Default worker count for the CLI: the env override when set and positive,
/// otherwise the hardware concurrency (at least 1).
inline uint32_t default_threads_from_env(const char* var = "HDB_THREADS") {
  if (const char* v = std::getenv(var)) {
    char* end = nullptr;
    long n = std::strtol(v, &end, 10);
    if (end && *end == '\0' && n > 0 && n <= 4096) return static_cast<uint32_t>(n);
  }
  uint32_t hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

}  // namespace hdb
