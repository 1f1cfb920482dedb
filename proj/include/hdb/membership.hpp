#pragma once

#include <span>

#include "hdb/hash.hpp"

namespace hdb {

/// XOR-fold of the members' record-id digests. Two blocks get the same value
/// exactly when they contain the same record set, regardless of the order
/// members arrive in or how they were partitioned across workers, so this is
/// what block deduplication compares. The empty set folds to zero.
inline void xor_accumulate(Hash128& acc, RecordId rid) { acc ^= rid_digest(rid); }

inline Hash128 xor_membership(std::span<const RecordId> rids) {
  Hash128 acc;
  for (RecordId rid : rids) xor_accumulate(acc, rid);
  return acc;
}

}  // namespace hdb
