#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hdb/hash.hpp"

namespace hdb {

/// m position seeds derived from the global seed; position i of a signature
/// is the minimum over tokens of the token's hash under seed i.
std::vector<uint64_t> minhash_position_seeds(uint32_t m, uint64_t seed);

/// Signature of a non-empty token set. Deterministic in (tokens, m, seed);
/// token order never matters.
std::vector<uint64_t> minhash_signature(std::span<const std::string> tokens, uint32_t m,
                                        uint64_t seed);

/// Fraction of agreeing positions between two equal-length signatures;
/// estimates the Jaccard similarity of the underlying sets.
double signature_agreement(std::span<const uint64_t> a, std::span<const uint64_t> b);

}  // namespace hdb
