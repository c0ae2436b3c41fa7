#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "newsgraph/ssamt/ssamt.hpp"

namespace newsgraph::ssamt {

// Wire format, big-endian throughout:
//   u8 kind | u32 row | u32 col | u64 value count | values (i64 raw each)
//   | u32 sibling count | siblings (40 bytes each)
//   | path bits, ceil(count / 8) bytes, bit l at byte l/8, mask 0x80 >> (l%8)
std::vector<std::uint8_t> encode_proof(const Proof& proof);
/// Throws ProofFormatError on truncated, oversized or malformed input.
Proof decode_proof(std::span<const std::uint8_t> bytes);

}  // namespace newsgraph::ssamt
