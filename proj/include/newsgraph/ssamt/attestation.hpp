#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "newsgraph/core/hash.hpp"
#include "newsgraph/core/matrix.hpp"

namespace newsgraph::ssamt {

using Salt = Hash32;

/// C[i] = D[i] || salt, with D[i] the 8-byte big-endian raw matrix element.
using Chunk = std::array<std::uint8_t, 40>;

Chunk make_chunk(Fixed element, const Salt& salt);
Fixed chunk_element(const Chunk& chunk);
Hash32 merkle_parent(const Hash32& left, const Hash32& right);

/// Plain Merkle tree over H(C[i]) in row-major element order, padded to a
/// power of two (at least 2) with chunks of the zero element.
class AttestationTree {
 public:
  static AttestationTree build(const FixedMatrix& data, const Salt& salt);
  /// Throws DomainError unless `salt` is exactly 32 bytes.
  static AttestationTree build(const FixedMatrix& data, std::span<const std::uint8_t> salt);

  const Hash32& root() const { return levels_.back().front(); }
  std::size_t num_chunks() const { return num_chunks_; }
  std::size_t padded_size() const { return levels_.front().size(); }
  int depth() const { return static_cast<int>(levels_.size()) - 1; }
  const Hash32& node(int level, std::size_t index) const { return levels_[level][index]; }
  const Chunk& chunk(std::size_t x) const { return chunks_[x]; }
  const Salt& salt() const { return salt_; }

 private:
  Salt salt_{};
  std::size_t num_chunks_ = 0;
  std::vector<Chunk> chunks_;
  std::vector<std::vector<Hash32>> levels_;
};

/// Padded leaf count for `n` chunks.
std::size_t attestation_padded_size(std::size_t num_chunks);
int attestation_depth(std::size_t num_chunks);

struct MerkleProof {
  std::uint64_t index = 0;
  std::vector<Hash32> siblings;  // bottom-up
};

MerkleProof chunk_proof(const AttestationTree& tree, std::size_t x);
bool verify_chunk(const Hash32& root, std::size_t num_chunks, std::size_t x,
                  const Chunk& chunk, const MerkleProof& proof);

}  // namespace newsgraph::ssamt
