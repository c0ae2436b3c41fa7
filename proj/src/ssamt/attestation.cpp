#include "newsgraph/ssamt/attestation.hpp"

#include <algorithm>
#include <bit>

#include "newsgraph/core/errors.hpp"

namespace newsgraph::ssamt {

Chunk make_chunk(Fixed element, const Salt& salt) {
  Chunk c{};
  put_be64(c.data(), static_cast<std::uint64_t>(element.raw()));
  std::copy(salt.begin(), salt.end(), c.begin() + 8);
  return c;
}

Fixed chunk_element(const Chunk& chunk) {
  return Fixed::from_raw(static_cast<std::int64_t>(get_be64(chunk.data())));
}

Hash32 merkle_parent(const Hash32& left, const Hash32& right) {
  std::uint8_t buf[64];
  std::copy(left.begin(), left.end(), buf);
  std::copy(right.begin(), right.end(), buf + 32);
  return sha256(Bytes{buf, 64});
}

std::size_t attestation_padded_size(std::size_t num_chunks) {
  return std::bit_ceil(std::max<std::size_t>(num_chunks, 2));
}

int attestation_depth(std::size_t num_chunks) {
  return std::countr_zero(attestation_padded_size(num_chunks));
}

AttestationTree AttestationTree::build(const FixedMatrix& data,
                                       std::span<const std::uint8_t> salt) {
  if (salt.size() != 32) throw DomainError("attestation salt must be exactly 32 bytes");
  Salt s{};
  std::copy(salt.begin(), salt.end(), s.begin());
  return build(data, s);
}

AttestationTree AttestationTree::build(const FixedMatrix& data, const Salt& salt) {
  if (data.size() == 0) throw DomainError("attestation needs non-empty data");
  AttestationTree t;
  t.salt_ = salt;
  t.num_chunks_ = data.size();
  t.chunks_.reserve(data.size());
  for (Fixed x : data.values()) t.chunks_.push_back(make_chunk(x, salt));

  const Chunk pad = make_chunk(Fixed{}, salt);
  const Hash32 pad_hash = sha256(Bytes{pad.data(), pad.size()});
  std::vector<Hash32> leaves(attestation_padded_size(t.num_chunks_), pad_hash);
  for (std::size_t i = 0; i < t.chunks_.size(); ++i) {
    leaves[i] = sha256(Bytes{t.chunks_[i].data(), t.chunks_[i].size()});
  }
  t.levels_.push_back(std::move(leaves));
  while (t.levels_.back().size() > 1) {
    const auto& below = t.levels_.back();
    std::vector<Hash32> up(below.size() / 2);
    for (std::size_t i = 0; i < up.size(); ++i) {
      up[i] = merkle_parent(below[2 * i], below[2 * i + 1]);
    }
    t.levels_.push_back(std::move(up));
  }
  return t;
}

MerkleProof chunk_proof(const AttestationTree& tree, std::size_t x) {
  if (x >= tree.num_chunks()) throw DomainError("chunk index out of range");
  MerkleProof p;
  p.index = x;
  std::size_t index = x;
  for (int level = 0; level < tree.depth(); ++level) {
    p.siblings.push_back(tree.node(level, index ^ 1));
    index >>= 1;
  }
  return p;
}

bool verify_chunk(const Hash32& root, std::size_t num_chunks, std::size_t x,
                  const Chunk& chunk, const MerkleProof& proof) {
  if (x >= num_chunks || proof.index != x) return false;
  if (proof.siblings.size() != static_cast<std::size_t>(attestation_depth(num_chunks))) {
    return false;
  }
  Hash32 h = sha256(Bytes{chunk.data(), chunk.size()});
  std::size_t index = x;
  for (const auto& sib : proof.siblings) {
    h = (index & 1) ? merkle_parent(sib, h) : merkle_parent(h, sib);
    index >>= 1;
  }
  return h == root;
}

}  // namespace newsgraph::ssamt
