#include "newsgraph/ssamt/proof_codec.hpp"

#include "newsgraph/core/errors.hpp"

namespace newsgraph::ssamt {

std::vector<std::uint8_t> encode_proof(const Proof& proof) {
  const std::size_t n = proof.siblings.size();
  std::vector<std::uint8_t> out(1 + 4 + 4 + 8 + 8 * proof.values.size() + 4 +
                                Node::kWireSize * n + (n + 7) / 8);
  std::uint8_t* p = out.data();
  *p++ = static_cast<std::uint8_t>(proof.kind);
  put_be32(p, proof.row);
  put_be32(p + 4, proof.col);
  put_be64(p + 8, proof.values.size());
  p += 16;
  for (Fixed v : proof.values) {
    put_be64(p, static_cast<std::uint64_t>(v.raw()));
    p += 8;
  }
  put_be32(p, static_cast<std::uint32_t>(n));
  p += 4;
  for (const auto& s : proof.siblings) {
    const auto bytes = s.encode();
    std::copy(bytes.begin(), bytes.end(), p);
    p += Node::kWireSize;
  }
  for (std::size_t l = 0; l < proof.path.size(); ++l) {
    if (proof.path[l]) p[l / 8] |= static_cast<std::uint8_t>(0x80u >> (l % 8));
  }
  return out;
}

Proof decode_proof(std::span<const std::uint8_t> bytes) {
  std::size_t pos = 0;
  auto need = [&](std::size_t n) {
    if (bytes.size() - pos < n) throw ProofFormatError("proof truncated");
  };
  Proof proof;
  need(17);
  if (bytes[0] > 1) throw ProofFormatError("unknown proof kind");
  proof.kind = static_cast<ProofKind>(bytes[0]);
  proof.row = get_be32(&bytes[1]);
  proof.col = get_be32(&bytes[5]);
  const std::uint64_t value_count = get_be64(&bytes[9]);
  pos = 17;
  if (value_count > (bytes.size() - pos) / 8) throw ProofFormatError("proof truncated");
  for (std::uint64_t i = 0; i < value_count; ++i) {
    proof.values.push_back(Fixed::from_raw(static_cast<std::int64_t>(get_be64(&bytes[pos]))));
    pos += 8;
  }
  need(4);
  const std::uint32_t n = get_be32(&bytes[pos]);
  pos += 4;
  if (n > (bytes.size() - pos) / Node::kWireSize) throw ProofFormatError("proof truncated");
  for (std::uint32_t i = 0; i < n; ++i) {
    proof.siblings.push_back(Node::decode(bytes.subspan(pos, Node::kWireSize)));
    pos += Node::kWireSize;
  }
  need((n + 7) / 8);
  for (std::uint32_t l = 0; l < n; ++l) {
    proof.path.push_back((bytes[pos + l / 8] & (0x80u >> (l % 8))) != 0);
  }
  pos += (n + 7) / 8;
  if (pos != bytes.size()) throw ProofFormatError("trailing bytes after proof");
  return proof;
}

}  // namespace newsgraph::ssamt
