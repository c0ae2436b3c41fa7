#include "newsgraph/ssamt/ssamt.hpp"

#include <bit>
#include <string>

#include "newsgraph/core/errors.hpp"

namespace newsgraph::ssamt {

std::array<std::uint8_t, Node::kWireSize> Node::encode() const {
  std::array<std::uint8_t, kWireSize> out{};
  put_be64(out.data(), static_cast<std::uint64_t>(s.raw()));
  std::copy(h.begin(), h.end(), out.begin() + 8);
  return out;
}

Node Node::decode(std::span<const std::uint8_t> bytes) {
  if (bytes.size() != kWireSize) throw ProofFormatError("SSAMT node must be 40 bytes");
  Node n;
  n.s = Fixed::from_raw(static_cast<std::int64_t>(get_be64(bytes.data())));
  std::copy(bytes.begin() + 8, bytes.end(), n.h.begin());
  return n;
}

Hash32 payload_hash(Fixed payload) {
  std::uint8_t buf[8];
  put_be64(buf, static_cast<std::uint64_t>(payload.raw()));
  return sha256(Bytes{buf, 8});
}

Node make_leaf(Fixed payload, LeafRule rule) {
  return {rule == LeafRule::Value ? payload.squared() : payload, payload_hash(payload)};
}

Node combine(const Node& left, const Node& right) {
  Node out;
  out.s = left.s + right.s;
  std::uint8_t buf[8 + 32 + 32];
  put_be64(buf, static_cast<std::uint64_t>(out.s.raw()));
  std::copy(left.h.begin(), left.h.end(), buf + 8);
  std::copy(right.h.begin(), right.h.end(), buf + 40);
  out.h = sha256(Bytes{buf, sizeof buf});
  return out;
}

std::size_t Shape::padded_rows() const { return std::bit_ceil(std::max<std::size_t>(rows, 1)); }
std::size_t Shape::padded_cols() const { return std::bit_ceil(std::max<std::size_t>(cols, 2)); }
int Shape::row_depth() const { return std::countr_zero(padded_rows()); }
int Shape::col_depth() const { return std::countr_zero(padded_cols()); }

Node subtree_root(std::span<const Node> leaves) {
  if (leaves.empty() || !std::has_single_bit(leaves.size())) {
    throw DomainError("subtree needs a power-of-two leaf count");
  }
  std::vector<Node> level(leaves.begin(), leaves.end());
  while (level.size() > 1) {
    std::vector<Node> up(level.size() / 2);
    for (std::size_t i = 0; i < up.size(); ++i) up[i] = combine(level[2 * i], level[2 * i + 1]);
    level = std::move(up);
  }
  return level.front();
}

Tree Tree::build(const FixedMatrix& m, LeafRule rule) {
  if (m.rows() == 0 || m.cols() == 0) throw DomainError("SSAMT needs a non-empty matrix");
  Tree t;
  t.shape_ = Shape{m.rows(), m.cols()};
  t.rule_ = rule;
  t.payloads_ = m;

  const std::size_t pc = t.shape_.padded_cols();
  const Node zero = make_leaf(Fixed{}, rule);
  std::vector<Node> leaves(t.shape_.padded_leaves(), zero);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) leaves[i * pc + j] = make_leaf(m(i, j), rule);
  }
  t.levels_.push_back(std::move(leaves));
  while (t.levels_.back().size() > 1) {
    const auto& below = t.levels_.back();
    std::vector<Node> up(below.size() / 2);
    for (std::size_t i = 0; i < up.size(); ++i) up[i] = combine(below[2 * i], below[2 * i + 1]);
    t.levels_.push_back(std::move(up));
  }
  return t;
}

Fixed Tree::payload(std::size_t i, std::size_t j) const {
  if (i >= shape_.padded_rows() || j >= shape_.padded_cols()) {
    throw DomainError("payload index out of range");
  }
  if (i >= shape_.rows || j >= shape_.cols) return Fixed{};
  return payloads_(i, j);
}

namespace {

void check_index(const Shape& shape, std::size_t i, std::size_t j) {
  if (i >= shape.rows || j >= shape.cols) {
    throw DomainError("SSAMT index (" + std::to_string(i) + "," + std::to_string(j) +
                      ") outside " + std::to_string(shape.rows) + "x" +
                      std::to_string(shape.cols));
  }
}

void collect_path(const Tree& tree, int from_level, std::size_t index, Proof& proof) {
  for (int level = from_level; level < tree.depth(); ++level) {
    proof.siblings.push_back(tree.node(level, index ^ 1));
    proof.path.push_back((index & 1) != 0);
    index >>= 1;
  }
}

// Folds `node` up through the siblings; nullopt when the path bits disagree
// with `index` or a sum overflows.
std::optional<Node> fold_up(Node node, std::size_t index, const Proof& proof) {
  try {
    for (std::size_t l = 0; l < proof.siblings.size(); ++l) {
      const bool right = (index & 1) != 0;
      if (proof.path[l] != right) return std::nullopt;
      node = right ? combine(proof.siblings[l], node) : combine(node, proof.siblings[l]);
      index >>= 1;
    }
  } catch (const ArithmeticOverflow&) {
    return std::nullopt;
  }
  return node;
}

}  // namespace

Proof element_proof(const Tree& tree, std::size_t i, std::size_t j) {
  check_index(tree.shape(), i, j);
  Proof p;
  p.kind = ProofKind::Element;
  p.row = static_cast<std::uint32_t>(i);
  p.col = static_cast<std::uint32_t>(j);
  p.values = {tree.payload(i, j)};
  collect_path(tree, 0, tree.shape().leaf_index(i, j), p);
  return p;
}

Proof row_proof(const Tree& tree, std::size_t i) {
  check_index(tree.shape(), i, 0);
  Proof p;
  p.kind = ProofKind::Row;
  p.row = static_cast<std::uint32_t>(i);
  p.col = 0;
  for (std::size_t j = 0; j < tree.shape().cols; ++j) p.values.push_back(tree.payload(i, j));
  collect_path(tree, tree.shape().col_depth(), i, p);
  return p;
}

bool verify_element(const Node& root, const Shape& shape, std::size_t i, std::size_t j,
                    Fixed value, const Proof& proof, LeafRule rule) {
  check_index(shape, i, j);
  if (proof.siblings.size() != static_cast<std::size_t>(shape.depth()) ||
      proof.path.size() != proof.siblings.size()) {
    throw ProofFormatError("element proof must carry " + std::to_string(shape.depth()) +
                           " siblings");
  }
  if (proof.kind != ProofKind::Element || proof.row != i || proof.col != j) return false;
  Node leaf;
  try {
    leaf = make_leaf(value, rule);
  } catch (const ArithmeticOverflow&) {
    return false;
  }
  auto top = fold_up(leaf, shape.leaf_index(i, j), proof);
  return top && *top == root;
}

std::optional<Fixed> verify_row(const Node& root, const Shape& shape, std::size_t i,
                                std::span<const Fixed> row_values, const Proof& proof,
                                LeafRule rule) {
  check_index(shape, i, 0);
  if (proof.siblings.size() != static_cast<std::size_t>(shape.row_depth()) ||
      proof.path.size() != proof.siblings.size()) {
    throw ProofFormatError("row proof must carry " + std::to_string(shape.row_depth()) +
                           " siblings");
  }
  if (proof.kind != ProofKind::Row || proof.row != i) return std::nullopt;
  if (row_values.size() != shape.cols) return std::nullopt;
  Node subtree;
  try {
    std::vector<Node> leaves(shape.padded_cols(), make_leaf(Fixed{}, rule));
    for (std::size_t j = 0; j < row_values.size(); ++j) leaves[j] = make_leaf(row_values[j], rule);
    subtree = subtree_root(leaves);
  } catch (const ArithmeticOverflow&) {
    return std::nullopt;
  }
  auto top = fold_up(subtree, i, proof);
  if (!top || *top != root) return std::nullopt;
  return subtree.s;
}

}  // namespace newsgraph::ssamt
