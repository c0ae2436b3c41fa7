#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "newsgraph/core/fixed_point.hpp"
#include "newsgraph/core/hash.hpp"
#include "newsgraph/core/matrix.hpp"

namespace newsgraph::ssamt {

/// Square-sum annotated node: s aggregates squared leaf values, h commits to
/// s and both children.
struct Node {
  Fixed s;
  Hash32 h{};

  static constexpr std::size_t kWireSize = 40;  // 8-byte s, 32-byte h
  std::array<std::uint8_t, kWireSize> encode() const;
  static Node decode(std::span<const std::uint8_t> bytes);

  friend bool operator==(const Node&, const Node&) = default;
};

/// How a matrix payload becomes a leaf.
///   Value:  s = x^2, h = H(x)   (latent factor matrices)
///   Square: s = x,   h = H(x)   (error matrix, whose payload is already em^2)
enum class LeafRule : std::uint8_t { Value = 0, Square = 1 };

Hash32 payload_hash(Fixed payload);
Node make_leaf(Fixed payload, LeafRule rule);
/// s = left.s + right.s, h = H(s || left.h || right.h). Throws on overflow.
Node combine(const Node& left, const Node& right);

/// Padded layout. Row length is padded to a power of two (at least 2) and the
/// row count to a power of two, so leaves in row-major order form a perfect
/// binary tree in which every row is one complete subtree.
struct Shape {
  std::size_t rows = 0;
  std::size_t cols = 0;

  std::size_t padded_rows() const;
  std::size_t padded_cols() const;
  int row_depth() const;  // levels above a row subtree
  int col_depth() const;  // levels inside a row subtree
  int depth() const { return row_depth() + col_depth(); }
  std::size_t padded_leaves() const { return padded_rows() * padded_cols(); }
  std::size_t leaf_index(std::size_t i, std::size_t j) const { return i * padded_cols() + j; }

  friend bool operator==(const Shape&, const Shape&) = default;
};

class Tree {
 public:
  /// Throws DomainError for an empty matrix, ArithmeticOverflow if a square
  /// sum leaves the fixed-point range.
  static Tree build(const FixedMatrix& m, LeafRule rule = LeafRule::Value);

  const Shape& shape() const { return shape_; }
  LeafRule rule() const { return rule_; }
  int depth() const { return shape_.depth(); }
  const Node& root() const { return levels_.back().front(); }

  /// Level 0 holds the leaves; level depth() holds the root.
  const Node& node(int level, std::size_t index) const { return levels_[level][index]; }
  Fixed payload(std::size_t i, std::size_t j) const;

 private:
  Shape shape_;
  LeafRule rule_ = LeafRule::Value;
  FixedMatrix payloads_;
  std::vector<std::vector<Node>> levels_;
};

enum class ProofKind : std::uint8_t { Element = 0, Row = 1 };

struct Proof {
  ProofKind kind = ProofKind::Element;
  std::uint32_t row = 0;
  std::uint32_t col = 0;
  std::vector<Fixed> values;   // the element, or the unpadded row
  std::vector<Node> siblings;  // bottom-up
  std::vector<bool> path;      // per sibling: true when our node is the right child

  friend bool operator==(const Proof&, const Proof&) = default;
};

/// Throws DomainError for indices outside the unpadded matrix.
Proof element_proof(const Tree& tree, std::size_t i, std::size_t j);
Proof row_proof(const Tree& tree, std::size_t i);

/// Recomputes (s, h) up the path. Accepts iff both match the root and the
/// path bits match the claimed position. Throws DomainError for an
/// out-of-range index and ProofFormatError for a wrong sibling count.
bool verify_element(const Node& root, const Shape& shape, std::size_t i, std::size_t j,
                    Fixed value, const Proof& proof, LeafRule rule = LeafRule::Value);

/// On acceptance returns the row subtree's s, i.e. the sum of the row's
/// leaf s values. `row_values` holds the unpadded row.
std::optional<Fixed> verify_row(const Node& root, const Shape& shape, std::size_t i,
                                std::span<const Fixed> row_values, const Proof& proof,
                                LeafRule rule = LeafRule::Value);

/// Root of the subtree built from `leaves` (size must be a power of two).
Node subtree_root(std::span<const Node> leaves);

}  // namespace newsgraph::ssamt
