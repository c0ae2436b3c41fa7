#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>

#include "newsgraph/core/fixed_point.hpp"

namespace newsgraph {

using Hash32 = std::array<std::uint8_t, 32>;
using Bytes = std::span<const std::uint8_t>;

/// Incremental SHA-256.
class Sha256 {
 public:
  Sha256();
  ~Sha256();
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  Sha256& update(Bytes data);
  Sha256& update(std::string_view text);
  Sha256& update(std::int64_t big_endian_value);
  Hash32 finish();

 private:
  void* ctx_;
};

Hash32 sha256(Bytes data);
Hash32 sha256(std::string_view text);

std::string to_hex(Bytes data);
Hash32 hash_from_hex(std::string_view hex);

void put_be64(std::uint8_t* out, std::uint64_t v);
std::uint64_t get_be64(const std::uint8_t* in);
void put_be32(std::uint8_t* out, std::uint32_t v);
std::uint32_t get_be32(const std::uint8_t* in);

}  // namespace newsgraph
