#include "newsgraph/core/hash.hpp"

#include <openssl/evp.h>

#include "newsgraph/core/errors.hpp"

namespace newsgraph {

namespace {

EVP_MD_CTX* as_ctx(void* p) { return static_cast<EVP_MD_CTX*>(p); }

const EVP_MD* sha256_md() {
  static const EVP_MD* md = EVP_sha256();
  return md;
}

}  // namespace

Sha256::Sha256() : ctx_(EVP_MD_CTX_new()) {
  if (ctx_ == nullptr || EVP_DigestInit_ex(as_ctx(ctx_), sha256_md(), nullptr) != 1) {
    throw Error("sha256: context init failed");
  }
}

Sha256::~Sha256() { EVP_MD_CTX_free(as_ctx(ctx_)); }

Sha256& Sha256::update(Bytes data) {
  EVP_DigestUpdate(as_ctx(ctx_), data.data(), data.size());
  return *this;
}

Sha256& Sha256::update(std::string_view text) {
  EVP_DigestUpdate(as_ctx(ctx_), text.data(), text.size());
  return *this;
}

Sha256& Sha256::update(std::int64_t big_endian_value) {
  std::uint8_t buf[8];
  put_be64(buf, static_cast<std::uint64_t>(big_endian_value));
  return update(Bytes{buf, 8});
}

Hash32 Sha256::finish() {
  Hash32 out{};
  unsigned int len = 0;
  EVP_DigestFinal_ex(as_ctx(ctx_), out.data(), &len);
  EVP_DigestInit_ex(as_ctx(ctx_), sha256_md(), nullptr);
  return out;
}

Hash32 sha256(Bytes data) {
  Hash32 out{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), out.data(), &len, sha256_md(), nullptr) != 1) {
    throw Error("sha256 failed");
  }
  return out;
}

Hash32 sha256(std::string_view text) {
  return sha256(Bytes{reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
}

std::string to_hex(Bytes data) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(data.size() * 2);
  for (std::uint8_t b : data) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0xf]);
  }
  return out;
}

Hash32 hash_from_hex(std::string_view hex) {
  if (hex.size() != 64) throw FormatError("hash hex must be 64 characters");
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    throw FormatError("bad hex digit");
  };
  Hash32 out{};
  for (std::size_t i = 0; i < 32; ++i) {
    out[i] = static_cast<std::uint8_t>(nibble(hex[2 * i]) << 4 | nibble(hex[2 * i + 1]));
  }
  return out;
}

void put_be64(std::uint8_t* out, std::uint64_t v) {
  for (int i = 7; i >= 0; --i) {
    out[i] = static_cast<std::uint8_t>(v & 0xff);
    v >>= 8;
  }
}

std::uint64_t get_be64(const std::uint8_t* in) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v = v << 8 | in[i];
  return v;
}

void put_be32(std::uint8_t* out, std::uint32_t v) {
  for (int i = 3; i >= 0; --i) {
    out[i] = static_cast<std::uint8_t>(v & 0xff);
    v >>= 8;
  }
}

std::uint32_t get_be32(const std::uint8_t* in) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v = v << 8 | in[i];
  return v;
}

}  // namespace newsgraph
