#include "newsgraph/core/fixed_point.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include "newsgraph/core/errors.hpp"

namespace newsgraph {

namespace {

constexpr double kScale = 4294967296.0;  // 2^32
constexpr double kLimit = 9223372036854775808.0;  // 2^63

}  // namespace

Fixed narrow_raw(int128 raw) {
  if (raw > std::numeric_limits<std::int64_t>::max() ||
      raw < std::numeric_limits<std::int64_t>::min()) {
    throw ArithmeticOverflow("fixed-point result out of range");
  }
  return Fixed::from_raw(static_cast<std::int64_t>(raw));
}

int128 round_shift_half_even(int128 value, int bits) {
  if (bits == 0) return value;
  const int128 one = 1;
  const int128 mask = (one << bits) - 1;
  const int128 half = one << (bits - 1);
  // Arithmetic shift floors toward -inf; the remainder is always >= 0.
  int128 q = value >> bits;
  const int128 rem = value & mask;
  if (rem > half || (rem == half && (q & 1) != 0)) ++q;
  return q;
}

Fixed Fixed::from_int(std::int64_t value) {
  return narrow_raw(static_cast<int128>(value) * kOneRaw);
}

Fixed Fixed::quantize(double x) {
  if (!std::isfinite(x)) throw DomainError("cannot quantize a non-finite value");
  // Scaling by a power of two is exact, so the only rounding is nearbyint,
  // which uses the default round-to-nearest-even mode.
  const double scaled = std::nearbyint(x * kScale);
  if (scaled >= kLimit || scaled < -kLimit) {
    throw ArithmeticOverflow("value too large for Q31.32");
  }
  return from_raw(static_cast<std::int64_t>(scaled));
}

double Fixed::to_double() const { return static_cast<double>(raw_) / kScale; }

std::string Fixed::to_string() const {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", to_double());
  return buf;
}

Fixed operator+(Fixed a, Fixed b) {
  std::int64_t out;
  if (__builtin_add_overflow(a.raw_, b.raw_, &out)) {
    throw ArithmeticOverflow("fixed-point addition overflow");
  }
  return Fixed::from_raw(out);
}

Fixed operator-(Fixed a, Fixed b) {
  std::int64_t out;
  if (__builtin_sub_overflow(a.raw_, b.raw_, &out)) {
    throw ArithmeticOverflow("fixed-point subtraction overflow");
  }
  return Fixed::from_raw(out);
}

Fixed operator-(Fixed a) { return Fixed{} - a; }

Fixed operator*(Fixed a, Fixed b) {
  const int128 product = static_cast<int128>(a.raw_) * b.raw_;
  return narrow_raw(round_shift_half_even(product, Fixed::kFracBits));
}

Fixed dot(std::span<const Fixed> a, std::span<const Fixed> b) {
  if (a.size() != b.size()) throw DimensionMismatch("dot: length mismatch");
  int128 acc = 0;
  for (std::size_t f = 0; f < a.size(); ++f) {
    const int128 p = static_cast<int128>(a[f].raw()) * b[f].raw();
    if (__builtin_add_overflow(acc, p, &acc)) {
      throw ArithmeticOverflow("dot product accumulator overflow");
    }
  }
  return narrow_raw(round_shift_half_even(acc, Fixed::kFracBits));
}

}  // namespace newsgraph

#include "newsgraph/core/matrix.hpp"

namespace newsgraph {

FixedMatrix quantize(const RealMatrix& m) {
  FixedMatrix out(m.rows(), m.cols());
  auto src = m.values();
  auto dst = out.values();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = Fixed::quantize(src[i]);
  return out;
}

RealMatrix dequantize(const FixedMatrix& m) {
  RealMatrix out(m.rows(), m.cols());
  auto src = m.values();
  auto dst = out.values();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i].to_double();
  return out;
}

}  // namespace newsgraph
