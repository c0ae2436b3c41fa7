#pragma once

#include <compare>
#include <cstdint>
#include <span>
#include <string>

namespace newsgraph {

__extension__ using int128 = __int128;
__extension__ using uint128 = unsigned __int128;

/// Signed Q31.32 fixed-point number.
///
/// Every value that the judge compares is a Fixed. Addition is exact,
/// multiplication rounds the 64 discarded bits half-to-even, and any result
/// that does not fit in 64 raw bits throws ArithmeticOverflow. No floating
/// point is involved in any operation except conversion.
class Fixed {
 public:
  static constexpr int kFracBits = 32;
  static constexpr std::int64_t kOneRaw = std::int64_t{1} << kFracBits;

  constexpr Fixed() = default;

  static constexpr Fixed from_raw(std::int64_t raw) {
    Fixed f;
    f.raw_ = raw;
    return f;
  }
  static Fixed from_int(std::int64_t value);
  /// Round-half-to-even onto the 2^-32 grid. Throws DomainError on NaN/Inf
  /// and ArithmeticOverflow when |x| >= 2^31.
  static Fixed quantize(double x);
  static constexpr Fixed epsilon() { return from_raw(1); }
  static constexpr Fixed one() { return from_raw(kOneRaw); }

  constexpr std::int64_t raw() const { return raw_; }
  double to_double() const;
  std::string to_string() const;

  Fixed squared() const { return *this * *this; }

  friend Fixed operator+(Fixed a, Fixed b);
  friend Fixed operator-(Fixed a, Fixed b);
  friend Fixed operator-(Fixed a);
  friend Fixed operator*(Fixed a, Fixed b);
  Fixed& operator+=(Fixed other) { return *this = *this + other; }
  Fixed& operator-=(Fixed other) { return *this = *this - other; }

  friend constexpr auto operator<=>(Fixed, Fixed) = default;
  friend constexpr bool operator==(Fixed, Fixed) = default;

 private:
  std::int64_t raw_ = 0;
};

/// Shift right by `bits`, rounding half to even. Exposed for tests.
int128 round_shift_half_even(int128 value, int bits);

/// Narrow a Q-format value held in 128 bits; throws on overflow.
Fixed narrow_raw(int128 raw);

/// Dot product accumulated exactly in 128 bits and rounded once.
Fixed dot(std::span<const Fixed> a, std::span<const Fixed> b);

}  // namespace newsgraph
