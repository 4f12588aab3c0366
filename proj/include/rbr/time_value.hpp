#pragma once

#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace rbr {

/// Raised when an exact quantity no longer fits the 128-bit representation.
class ArithmeticCapacityError : public std::overflow_error {
public:
    using std::overflow_error::overflow_error;
};

/// Exact rational time quantity.
///
/// Numerator and denominator are 128-bit integers kept in lowest terms with a
/// positive denominator. Every operation is exact; results that do not fit
/// raise ArithmeticCapacityError instead of wrapping. Values may be negative
/// (slack and differences), although domain quantities are non-negative.
class TimeValue {
public:
    using Int = __int128;

    constexpr TimeValue() = default;
    constexpr TimeValue(std::int64_t value) : num_(value) {} // NOLINT: implicit by design of the arithmetic
    TimeValue(Int num, Int den);

    static TimeValue from_ratio(std::int64_t num, std::int64_t den) { return {Int(num), Int(den)}; }

    /// Parses "12", "0.25", "-3.5", "7/3" or "1e-3". Throws std::invalid_argument.
    static TimeValue parse(std::string_view text);

    /// Nearest value on the grid 1/resolution_den, used to bring sampled doubles into exact form.
    static TimeValue from_double(double value, std::int64_t resolution_den);

    Int numerator() const { return num_; }
    Int denominator() const { return den_; }
    bool is_integer() const { return den_ == 1; }
    bool is_zero() const { return num_ == 0; }
    bool is_negative() const { return num_ < 0; }

    double to_double() const;
    /// Exact text: integer, terminating decimal, or "p/q".
    std::string to_string() const;

    /// floor(*this / divisor) and ceil(*this / divisor); divisor must be positive.
    std::int64_t floor_div(const TimeValue& divisor) const;
    std::int64_t ceil_div(const TimeValue& divisor) const;
    TimeValue floor() const;

    TimeValue operator-() const;
    TimeValue& operator+=(const TimeValue& other);
    TimeValue& operator-=(const TimeValue& other);
    TimeValue& operator*=(const TimeValue& other);
    TimeValue& operator/=(const TimeValue& other);

    friend TimeValue operator+(TimeValue a, const TimeValue& b) { return a += b; }
    friend TimeValue operator-(TimeValue a, const TimeValue& b) { return a -= b; }
    friend TimeValue operator*(TimeValue a, const TimeValue& b) { return a *= b; }
    friend TimeValue operator/(TimeValue a, const TimeValue& b) { return a /= b; }

    friend bool operator==(const TimeValue& a, const TimeValue& b) { return a.num_ == b.num_ && a.den_ == b.den_; }
    friend std::strong_ordering operator<=>(const TimeValue& a, const TimeValue& b);

private:
    Int num_ = 0;
    Int den_ = 1;
};

TimeValue min(const TimeValue& a, const TimeValue& b);
TimeValue max(const TimeValue& a, const TimeValue& b);

/// Least common multiple of two positive rationals (lcm of numerators over gcd of denominators).
TimeValue lcm(const TimeValue& a, const TimeValue& b);

std::ostream& operator<<(std::ostream& os, const TimeValue& value);

} // namespace rbr
