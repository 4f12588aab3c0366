#include "rbr/time_value.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <utility>

namespace rbr {

namespace {

using Int = TimeValue::Int;
using UInt = unsigned __int128;

constexpr Int kInt64Max = std::numeric_limits<std::int64_t>::max();
constexpr Int kInt64Min = std::numeric_limits<std::int64_t>::min();

[[noreturn]] void capacity(const char* what)
{
    throw ArithmeticCapacityError(std::string("time arithmetic exceeds 128-bit capacity in ") + what);
}

Int add(Int a, Int b)
{
    Int r;
    if (__builtin_add_overflow(a, b, &r))
        capacity("add");
    return r;
}

Int mul(Int a, Int b)
{
    Int r;
    if (__builtin_mul_overflow(a, b, &r))
        capacity("multiply");
    return r;
}

UInt uabs(Int v)
{
    return v < 0 ? UInt(0) - UInt(v) : UInt(v);
}

int ctz(UInt x)
{
    auto lo = static_cast<unsigned long long>(x);
    if (lo != 0)
        return __builtin_ctzll(lo);
    return 64 + __builtin_ctzll(static_cast<unsigned long long>(x >> 64));
}

// binary gcd; std::gcd rejects __int128 outside GNU mode
UInt gcd(UInt a, UInt b)
{
    if (a == 0)
        return b;
    if (b == 0)
        return a;
    if ((a >> 64) == 0 && (b >> 64) == 0) {
        auto x = static_cast<unsigned long long>(a);
        auto y = static_cast<unsigned long long>(b);
        int s64 = __builtin_ctzll(x | y);
        x >>= __builtin_ctzll(x);
        do {
            y >>= __builtin_ctzll(y);
            if (x > y)
                std::swap(x, y);
            y -= x;
        } while (y != 0);
        return UInt(x << s64);
    }
    int shift = ctz(a | b);
    a >>= ctz(a);
    do {
        b >>= ctz(b);
        if (a > b) {
            UInt t = a;
            a = b;
            b = t;
        }
        b -= a;
    } while (b != 0);
    return a << shift;
}

Int gcd_signed(Int a, Int b)
{
    UInt g = gcd(uabs(a), uabs(b));
    if (g > UInt(std::numeric_limits<Int>::max()))
        capacity("gcd");
    return Int(g);
}

Int floor_ratio(Int num, Int den)
{
    Int q = num / den;
    if (num % den != 0 && ((num < 0) != (den < 0)))
        --q;
    return q;
}

std::int64_t narrow(Int v)
{
    if (v > kInt64Max || v < kInt64Min)
        capacity("integer quotient");
    return static_cast<std::int64_t>(v);
}

std::string int_to_string(Int v)
{
    if (v == 0)
        return "0";
    bool neg = v < 0;
    UInt u = uabs(v);
    std::string out;
    while (u != 0) {
        out.push_back(static_cast<char>('0' + static_cast<int>(u % 10)));
        u /= 10;
    }
    if (neg)
        out.push_back('-');
    return {out.rbegin(), out.rend()};
}

Int pow10(int k)
{
    Int r = 1;
    for (int i = 0; i < k; ++i)
        r = mul(r, 10);
    return r;
}

// -1, 0, 1 for a/b vs c/d with b, d > 0, exact even when cross products overflow
int compare_fractions(Int a, Int b, Int c, Int d)
{
    for (;;) {
        Int lhs, rhs;
        if (!__builtin_mul_overflow(a, d, &lhs) && !__builtin_mul_overflow(c, b, &rhs))
            return lhs < rhs ? -1 : (lhs > rhs ? 1 : 0);
        Int qa = floor_ratio(a, b);
        Int qc = floor_ratio(c, d);
        if (qa != qc)
            return qa < qc ? -1 : 1;
        Int ra = a - qa * b; // in [0, b)
        Int rc = c - qc * d;
        if (ra == 0 || rc == 0)
            return ra == rc ? 0 : (ra == 0 ? -1 : 1);
        // compare ra/b vs rc/d  <=>  compare d/rc vs b/ra (reciprocals flip the order)
        Int na = d, da = rc, nc = b, dc = ra;
        a = na;
        b = da;
        c = nc;
        d = dc;
    }
}

} // namespace

TimeValue::TimeValue(Int num, Int den)
{
    if (den == 0)
        throw std::domain_error("time value with zero denominator");
    if (den < 0) {
        num = -num;
        den = -den;
    }
    if (den == 1) {
        num_ = num;
        den_ = 1;
        return;
    }
    if (num == 0) {
        num_ = 0;
        den_ = 1;
        return;
    }
    Int g = gcd_signed(num, den);
    if (g > 1) {
        num /= g;
        den /= g;
    }
    num_ = num;
    den_ = den;
}

TimeValue TimeValue::parse(std::string_view text)
{
    auto fail = [&]() -> TimeValue {
        throw std::invalid_argument("not a number: '" + std::string(text) + "'");
    };
    while (!text.empty() && text.front() == ' ')
        text.remove_prefix(1);
    while (!text.empty() && text.back() == ' ')
        text.remove_suffix(1);
    if (text.empty())
        return fail();

    if (auto slash = text.find('/'); slash != std::string_view::npos) {
        TimeValue n = parse(text.substr(0, slash));
        TimeValue d = parse(text.substr(slash + 1));
        if (d.is_zero())
            return fail();
        return n / d;
    }

    std::size_t pos = 0;
    bool neg = false;
    if (text[pos] == '+' || text[pos] == '-') {
        neg = text[pos] == '-';
        ++pos;
    }
    Int num = 0;
    int frac_digits = 0;
    bool any_digit = false;
    bool seen_point = false;
    for (; pos < text.size(); ++pos) {
        char c = text[pos];
        if (c >= '0' && c <= '9') {
            num = add(mul(num, 10), c - '0');
            any_digit = true;
            if (seen_point)
                ++frac_digits;
        } else if (c == '.' && !seen_point) {
            seen_point = true;
        } else {
            break;
        }
    }
    if (!any_digit)
        return fail();
    int exponent = 0;
    if (pos < text.size()) {
        if (text[pos] != 'e' && text[pos] != 'E')
            return fail();
        ++pos;
        std::string rest(text.substr(pos));
        if (rest.empty())
            return fail();
        std::size_t used = 0;
        try {
            exponent = std::stoi(rest, &used);
        } catch (const std::exception&) {
            return fail();
        }
        if (used != rest.size() || exponent > 30 || exponent < -30)
            return fail();
    }
    int scale = exponent - frac_digits;
    TimeValue out = scale >= 0 ? TimeValue(mul(num, pow10(scale)), 1) : TimeValue(num, pow10(-scale));
    return neg ? -out : out;
}

TimeValue TimeValue::from_double(double value, std::int64_t resolution_den)
{
    if (resolution_den <= 0 || !std::isfinite(value))
        throw std::invalid_argument("from_double: bad input");
    double scaled = std::round(value * static_cast<double>(resolution_den));
    if (std::fabs(scaled) > 9.0e18)
        capacity("from_double");
    return {Int(static_cast<std::int64_t>(scaled)), Int(resolution_den)};
}

double TimeValue::to_double() const
{
    return static_cast<double>(num_) / static_cast<double>(den_);
}

std::string TimeValue::to_string() const
{
    if (den_ == 1)
        return int_to_string(num_);
    Int d = den_;
    int twos = 0, fives = 0;
    while (d % 2 == 0) {
        d /= 2;
        ++twos;
    }
    while (d % 5 == 0) {
        d /= 5;
        ++fives;
    }
    int digits = twos > fives ? twos : fives;
    Int scaled;
    if (d == 1 && digits <= 30 && !__builtin_mul_overflow(num_, pow10(digits) / den_, &scaled)) {
        bool neg = scaled < 0;
        std::string body = int_to_string(neg ? -scaled : scaled);
        if (static_cast<int>(body.size()) <= digits)
            body.insert(0, static_cast<std::size_t>(digits) - body.size() + 1, '0');
        body.insert(body.size() - static_cast<std::size_t>(digits), 1, '.');
        return neg ? "-" + body : body;
    }
    return int_to_string(num_) + "/" + int_to_string(den_);
}

std::int64_t TimeValue::floor_div(const TimeValue& divisor) const
{
    if (divisor.num_ <= 0)
        throw std::domain_error("floor_div by non-positive value");
    if (den_ == 1 && divisor.den_ == 1)
        return narrow(floor_ratio(num_, divisor.num_));
    Int n, d;
    if (!__builtin_mul_overflow(num_, divisor.den_, &n) && !__builtin_mul_overflow(den_, divisor.num_, &d))
        return narrow(floor_ratio(n, d));
    TimeValue q = *this / divisor;
    return narrow(floor_ratio(q.num_, q.den_));
}

std::int64_t TimeValue::ceil_div(const TimeValue& divisor) const
{
    if (divisor.num_ <= 0)
        throw std::domain_error("ceil_div by non-positive value");
    if (den_ == 1 && divisor.den_ == 1)
        return narrow(-floor_ratio(-num_, divisor.num_));
    Int n, d;
    if (!__builtin_mul_overflow(num_, divisor.den_, &n) && !__builtin_mul_overflow(den_, divisor.num_, &d))
        return narrow(-floor_ratio(-n, d));
    TimeValue q = *this / divisor;
    return narrow(-floor_ratio(-q.num_, q.den_));
}

TimeValue TimeValue::floor() const
{
    return {floor_ratio(num_, den_), 1};
}

TimeValue TimeValue::operator-() const
{
    TimeValue r;
    if (num_ == std::numeric_limits<Int>::min())
        capacity("negate");
    r.num_ = -num_;
    r.den_ = den_;
    return r;
}

TimeValue& TimeValue::operator+=(const TimeValue& other)
{
    if (den_ == other.den_) {
        if (den_ == 1) {
            num_ = add(num_, other.num_);
            return *this;
        }
        *this = TimeValue(add(num_, other.num_), den_);
        return *this;
    }
    Int g = gcd_signed(den_, other.den_);
    Int lhs_scale = other.den_ / g;
    Int rhs_scale = den_ / g;
    Int n = add(mul(num_, lhs_scale), mul(other.num_, rhs_scale));
    Int d = mul(den_, lhs_scale);
    *this = TimeValue(n, d);
    return *this;
}

TimeValue& TimeValue::operator-=(const TimeValue& other)
{
    return *this += -other;
}

TimeValue& TimeValue::operator*=(const TimeValue& other)
{
    if (den_ == 1 && other.den_ == 1) {
        num_ = mul(num_, other.num_);
        return *this;
    }
    Int g1 = gcd_signed(num_, other.den_);
    Int g2 = gcd_signed(other.num_, den_);
    if (g1 == 0)
        g1 = 1;
    if (g2 == 0)
        g2 = 1;
    Int n = mul(num_ / g1, other.num_ / g2);
    Int d = mul(den_ / g2, other.den_ / g1);
    *this = TimeValue(n, d);
    return *this;
}

TimeValue& TimeValue::operator/=(const TimeValue& other)
{
    if (other.num_ == 0)
        throw std::domain_error("division of time value by zero");
    TimeValue reciprocal;
    reciprocal.num_ = other.num_ < 0 ? -other.den_ : other.den_;
    reciprocal.den_ = other.num_ < 0 ? -other.num_ : other.num_;
    return *this *= reciprocal;
}

std::strong_ordering operator<=>(const TimeValue& a, const TimeValue& b)
{
    if (a.den_ == b.den_)
        return a.num_ <=> b.num_;
    int c = compare_fractions(a.num_, a.den_, b.num_, b.den_);
    return c < 0 ? std::strong_ordering::less : (c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
}

TimeValue min(const TimeValue& a, const TimeValue& b)
{
    return b < a ? b : a;
}

TimeValue max(const TimeValue& a, const TimeValue& b)
{
    return a < b ? b : a;
}

TimeValue lcm(const TimeValue& a, const TimeValue& b)
{
    if (a.numerator() <= 0 || b.numerator() <= 0)
        throw std::domain_error("lcm of non-positive values");
    Int gn = gcd_signed(a.numerator(), b.numerator());
    Int num = mul(a.numerator() / gn, b.numerator());
    Int den = gcd_signed(a.denominator(), b.denominator());
    return {num, den};
}

std::ostream& operator<<(std::ostream& os, const TimeValue& value)
{
    return os << value.to_string();
}

} // namespace rbr
