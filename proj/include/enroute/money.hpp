#pragma once

#include <cstdint>
#include <string>

#include "enroute/error.hpp"

namespace enroute {

// Exact nonnegative rational for money math. Costs are carried as rational
// micro-dollars and rounded once, at presentation. 128-bit terms keep
// token-volume * price products exact well past the 1e9-token scale.
class Rational {
public:
    using Int = __int128;

    Rational() = default;

    Rational(std::int64_t num, std::int64_t den = 1) : num_(num), den_(den) { normalize(); }

    static Rational from_int128(Int num, Int den) {
        Rational r;
        r.num_ = num;
        r.den_ = den;
        r.normalize();
        return r;
    }

    Rational operator*(const Rational& o) const { return from_int128(num_ * o.num_, den_ * o.den_); }
    Rational operator/(const Rational& o) const {
        if (o.num_ == 0) raise(ErrorKind::domain_error, "rational division by zero");
        return from_int128(num_ * o.den_, den_ * o.num_);
    }
    Rational operator+(const Rational& o) const {
        return from_int128(num_ * o.den_ + o.num_ * den_, den_ * o.den_);
    }
    Rational operator-(const Rational& o) const {
        return from_int128(num_ * o.den_ - o.num_ * den_, den_ * o.den_);
    }

    bool operator==(const Rational& o) const { return num_ == o.num_ && den_ == o.den_; }
    bool operator!=(const Rational& o) const { return !(*this == o); }
    bool operator<(const Rational& o) const { return num_ * o.den_ < o.num_ * den_; }

    bool is_zero() const { return num_ == 0; }
    double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }

    std::int64_t numerator64() const { return clamp64(num_); }
    std::int64_t denominator64() const { return clamp64(den_); }

    // Round half up (away from zero for the negative case, which does not
    // occur for costs).
    std::int64_t round_half_up() const {
        Int q;
        if (num_ >= 0) q = (2 * num_ + den_) / (2 * den_);
        else q = -((2 * -num_ + den_) / (2 * den_));
        return clamp64(q);
    }

private:
    static Int gcd(Int a, Int b) {
        while (b != 0) {
            Int t = a % b;
            a = b;
            b = t;
        }
        return a < 0 ? -a : a;
    }

    static std::int64_t clamp64(Int v) {
        if (v > static_cast<Int>(INT64_MAX) || v < static_cast<Int>(INT64_MIN))
            raise(ErrorKind::domain_error, "rational exceeds 64-bit range");
        return static_cast<std::int64_t>(v);
    }

    void normalize() {
        if (den_ == 0) raise(ErrorKind::domain_error, "rational with zero denominator");
        if (den_ < 0) {
            num_ = -num_;
            den_ = -den_;
        }
        Int g = gcd(num_ < 0 ? -num_ : num_, den_);
        if (g > 1) {
            num_ /= g;
            den_ /= g;
        }
    }

    Int num_ = 0;
    Int den_ = 1;
};

} // namespace enroute
