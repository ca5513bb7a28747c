#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>

#include "enroute/money.hpp"

namespace enroute {

inline std::string with_commas(std::int64_t value) {
    std::string digits = std::to_string(value < 0 ? -value : value);
    std::string out;
    int count = 0;
    for (auto it = digits.rbegin(); it != digits.rend(); ++it) {
        if (count && count % 3 == 0) out.push_back(',');
        out.push_back(*it);
        ++count;
    }
    if (value < 0) out.push_back('-');
    return {out.rbegin(), out.rend()};
}

// "$5.94" — micro-dollar rational rounded half up to cents.
inline std::string money_cents(const Rational& micro) {
    std::int64_t cents = (micro / Rational(10'000)).round_half_up();
    std::string s = "$" + with_commas(cents / 100) + ".";
    std::int64_t frac = cents % 100;
    if (frac < 10) s += "0";
    s += std::to_string(frac);
    return s;
}

// "$5,940" — micro-dollar rational rounded half up to whole dollars.
inline std::string money_whole(const Rational& micro) {
    return "$" + with_commas((micro / Rational(1'000'000)).round_half_up());
}

inline std::string fixed_str(double value, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, value);
    return buf;
}

inline std::int64_t round_half_up(double value) {
    return static_cast<std::int64_t>(std::floor(value + 0.5));
}

} // namespace enroute
