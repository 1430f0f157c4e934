// SPDX-License-Identifier: Apache-2.0
// Exact floor(amount * rates...) where each rate is read as the shortest
// decimal that round-trips to the given double.
#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <initializer_list>
#include <optional>
#include <string_view>

namespace agristable::detail {

__extension__ using Wide = __int128;

struct Decimal {
    std::int64_t mantissa;  // value = mantissa / 10^scale
    int scale;
};

inline constexpr std::int64_t kPow10[] = {1,
                                          10,
                                          100,
                                          1000,
                                          10000,
                                          100000,
                                          1000000,
                                          10000000,
                                          100000000,
                                          1000000000,
                                          10000000000,
                                          100000000000,
                                          1000000000000,
                                          10000000000000,
                                          100000000000000,
                                          1000000000000000,
                                          10000000000000000,
                                          100000000000000000,
                                          1000000000000000000};

// Non-negative finite input only; nullopt when the decimal needs more than
// 18 fractional digits or the mantissa would not fit.
inline std::optional<Decimal> shortest_decimal(double v) {
    if (!(std::isfinite(v) && v >= 0.0)) return std::nullopt;
    if (v == 0.0) return Decimal{0, 0};
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::scientific);
    const std::string_view text(buf, static_cast<std::size_t>(res.ptr - buf));
    const auto e = text.find('e');
    std::int64_t mantissa = 0;
    int frac_digits = 0;
    bool after_point = false;
    for (char c : text.substr(0, e)) {
        if (c == '.') {
            after_point = true;
            continue;
        }
        mantissa = mantissa * 10 + (c - '0');
        if (after_point) ++frac_digits;
    }
    int exponent = 0;
    std::from_chars(text.data() + e + 1 + (text[e + 1] == '+'), text.data() + text.size(), exponent);
    int scale = frac_digits - exponent;
    if (scale < 0) {
        if (-scale > 18) return std::nullopt;
        const Wide m = static_cast<Wide>(mantissa) * kPow10[-scale];
        if (m > INT64_MAX) return std::nullopt;
        mantissa = static_cast<std::int64_t>(m);
        scale = 0;
    }
    if (scale > 18) return std::nullopt;
    return Decimal{mantissa, scale};
}

// 1 - d, for 0 <= d <= 1.
inline Decimal complement(Decimal d) { return {kPow10[d.scale] - d.mantissa, d.scale}; }

// floor(amount * product of factors) in exact integer arithmetic; nullopt if
// an intermediate would overflow.
inline std::optional<std::int64_t> floor_product(std::int64_t amount, std::initializer_list<Decimal> factors) {
    const Wide limit = static_cast<Wide>(1) << 125;
    Wide num = amount;
    Wide den = 1;
    for (const Decimal& d : factors) {
        const Wide abs_num = num < 0 ? -num : num;
        if (d.mantissa != 0 && abs_num > limit / d.mantissa) return std::nullopt;
        if (den > limit / kPow10[d.scale]) return std::nullopt;
        num *= d.mantissa;
        den *= kPow10[d.scale];
    }
    Wide q = num / den;
    if (num % den != 0 && num < 0) --q;
    if (q > INT64_MAX || q < INT64_MIN) return std::nullopt;
    return static_cast<std::int64_t>(q);
}

// floor(amount * rate) with the rate read as its shortest decimal; falls back
// to long double when that form is unavailable.
inline long double floor_scaled(std::int64_t amount, double rate) {
    if (const auto d = shortest_decimal(rate))
        if (const auto q = floor_product(amount, {*d})) return static_cast<long double>(*q);
    return std::floor(static_cast<long double>(amount) * static_cast<long double>(rate));
}

}  // namespace agristable::detail
