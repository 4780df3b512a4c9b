#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cctype>
#include <string>
#include <string_view>

#include "fracmech/errors.hpp"

namespace fracmech {

using Integer = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline Rational make_rational(long long num, long long den = 1)
{
    return Rational(Integer(num), Integer(den));
}

inline double to_double(const Rational& r)
{
    return r.convert_to<double>();
}

inline std::string to_string(const Rational& r)
{
    const Integer num = boost::multiprecision::numerator(r);
    const Integer den = boost::multiprecision::denominator(r);
    if (den == 1) {
        return num.str();
    }
    return num.str() + "/" + den.str();
}

namespace detail {

inline Integer parse_digits(std::string_view digits, std::string_view whole)
{
    if (digits.empty()) {
        throw ParseError("malformed number '" + std::string(whole) + "'");
    }
    Integer value = 0;
    for (char c : digits) {
        if (!std::isdigit(static_cast<unsigned char>(c))) {
            throw ParseError("malformed number '" + std::string(whole) + "'");
        }
        value = value * 10 + (c - '0');
    }
    return value;
}

} // namespace detail

// Parses "3", "-0.25", "1/2", "-7/3" or "1.5e-3" exactly.
inline Rational parse_rational(std::string_view text)
{
    std::string_view s = text;
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
        s.remove_prefix(1);
    }
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
        s.remove_suffix(1);
    }
    if (s.empty()) {
        throw ParseError("empty number");
    }
    bool negative = false;
    if (s.front() == '+' || s.front() == '-') {
        negative = s.front() == '-';
        s.remove_prefix(1);
    }

    Rational value;
    if (auto slash = s.find('/'); slash != std::string_view::npos) {
        Integer num = detail::parse_digits(s.substr(0, slash), text);
        Integer den = detail::parse_digits(s.substr(slash + 1), text);
        if (den == 0) {
            throw ParseError("zero denominator in '" + std::string(text) + "'");
        }
        value = Rational(num, den);
    } else {
        long long exponent = 0;
        if (auto e = s.find_first_of("eE"); e != std::string_view::npos) {
            std::string exp_text(s.substr(e + 1));
            try {
                std::size_t used = 0;
                exponent = std::stoll(exp_text, &used);
                if (used != exp_text.size()) {
                    throw ParseError("malformed exponent in '" + std::string(text) + "'");
                }
            } catch (const std::logic_error&) {
                throw ParseError("malformed exponent in '" + std::string(text) + "'");
            }
            s = s.substr(0, e);
        }
        std::string_view int_part = s;
        std::string_view frac_part;
        if (auto dot = s.find('.'); dot != std::string_view::npos) {
            int_part = s.substr(0, dot);
            frac_part = s.substr(dot + 1);
        }
        if (int_part.empty() && frac_part.empty()) {
            throw ParseError("malformed number '" + std::string(text) + "'");
        }
        Integer mantissa = int_part.empty() ? Integer(0) : detail::parse_digits(int_part, text);
        Integer scale = 1;
        for (char c : frac_part) {
            if (!std::isdigit(static_cast<unsigned char>(c))) {
                throw ParseError("malformed number '" + std::string(text) + "'");
            }
            mantissa = mantissa * 10 + (c - '0');
            scale *= 10;
        }
        value = Rational(mantissa, scale);
        if (exponent != 0) {
            Integer p = boost::multiprecision::pow(Integer(10), static_cast<unsigned>(exponent < 0 ? -exponent : exponent));
            value = exponent > 0 ? Rational(value * p) : Rational(value / p);
        }
    }
    return negative ? Rational(-value) : value;
}

} // namespace fracmech
