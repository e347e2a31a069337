#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstddef>
#include <string>

namespace fincds {

using Int = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

// Parses "p/q", integers, or plain decimal strings ("0.25") exactly.
// No exponent notation; throws ParseError on anything else.
Rational parse_rational(const std::string& text);

// Canonical "p" or "p/q" form.
std::string format_rational(const Rational& value);

// Decimal expansion with the given number of fractional digits, truncated
// toward zero. Used for float-ish display of exact values.
std::string rational_to_decimal(const Rational& value, int digits);

// Bits needed for numerator plus denominator; 1 for zero.
std::size_t rational_bit_size(const Rational& value);

inline double to_double(const Rational& value) { return value.convert_to<double>(); }

// floor(sqrt(n)) for n >= 0.
Int isqrt(const Int& n);

}  // namespace fincds
